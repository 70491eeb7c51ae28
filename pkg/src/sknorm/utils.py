"""
Small numerical helpers shared by the enumeration-based oracles.
"""

from __future__ import annotations

import numpy as np


def cartesian_product(*arrays):
    """
    Create a Cartesian product of input arrays.

    Parameters
    -----------

    *arrays:
       Variable length arrays to compute product

    Returns
    -------

    Array of shape (product_of_lengths, num_arrays)
    where `product_of_lengths` is the product of the lengths of the input arrays,
    and `num_arrays` is the number of input arrays. Each row contains one element
    of the Cartesian product; the last column varies fastest.
    """
    if not arrays:
        return np.empty((1, 0))

    meshes = np.meshgrid(*arrays, indexing="ij")
    cartesian = np.stack(meshes, axis=-1)
    return cartesian.reshape(-1, len(arrays))


def boolean_grid(n: int) -> np.ndarray:
    """
    Every assignment of ``n`` booleans, one per row.

    Row ``r`` is the binary expansion of ``r`` with column 0 as the most
    significant bit, so the first row is all-false and the last all-true.

    Parameters
    ----------
    n : int
        Number of columns. Must be non-negative.

    Returns
    -------
    numpy.ndarray
        Boolean array of shape ``(2**n, n)``.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return cartesian_product(*([np.array([False, True])] * n)).astype(bool)

