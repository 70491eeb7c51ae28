from __future__ import annotations

import importlib.metadata

import sknorm as m


def test_version():
    assert importlib.metadata.version("scikit-norm") == m.__version__
