"""
Configuration loading.

Defaults ship with the package in ``sknorm_config.yaml``. A user YAML file
may override any subset of them.
"""

from __future__ import annotations

import copy
import logging
import os
from functools import lru_cache
from pathlib import Path

import yaml

from sknorm.errors import ConfigError

_CONFIG_FILE = os.path.join(os.path.dirname(__file__), "sknorm_config.yaml")


@lru_cache(maxsize=1)
def _defaults() -> dict:
    with open(_CONFIG_FILE, "r") as f:
        return yaml.safe_load(f)


def _merge(base: dict, override: dict, where: str) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown configuration key '{where}{key}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"configuration key '{where}{key}' must be a mapping")
            merged[key] = _merge(base[key], value, f"{where}{key}.")
        else:
            merged[key] = value
    return merged


def _check_logging(section: dict) -> None:
    level = section["level"]
    if not isinstance(level, str) or not isinstance(logging.getLevelName(level), int):
        raise ConfigError(f"configuration key 'logging.level' is not a logging level: {level!r}")
    if not isinstance(section["format"], str):
        raise ConfigError("configuration key 'logging.format' must be a string")
    try:
        logging.Formatter(section["format"])
    except ValueError as e:
        raise ConfigError(f"configuration key 'logging.format' is invalid: {e}") from e


def load_config(path: str | Path | None = None) -> dict:
    """
    Return the effective configuration.

    Parameters
    ----------
    path : str or Path, optional
        A YAML file whose values override the packaged defaults.

    Returns
    -------
    dict
        A fresh nested dictionary; callers may mutate it.

    Raises
    ------
    ConfigError
        If the file is not a mapping, names an unknown key or sets an
        unusable logging level or format.
    """
    if path is None:
        return copy.deepcopy(_defaults())

    with open(path, "r", encoding="utf-8") as f:
        try:
            user = yaml.safe_load(f)
        except (yaml.YAMLError, UnicodeDecodeError) as e:
            raise ConfigError(f"cannot parse configuration {path}: {e}") from e

    if user is None:
        user = {}
    if not isinstance(user, dict):
        raise ConfigError(f"configuration {path} must be a mapping")

    config = _merge(_defaults(), user, "")
    _check_logging(config["logging"])
    return config


def setting(section: str, key: str):
    """Shorthand for a single packaged default, e.g. ``setting("solver", "max_steps")``."""
    return _defaults()[section][key]
