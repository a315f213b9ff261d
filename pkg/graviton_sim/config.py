# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
User defaults for graviton-sim.

Settings live in ``~/.graviton-sim.conf``, either INI with a ``[default]``
section or YAML with a ``default:`` mapping. Only keys that mirror CLI
options are accepted (see ``cli_options``); unknown keys are warned about
and ignored.

Priority order: CLI args > ~/.graviton-sim.conf > hardcoded defaults
"""

import configparser
import logging
import os
from typing import Any, Dict, Iterable, Optional, Tuple

import yaml

from graviton_sim.cli_options import build_config_field_types

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.expanduser("~/.graviton-sim.conf")
DEFAULTS_SECTION = "default"

_FIELD_TYPES: Dict[str, type] = build_config_field_types()


def _typed(key: str, value: Any) -> Any:
    expected = _FIELD_TYPES[key]
    # bool is an int subclass; YAML "true" must not pass as a job count.
    if isinstance(value, bool):
        raise ValueError(f"Config field '{key}' expects {expected.__name__}, got a boolean")
    if isinstance(value, expected):
        return value
    try:
        return expected(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"Config field '{key}' expects {expected.__name__}, got {value!r}") from exc


def _settings(items: Iterable[Tuple[Any, Any]], path: str) -> Dict[str, Any]:
    """Keep the recognised, non-empty entries of the defaults section, converted to their option types."""
    settings: Dict[str, Any] = {}
    for raw_key, value in items:
        key = str(raw_key)
        if key not in _FIELD_TYPES:
            logger.warning("Unknown config key '%s' in the default section of '%s'; ignoring.", key, path)
        elif value is None:
            logger.warning("Config key '%s' has no value in '%s'; ignoring.", key, path)
        else:
            settings[key] = _typed(key, value)
    return settings


def load_ini_config(path: str) -> Dict[str, Any]:
    """
    Read the ``[default]`` section of an INI config file.

    Raises:
        ValueError: When the file is unreadable or malformed, or a value has the wrong type.
    """
    parser = configparser.ConfigParser(allow_no_value=True, delimiters=("=", ":"), interpolation=None)
    try:
        found = parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ValueError(f"Malformed config file '{path}': {exc}") from exc
    if not found:
        raise ValueError(f"Cannot read config file '{path}'.")
    if not parser.has_section(DEFAULTS_SECTION):
        return {}
    return _settings(parser.items(DEFAULTS_SECTION), path)


def load_yaml_config(path: str) -> Dict[str, Any]:
    """
    Read the ``default`` mapping of a YAML config file with ``yaml.safe_load``.

    Raises:
        ValueError: When the file is unreadable or malformed, or a value has the wrong type.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            document = yaml.safe_load(fh)
    except OSError as exc:
        raise ValueError(f"Cannot read config file '{path}': {exc}") from exc
    except yaml.YAMLError as exc:
        raise ValueError(f"Malformed YAML in config file '{path}': {exc}") from exc

    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ValueError(f"Config file '{path}' must hold a mapping, not {type(document).__name__}.")
    section = document.get(DEFAULTS_SECTION) or {}
    if not isinstance(section, dict):
        raise ValueError(f"'{DEFAULTS_SECTION}' in '{path}' must be a mapping.")
    return _settings(section.items(), path)


def is_yaml_file(path: str) -> bool:
    """
    Guess the flavor of a text file from its first meaningful line.

    Blank lines and ``#``/``;`` comments are skipped; a line opening with
    ``[`` marks INI. Unreadable and empty files count as INI.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                text = line.strip()
                if text and text[0] not in "#;":
                    return text[0] != "["
    except (OSError, UnicodeDecodeError):
        return False
    return False


def load_config(path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load the user defaults file; a missing file yields no settings.

    Raises:
        ValueError: If the file exists but cannot be used.
    """
    path = path or DEFAULT_CONFIG_PATH
    if not os.path.exists(path):
        return {}
    flavor = "YAML" if is_yaml_file(path) else "INI"
    logger.debug("Loading %s config from '%s'.", flavor, path)
    return load_yaml_config(path) if flavor == "YAML" else load_ini_config(path)
