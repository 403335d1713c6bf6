"""Rule-set advisors for human-AI teams.

Configs are plain dicts with the same layout as the JSON files the CLI
reads; results come back as dicts.
"""

import json
import os
from pathlib import Path

from . import _core
from ._core import ConfigError, DataError, paired_ttest, spearman

_presets = Path(__file__).with_name("presets")
if _presets.is_dir():
    os.environ.setdefault("TEAMRULES_PRESET_DIR", str(_presets))

__all__ = [
    "ConfigError",
    "DataError",
    "fit",
    "generate",
    "load_preset",
    "paired_ttest",
    "read_results",
    "resolve_config",
    "spearman",
    "sweep",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def resolve_config(config, base_dir=""):
    """Config with every default filled in."""
    return json.loads(_core.resolve_config(_text(config), str(base_dir)))


def load_preset(name):
    path = Path(_core.preset_path(name))
    return resolve_config(path.read_text(), path.parent)


def generate(dataset, n, seed=0):
    """(X, y, feature_names) for "checkers" or "gaussian"."""
    return _core.generate(dataset, n, seed)


def fit(config, base_dir=""):
    """Fits the first mode/alpha/ADB/seed of the config and evaluates it."""
    return json.loads(_core.fit(_text(config), str(base_dir)))


def sweep(config, base_dir="", jobs=1):
    """{"records": [...], "failures": [...]} for an alpha or discretion sweep."""
    return json.loads(_core.sweep(_text(config), str(base_dir), jobs))


def read_results(path):
    return json.loads(_core.read_results(str(path)))
