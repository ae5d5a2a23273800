"""D-bar reconstruction of complex admittivity from EIT data."""

import json
import os

from ._dbareit import (
    Config,
    Error,
    Reconstruction,
    Simulation,
    compare_runs,
    radial_dn_eigenvalue,
    reconstruct,
    simulate,
    write_reconstruction,
)
from . import _dbareit

__all__ = [
    "Config",
    "Error",
    "Reconstruction",
    "Simulation",
    "compare_runs",
    "load_config",
    "radial_dn_eigenvalue",
    "reconstruct",
    "run_pipeline",
    "run_reconstruct",
    "simulate",
    "write_reconstruction",
]


def load_config(path, overrides=None):
    """Load an INI run configuration; `overrides` maps "section.key" to values."""
    items = [f"{k}={v}" for k, v in (overrides or {}).items()]
    return Config.load(os.fspath(path), items)


def run_pipeline(config):
    """Simulate and reconstruct; returns the report as a dict."""
    return json.loads(_dbareit.run_pipeline(config))


def run_reconstruct(config, input_dir):
    """Reconstruct from DN files in `input_dir`; returns the report as a dict."""
    return json.loads(_dbareit.run_reconstruct(config, os.fspath(input_dir)))
