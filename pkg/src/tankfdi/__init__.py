"""Fault detection toolkit for the three-tank hydraulic benchmark.

Simulates the supervised process, evaluates analytical-redundancy residuals,
runs a multiple-fault fuzzy detector over them, and tunes the detector's
membership functions with particle-swarm or genetic optimization.
"""

from . import fuzzy, harness, plant, render, residuals, tuner

__version__ = "0.1.0"

__all__ = ["plant", "residuals", "fuzzy", "tuner", "harness", "render", "__version__"]
