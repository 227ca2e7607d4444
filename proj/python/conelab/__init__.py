"""Camassa-Holm dynamics and their Euler lift on a cone."""

import json
import os

import numpy as np

from ._core import (
    BlowupError,
    CollisionError,
    ConelabError,
    DomainError,
    InvalidArgument,
    ch_energy,
    ch_tendency,
    collision_time,
    consistency_residual,
    cross_validate_formula,
    curl_identity,
    curvature_scan,
    eisenhart_harmonic,
    fiber_exponent,
    lift_velocity,
    peakon_hamiltonian,
    peakon_step,
    pressure,
    simulate_ch,
    weighted_divergence,
)

__all__ = [
    "BlowupError",
    "CollisionError",
    "ConelabError",
    "DomainError",
    "InvalidArgument",
    "ch_energy",
    "ch_tendency",
    "collision_time",
    "consistency_residual",
    "cross_validate_formula",
    "curl_identity",
    "curvature_scan",
    "eisenhart_harmonic",
    "fiber_exponent",
    "grid",
    "lift_velocity",
    "peakon_hamiltonian",
    "peakon_step",
    "pressure",
    "run_command",
    "simulate_ch",
    "weighted_divergence",
]


def grid(n, length=2 * np.pi):
    """Uniform periodic grid points j * length / n."""
    return np.arange(n) * (length / n)


def run_command(command, out, **options):
    """Run one lab subcommand, writing artifacts into out, and return its report."""
    config = {"command": command, "out": os.fspath(out), **options}
    return json.loads(_core_run(json.dumps(config)))


from ._core import run_command_json as _core_run  # noqa: E402
