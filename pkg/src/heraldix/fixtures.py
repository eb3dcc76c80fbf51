"""Packaged reference configuration for the two-qubit cluster state."""

from __future__ import annotations

import json
import math
from importlib import resources
from typing import Tuple

import numpy as np

from .heralding import SchemeConfig
from .network import UnitaryMatrix, matrix_from_json
from .optimizer import TargetState


def appendix_d_raw() -> dict:
    """The fixture exactly as printed, before any projection."""
    text = resources.files("heraldix").joinpath("data/appendix_d.json").read_text()
    return json.loads(text)


def appendix_d_printed_matrix() -> np.ndarray:
    return matrix_from_json(appendix_d_raw()["unitary_printed"])


def appendix_d_config() -> SchemeConfig:
    """Reference scheme with the printed matrix projected onto the nearest unitary.

    Three-decimal rounding leaves the printed matrix about 1e-3 away from
    unitarity; the polar projection moves no entry by more than that. The
    projector phase follows ``theta = phi - zeta``.
    """
    doc = appendix_d_raw()
    u = UnitaryMatrix.nearest(matrix_from_json(doc["unitary_printed"]))
    alphas = doc["alpha"]
    ts = doc["t"]
    theta = doc["target"]["phi"] - doc["zeta"]
    return SchemeConfig(
        n_qubits=2, n_ancilla_photons=0, n_measured=2, unitary_dim=3, unitary=u,
        pickoff=tuple((t, math.sqrt(1 - t * t)) for t in ts),
        qubit_projectors=tuple((a, math.sqrt(1 - a * a)) for a in alphas),
        theta=theta)


def appendix_d_target() -> TargetState:
    tgt = appendix_d_raw()["target"]
    return TargetState.cluster(tgt["phi"], tgt["chi"])


def appendix_d_pair() -> Tuple[SchemeConfig, TargetState]:
    return appendix_d_config(), appendix_d_target()
