"""Loss modelled as impure single-photon inputs.

Each principal source emits ``mu |1><1| + (1 - mu) |0><0|``. Because the
scheme is linear in its input, the heralded output is a mixture of the
branches seeded by every sub-pattern of the ``|1...1>`` input.

For two qubits the branch outputs are fixed by the achieved output
coefficients ``c`` and the pick-off transmissions, which yields closed forms
for the success probability and fidelity as ratios of quadratics in ``mu``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateStateError, DomainError, PreconditionError, UnsupportedShapeError
from .fock import StateVector, ensemble_fidelity, qubit_basis
from .heralding import SchemeConfig, ideal_output, pickoff_output, projector_coefficients
from .optimizer import TargetState, coefficient_residual


@dataclass(frozen=True)
class LossModel:
    """Overall efficiency ``mu`` shared by every source, channel and detector."""

    mu: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise DomainError(f"efficiency mu = {self.mu} outside [0, 1]")

    def weight(self, occupations: Sequence[int]) -> float:
        """Probability that the sources emit the given 0/1 pattern."""
        k = sum(occupations)
        return self.mu ** k * (1.0 - self.mu) ** (len(occupations) - k)


@dataclass(frozen=True)
class LossCoefficients:
    """``A, B`` shape the success probability; ``C, D`` the fidelity numerator.

    ``overlap`` is the ideal fidelity ``|<target|c>|^2`` of the lossless
    output; it is one for an exactly solved config.
    """

    A: float
    B: float
    C: float
    D: float
    overlap: float = 1.0


def _require_two_qubits(cfg: SchemeConfig):
    if cfg.n_qubits != 2:
        raise UnsupportedShapeError(
            f"closed-form loss expressions exist for two qubits only (got N = {cfg.n_qubits}); "
            "use the ensemble functions instead")


def achieved_coefficients(cfg: SchemeConfig, target: TargetState,
                          tol: float = 1e-6) -> Tuple[Dict[Tuple[int, ...], complex], float]:
    """Normalized output coefficients and ideal success probability of a solved config.

    The closed forms are exact identities in the achieved coefficients, so
    they are used instead of the target's. ``tol`` bounds how far the
    achieved state may sit from the target (a precondition, not a fudge).
    """
    out = ideal_output(cfg)
    pr = out.norm_squared()
    if pr == 0.0:
        raise PreconditionError("config heralds nothing from |1...1>")
    keys = qubit_basis(cfg.n_qubits)
    o = np.array([out[k] for k in keys])
    res = coefficient_residual(o, target.as_array())
    if res > tol:
        raise PreconditionError(f"config is not solved for the target (residual {res:.3e} > {tol:.1e})")
    c = o / np.sqrt(pr)
    return {k: complex(v) for k, v in zip(keys, c)}, float(pr)


def loss_coefficients(cfg: SchemeConfig, target: TargetState, tol: float = 1e-6) -> LossCoefficients:
    _require_two_qubits(cfg)
    c, _ = achieved_coefficients(cfg, target, tol)
    t1, t2 = abs(cfg.pickoff[0][0]), abs(cfg.pickoff[1][0])
    if t1 == 0.0 or t2 == 0.0:
        raise DegenerateStateError("loss coefficients need nonzero pick-off transmissions")
    c01, c10, c11 = c[(0, 1)], c[(1, 0)], c[(1, 1)]
    # overlaps are taken with the target so the forms stay exact for near-solutions
    g = {k: v.conjugate() for k, v in target.coefficients.items()}
    a = abs(c11) ** 2 / (t1 * t2) ** 2
    b = (abs(c11) ** 2 + abs(c01) ** 2) / t2 ** 2 + (abs(c11) ** 2 + abs(c10) ** 2) / t1 ** 2
    cc = abs(g[(0, 0)] * c11) ** 2 / (t1 * t2) ** 2
    d = (abs(g[(1, 0)] * c11 + g[(0, 0)] * c01) ** 2 / t2 ** 2
         + abs(g[(0, 1)] * c11 + g[(0, 0)] * c10) ** 2 / t1 ** 2)
    overlap = abs(sum(g[k] * c[k] for k in c)) ** 2
    return LossCoefficients(a, b, cc, d, overlap)


def impure_branch_outputs(cfg: SchemeConfig, target: TargetState,
                          tol: float = 1e-6) -> Dict[Tuple[int, int], StateVector]:
    """Closed-form outputs for the inputs ``|00>, |10>, |01>, |11>``."""
    _require_two_qubits(cfg)
    c, pr = achieved_coefficients(cfg, target, tol)
    t1, t2 = cfg.pickoff[0][0], cfg.pickoff[1][0]
    s = np.sqrt(pr)
    return {
        (0, 0): StateVector(2, {(0, 0): c[(1, 1)] * s / (t1 * t2)}),
        (1, 0): StateVector(2, {(1, 0): c[(1, 1)] * s / t2, (0, 0): c[(0, 1)] * s / t2}),
        (0, 1): StateVector(2, {(0, 1): c[(1, 1)] * s / t1, (0, 0): c[(1, 0)] * s / t1}),
        (1, 1): StateVector(2, {k: v * s for k, v in c.items()}),
    }


def _check_mu(mu: float) -> float:
    return LossModel(mu).mu


def lossy_success_probability(mu: float, target: TargetState, cfg: SchemeConfig,
                              tol: float = 1e-6) -> float:
    mu = _check_mu(mu)
    co = loss_coefficients(cfg, target, tol)
    _, pr = achieved_coefficients(cfg, target, tol)
    return pr * (mu ** 2 + (1 - mu) ** 2 * co.A + mu * (1 - mu) * co.B)


def lossy_fidelity(mu: float, target: TargetState, cfg: SchemeConfig, tol: float = 1e-6) -> float:
    mu = _check_mu(mu)
    co = loss_coefficients(cfg, target, tol)
    den = mu ** 2 + (1 - mu) ** 2 * co.A + mu * (1 - mu) * co.B
    if den == 0.0:
        raise DegenerateStateError("lossy output has zero probability")
    return (mu ** 2 * co.overlap + (1 - mu) ** 2 * co.C + mu * (1 - mu) * co.D) / den


def fidelity_decay_rate(target: TargetState, cfg: SchemeConfig, tol: float = 1e-6) -> float:
    """``dF/dmu`` at ``mu = 1``: ``B - D`` for an exact solution, ``overlap * B - D`` in general."""
    co = loss_coefficients(cfg, target, tol)
    return co.overlap * co.B - co.D


# --- ensemble path (any N) -----------------------------------------------------

def ensemble_branches(cfg: SchemeConfig, mu: float) -> List[Tuple[float, StateVector]]:
    """``(weight, un-normalized output)`` for every 0/1 source pattern."""
    model = LossModel(mu)
    proj = projector_coefficients(cfg)
    branches = []
    for occ in product((0, 1), repeat=cfg.n_qubits):
        w = model.weight(occ)
        if w == 0.0:
            continue
        branches.append((w, pickoff_output(cfg, proj, StateVector.basis(occ))))
    return branches


def ensemble_success_probability(cfg: SchemeConfig, mu: float) -> float:
    return float(sum(w * s.norm_squared() for w, s in ensemble_branches(cfg, mu)))


def ensemble_fidelity_to(cfg: SchemeConfig, target: TargetState, mu: float) -> float:
    return ensemble_fidelity(target.state_vector(), ensemble_branches(cfg, mu))


def mu_sweep(cfg: SchemeConfig, target: TargetState, grid: Sequence[float],
             tol: float = 1e-6) -> List[Tuple[float, Optional[float], Optional[float]]]:
    """Rows ``(mu, probability, fidelity)``; closed forms for two qubits, ensemble otherwise.

    A point that cannot be evaluated becomes ``None`` and the sweep continues.
    """
    rows = []
    for mu in grid:
        try:
            if cfg.n_qubits == 2:
                rows.append((float(mu), lossy_success_probability(mu, target, cfg, tol),
                             lossy_fidelity(mu, target, cfg, tol)))
            else:
                rows.append((float(mu), ensemble_success_probability(cfg, mu),
                             ensemble_fidelity_to(cfg, target, mu)))
        except (DomainError, DegenerateStateError):
            rows.append((float(mu), None, None))
    return rows
