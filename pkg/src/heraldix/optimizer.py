"""Coefficient matching and success-probability maximization.

Two routes exist. Two-qubit cluster targets go through a triangular
elimination of the matching equations, leaving seven real variables and a
single row-normalization constraint. Every other target uses a generic
equality-constrained search over a Reck mesh, pick-off angles and projector
angles, with the target-overlap mismatch as the constraint set.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import (ConfigurationError, DegenerateStateError, InfeasibleError,
                     NoCompletionError, SingularConfigurationError)
from .fock import StateVector, fidelity, qubit_basis
from .heralding import SchemeConfig, ideal_output
from .network import UnitaryMatrix, permanent, reck_decompose, reck_matrix

RESIDUAL_TOL = 1e-6


# --- targets -------------------------------------------------------------------

@dataclass(frozen=True)
class TargetState:
    """Normalized ``N``-qubit target keyed by bit tuples.

    ``family`` and ``params`` record how a named target was built so the
    optimizer can pick a specialised solver.
    """

    n_qubits: int
    coefficients: Mapping[Tuple[int, ...], complex]
    family: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        coeffs = {tuple(int(b) for b in k): complex(v) for k, v in self.coefficients.items()}
        full = {b: coeffs.get(b, 0j) for b in qubit_basis(self.n_qubits)}
        if set(coeffs) - set(full):
            raise ValueError("target keys must be bit tuples of length n_qubits")
        norm = sum(abs(v) ** 2 for v in full.values())
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"target coefficients must be normalized (sum |c|^2 = {norm!r})")
        object.__setattr__(self, "coefficients", full)
        object.__setattr__(self, "params", dict(self.params))

    @classmethod
    def cluster(cls, phi: float = math.pi, chi: float = 0.0) -> "TargetState":
        g = cmath.exp(1j * chi) / 2.0
        coeffs = {(0, 0): g, (0, 1): g, (1, 0): g, (1, 1): g * cmath.exp(1j * phi)}
        return cls(2, coeffs, "cluster", {"phi": float(phi), "chi": float(chi)})

    @classmethod
    def ghz(cls, phi: float = 0.0, n_qubits: int = 3) -> "TargetState":
        s = 1.0 / math.sqrt(2.0)
        coeffs = {(0,) * n_qubits: s, (1,) * n_qubits: s * cmath.exp(1j * phi)}
        return cls(n_qubits, coeffs, "ghz", {"phi": float(phi)})

    @classmethod
    def from_state(cls, state: StateVector) -> "TargetState":
        nrm = state.norm()
        if nrm == 0:
            raise DegenerateStateError("target state is zero")
        if state.max_occupation() > 1:
            raise ValueError("targets must be single-rail qubit states")
        coeffs = {k.occupations: v / nrm for k, v in state.amplitudes.items()}
        return cls(state.mode_count, coeffs)

    def as_array(self) -> np.ndarray:
        return np.array([self.coefficients[b] for b in qubit_basis(self.n_qubits)])

    def state_vector(self) -> StateVector:
        return StateVector(self.n_qubits, self.coefficients)

    def to_json(self) -> dict:
        doc = self.state_vector().to_json()
        doc["family"] = self.family
        doc["params"] = dict(self.params)
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "TargetState":
        target = cls.from_state(StateVector.from_json(doc))
        return replace(target, family=doc.get("family", "custom"), params=doc.get("params", {}))


# --- sizing --------------------------------------------------------------------

# N = 3: the all-ones amplitude is fixed by the detectors alone, so the network's
# global phase supplies the missing relative phase and U(6) suffices.
SIZE_OVERRIDES = {3: 6}


def min_unitary_size(n_qubits: int) -> int:
    """Smallest network with enough free parameters: ``2^N - 1``; ``N = 1`` needs none."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if n_qubits == 1:
        return 0
    return 2 ** n_qubits - 1


def scheme_unitary_size(n_qubits: int) -> int:
    return SIZE_OVERRIDES.get(n_qubits, min_unitary_size(n_qubits))


def default_shape(n_qubits: int) -> Tuple[int, int, int, int]:
    """``(N, K, L, M)`` used when the caller does not specify one."""
    m = scheme_unitary_size(n_qubits)
    if n_qubits == 1:
        return (1, 0, 1, 1)
    return (n_qubits, 0, n_qubits, m)


# --- two-qubit closed forms -----------------------------------------------------

def _beta(a: complex) -> complex:
    return complex(math.sqrt(max(0.0, 1.0 - abs(a) ** 2)))


def sylvester_coefficients(alpha1, alpha2, t1, t2, p, beta1=None, beta2=None):
    """``(S00, S10, S11)`` of the two-qubit elimination."""
    b1 = _beta(alpha1) if beta1 is None else beta1
    b2 = _beta(alpha2) if beta2 is None else beta2
    r1 = math.sqrt(max(0.0, 1.0 - abs(t1) ** 2))
    r2 = math.sqrt(max(0.0, 1.0 - abs(t2) ** 2))
    s00 = r1 * r2 * b1 * b2 / p
    s10 = r1 * t2 * alpha2 * b1 / p
    s11 = r1 * t2 * alpha1 * b2 / p
    return s00, s10, s11


def sylvester_solve_2q(target: TargetState, u12: complex, u22: complex, alpha1: complex,
                       alpha2: complex, t1: float, t2: float, p: complex,
                       beta1=None, beta2=None) -> Tuple[complex, complex]:
    """Solve the |00> and |01> matching equations for ``(u21, u11)``.

    The two equations are linear in ``u11``; eliminating it through the
    Sylvester resultant leaves a linear equation for ``u21``.
    """
    c = target.coefficients
    s00, s10, s11 = sylvester_coefficients(alpha1, alpha2, t1, t2, p, beta1, beta2)
    denom = s00 * (s11 * u22 - s10 * u12)
    if abs(denom) < 1e-12 or abs(s10) < 1e-12:
        raise SingularConfigurationError("vanishing denominator in the two-qubit elimination")
    u21 = (s00 * c[(0, 1)] * u22 - s10 * c[(0, 0)]) / denom
    u11 = c[(0, 1)] / s10 - (s11 / s10) * u21
    return u21, u11


def sylvester_residuals(target: TargetState, u11, u12, u21, u22, alpha1, alpha2, t1, t2, p,
                        beta1=None, beta2=None) -> Tuple[complex, complex]:
    """Values of the |00> and |01> matching polynomials at a point."""
    c = target.coefficients
    s00, s10, s11 = sylvester_coefficients(alpha1, alpha2, t1, t2, p, beta1, beta2)
    f1 = s00 * (u11 * u22 + u12 * u21) - c[(0, 0)]
    f2 = s10 * u11 + s11 * u21 - c[(0, 1)]
    return f1, f2


def sylvester_determinant(target: TargetState, u12, u21, u22, alpha1, alpha2, t1, t2, p,
                          beta1=None, beta2=None) -> complex:
    """Resultant of the two matching polynomials with respect to ``u11``."""
    c = target.coefficients
    s00, s10, s11 = sylvester_coefficients(alpha1, alpha2, t1, t2, p, beta1, beta2)
    syl = np.array([[s00 * u22, s00 * u12 * u21 - c[(0, 0)]],
                    [s10, s11 * u21 - c[(0, 1)]]])
    return complex(np.linalg.det(syl))


@dataclass(frozen=True)
class ChainSolution:
    """Active rows of ``U(3)`` and scheme parameters produced by the cluster chain."""

    p11: complex
    p12: complex
    p13: complex
    p21: complex
    p22: complex
    p23: complex
    alpha1: float
    alpha2: float
    t1: float
    t2: float
    zeta: float
    theta: float
    phi: float

    @property
    def rows(self) -> np.ndarray:
        return np.array([[self.p11, self.p12, self.p13], [self.p21, self.p22, self.p23]])

    @property
    def row2_residual(self) -> float:
        """The one constraint the chain leaves open: ``|row 2|^2 - 1``."""
        return abs(self.p21) ** 2 + abs(self.p22) ** 2 + abs(self.p23) ** 2 - 1.0

    @property
    def success_probability(self) -> float:
        return 4.0 * (self.alpha1 * self.alpha2 * self.t1 * self.t2) ** 2

    def matching_residuals(self) -> List[complex]:
        """Left-hand sides minus one of the four cluster relations."""
        a1, a2, t1, t2, z = self.alpha1, self.alpha2, self.t1, self.t2, self.zeta
        b1, b2 = math.sqrt(1 - a1 * a1), math.sqrt(1 - a2 * a2)
        r1, r2 = math.sqrt(1 - t1 * t1), math.sqrt(1 - t2 * t2)
        ez = cmath.exp(1j * z)
        per = self.p11 * self.p22 + self.p12 * self.p21
        return [
            complex(self.theta - (self.phi - z)),
            (b2 / a2 * self.p22 + b1 / a1 * self.p12) * (r2 / t2) * ez - 1,
            (b2 / a2 * self.p21 + b1 / a1 * self.p11) * (r1 / t1) * ez - 1,
            b1 * b2 * r1 * r2 / (a1 * a2 * t1 * t2) * per * cmath.exp(1j * (2 * z - self.phi)) - 1,
        ]


def regular_chain_2q_cluster(phi: float, chi: float, p12: complex, alpha1: float, alpha2: float,
                             t1: float, t2: float, zeta: float) -> ChainSolution:
    """Eliminate the cluster matching equations in triangular order.

    1. ``P22`` from the |10> relation, as a function of ``P12``.
    2. ``P21`` from the |01> relation, as a function of ``P11``.
    3. The |00> relation is then linear in ``P11``.
    4. Back-substitute for ``P21``.
    5. ``|P13|`` from row-1 normalization (its phase is a free input-port gauge, set to 0).
    6. ``P23`` from row orthogonality.
    Row-2 normalization is left as the constraint for the outer search.
    ``chi`` only sets the global phase and does not enter.
    """
    del chi
    a1, a2 = alpha1, alpha2
    if not (0 < a1 < 1 and 0 < a2 < 1 and 0 < t1 < 1 and 0 < t2 < 1):
        raise SingularConfigurationError("alpha and t must lie strictly inside (0, 1)")
    b1, b2 = math.sqrt(1 - a1 * a1), math.sqrt(1 - a2 * a2)
    r1, r2 = math.sqrt(1 - t1 * t1), math.sqrt(1 - t2 * t2)
    e_mz = cmath.exp(-1j * zeta)
    theta = phi - zeta
    # step 1
    p22 = (a2 / b2) * (t2 / r2 * e_mz - (b1 / a1) * p12)
    # steps 2-3: P21 = g - h*P11 with the |00> relation P11*P22 + P12*P21 = k
    g = (a2 / b2) * (t1 / r1) * e_mz
    h = (a2 * b1) / (b2 * a1)
    k = (a1 * a2 * t1 * t2) / (b1 * b2 * r1 * r2) * cmath.exp(-1j * (2 * zeta - phi))
    denom = p22 - p12 * h
    if abs(denom) < 1e-12:
        raise SingularConfigurationError("the |00> relation degenerates for this P12")
    p11 = (k - p12 * g) / denom
    # step 4
    p21 = g - h * p11
    # step 5
    row1 = abs(p11) ** 2 + abs(p12) ** 2
    if row1 > 1.0 + 1e-12:
        raise SingularConfigurationError("first row exceeds unit norm; no real P13 exists")
    p13 = complex(math.sqrt(max(0.0, 1.0 - row1)))
    # step 6
    if abs(p13) < 1e-12:
        raise SingularConfigurationError("P13 vanishes; orthogonality cannot fix P23")
    p23 = (-(p11 * p21.conjugate() + p12 * p22.conjugate()) / p13).conjugate()
    return ChainSolution(p11, p12, p13, p21, p22, p23, a1, a2, t1, t2, zeta, theta, phi)


def unitary_completion(active, dim: int, tol: float = 1e-9) -> UnitaryMatrix:
    """Embed an ``r x c`` block in the top-left corner of a ``dim x dim`` unitary.

    The block's rows are padded with ``dim - c`` columns so they become
    orthonormal, then the row space is extended by Gram-Schmidt over the
    canonical basis.
    """
    b = np.atleast_2d(np.asarray(active, dtype=complex))
    r, c = b.shape
    if r > dim or c > dim:
        raise NoCompletionError(f"{r}x{c} block does not fit in dimension {dim}")
    gram = np.eye(r) - b @ b.conj().T
    evals, evecs = np.linalg.eigh(gram)
    if evals.min() < -tol:
        raise NoCompletionError(f"block rows are not a contraction (min eigenvalue {evals.min():.3e})")
    room = dim - c
    order = np.argsort(evals)[::-1]
    keep, drop = order[:room], order[room:]
    if drop.size and evals[drop].max() > tol:
        raise NoCompletionError(
            f"completion needs {int(np.sum(evals > tol))} extra columns, only {room} available")
    pad = evecs[:, keep] * np.sqrt(np.clip(evals[keep], 0.0, None))
    rows = np.hstack([b, pad]) if room else b.copy()
    basis = [row for row in rows]
    for e in np.eye(dim, dtype=complex):
        if len(basis) == dim:
            break
        v = e.copy()
        for _ in range(2):
            for w in basis:
                v = v - np.vdot(w, v) / np.vdot(w, w) * w
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
    return UnitaryMatrix(np.array(basis), atol=max(tol, 1e-9))


# --- results -------------------------------------------------------------------

@dataclass(frozen=True)
class Budget:
    restarts: int = 64
    max_evals: int = 10_000
    workers: Optional[int] = None

    def n_workers(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        env = os.environ.get("HERALDIX_THREADS")
        cap = int(env) if env else (os.cpu_count() or 1)
        return max(1, min(cap, self.restarts))


@dataclass(frozen=True)
class OptimizationResult:
    config: SchemeConfig
    success_probability: float
    residual: float
    fidelity: float
    seed: int
    iterations: int
    target: Optional[TargetState] = None
    budget: Optional[Budget] = None
    method: str = ""
    restart_index: int = -1
    # raw search coordinates, kept for warm starts
    vector: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def feasible(self) -> bool:
        return self.residual <= RESIDUAL_TOL

    def to_json(self) -> dict:
        return {
            "success_probability": self.success_probability,
            "residual": self.residual,
            "fidelity": self.fidelity,
            "seed": self.seed,
            "iterations": self.iterations,
            "method": self.method,
            "restart_index": self.restart_index,
            "budget": asdict(self.budget) if self.budget else None,
            "target": self.target.to_json() if self.target else None,
            "config": self.config.to_json(),
            "reck": _reck_json(self.config.unitary),
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "OptimizationResult":
        budget = Budget(**doc["budget"]) if doc.get("budget") else None
        target = TargetState.from_json(doc["target"]) if doc.get("target") else None
        return cls(SchemeConfig.from_json(doc["config"]), float(doc["success_probability"]),
                   float(doc["residual"]), float(doc["fidelity"]), int(doc["seed"]),
                   int(doc["iterations"]), target, budget, doc.get("method", ""),
                   int(doc.get("restart_index", -1)))


def _reck_json(u: UnitaryMatrix) -> dict:
    p = reck_decompose(u)
    return {"angles": [list(a) for a in p.angles], "output_phases": list(p.output_phases)}


def evaluate(config: SchemeConfig, target: TargetState) -> Tuple[float, float, float]:
    """``(success probability, residual, fidelity)`` of a config against a target."""
    out = ideal_output(config)
    pr = out.norm_squared()
    if pr == 0.0:
        return 0.0, float("inf"), 0.0
    o = np.array([out[b] for b in qubit_basis(config.n_qubits)])
    return pr, coefficient_residual(o, target.as_array()), fidelity(target.state_vector(), out)


def coefficient_residual(o: np.ndarray, c: np.ndarray) -> float:
    """Max coefficient mismatch after normalizing ``o`` and aligning its phase to ``c``."""
    nrm = np.linalg.norm(o)
    if nrm == 0:
        return float("inf")
    ov = np.vdot(c, o)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.max(np.abs(o / nrm / phase - c)))


# --- cluster route ---------------------------------------------------------------

_CHAIN_LB = np.array([-1.0, -1.0, 0.02, 0.02, 0.02, 0.02, -math.pi])
_CHAIN_UB = np.array([1.0, 1.0, 0.98, 0.98, 0.98, 0.98, math.pi])


def _chain_unpack(x, phi):
    return regular_chain_2q_cluster(phi, 0.0, complex(x[0], x[1]), x[2], x[3], x[4], x[5], x[6])


def _chain_row2(x, phi):
    try:
        return _chain_unpack(x, phi).row2_residual
    except SingularConfigurationError:
        return 1e3


def _chain_row1_slack(x, phi):
    # |P11|^2 + |P12|^2 <= 1 keeps P13 real; evaluated without raising
    a1, a2, t1, t2, zeta = x[2:7]
    try:
        b1, b2 = math.sqrt(1 - a1 * a1), math.sqrt(1 - a2 * a2)
        r1, r2 = math.sqrt(1 - t1 * t1), math.sqrt(1 - t2 * t2)
    except ValueError:
        return -1.0
    p12 = complex(x[0], x[1])
    e_mz = cmath.exp(-1j * zeta)
    p22 = (a2 / b2) * (t2 / r2 * e_mz - (b1 / a1) * p12)
    g = (a2 / b2) * (t1 / r1) * e_mz
    h = (a2 * b1) / (b2 * a1)
    k = (a1 * a2 * t1 * t2) / (b1 * b2 * r1 * r2) * cmath.exp(-1j * (2 * zeta - phi))
    denom = p22 - p12 * h
    if abs(denom) < 1e-12:
        return -1.0
    p11 = (k - p12 * g) / denom
    return 1.0 - 1e-9 - abs(p11) ** 2 - abs(p12) ** 2


def _chain_polish(x, phi, iters=20):
    """Newton steps on the row-2 constraint along its numerical gradient."""
    x = np.array(x, dtype=float)
    for _ in range(iters):
        h = _chain_row2(x, phi)
        if abs(h) < 1e-15:
            break
        grad = np.zeros_like(x)
        for i in range(len(x)):
            dx = np.zeros_like(x)
            dx[i] = 1e-7
            grad[i] = (_chain_row2(x + dx, phi) - _chain_row2(x - dx, phi)) / 2e-7
        gg = float(grad @ grad)
        if gg == 0:
            break
        x = np.clip(x - h * grad / gg, _CHAIN_LB, _CHAIN_UB)
    return x


def _chain_restart(args):
    x0, phi, max_evals = args
    cons = [{"type": "eq", "fun": lambda x: _chain_row2(x, phi)},
            {"type": "ineq", "fun": lambda x: _chain_row1_slack(x, phi)}]
    obj = lambda x: -4.0 * (x[2] * x[3] * x[4] * x[5]) ** 2  # noqa: E731
    res = minimize(obj, x0, method="SLSQP", bounds=list(zip(_CHAIN_LB, _CHAIN_UB)),
                   constraints=cons,
                   options={"maxiter": max(10, max_evals // 8), "ftol": 1e-15})
    x = _chain_polish(res.x, phi)
    return x, int(res.nit)


def chain_config(sol: ChainSolution) -> SchemeConfig:
    """Turn a chain solution into a full ``U(3)`` scheme."""
    u = unitary_completion(sol.rows, 3)
    r1, r2 = math.sqrt(1 - sol.t1 ** 2), math.sqrt(1 - sol.t2 ** 2)
    b1, b2 = math.sqrt(1 - sol.alpha1 ** 2), math.sqrt(1 - sol.alpha2 ** 2)
    return SchemeConfig(2, 0, 2, 3, u, ((sol.t1, r1), (sol.t2, r2)),
                        ((sol.alpha1, b1), (sol.alpha2, b2)), theta=sol.theta)


def _lhs(n_points: int, lb, ub, seed: int) -> np.ndarray:
    sampler = qmc.LatinHypercube(d=len(lb), seed=np.random.default_rng(seed))
    return qmc.scale(sampler.random(n_points), lb, ub)


def _run_restarts(fn, jobs, budget: Budget):
    workers = budget.n_workers()
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _pick_best(candidates):
    """Max probability among feasible, then lowest residual, then lowest restart index."""
    feasible = [c for c in candidates if c.residual <= RESIDUAL_TOL]
    if feasible:
        return max(feasible, key=lambda c: (round(c.success_probability, 12), -c.restart_index))
    return min(candidates, key=lambda c: (c.residual, c.restart_index))


def optimize_cluster_chain(target: TargetState, budget: Budget = Budget(), seed: int = 0,
                           warm_start: Optional[np.ndarray] = None) -> OptimizationResult:
    phi = float(target.params.get("phi", math.pi))
    starts = _lhs(budget.restarts, _CHAIN_LB, _CHAIN_UB, seed)
    if warm_start is not None:
        starts[0] = np.clip(warm_start, _CHAIN_LB, _CHAIN_UB)
    outs = _run_restarts(_chain_restart, [(x0, phi, budget.max_evals) for x0 in starts], budget)
    candidates = []
    for idx, (x, nit) in enumerate(outs):
        try:
            sol = _chain_unpack(x, phi)
            if abs(sol.row2_residual) > 1e-9:
                continue
            cfg = chain_config(sol)
        except (SingularConfigurationError, NoCompletionError, ValueError):
            continue
        pr, res, fid = evaluate(cfg, target)
        candidates.append(OptimizationResult(cfg, pr, res, fid, seed, nit, target, budget,
                                             "cluster-chain", idx, x))
    if not candidates:
        raise InfeasibleError("no restart produced a valid chain solution")
    best = _pick_best(candidates)
    if not best.feasible:
        raise InfeasibleError(f"best residual {best.residual:.3e} exceeds tolerance",
                              best.residual, best)
    return best


# --- generic route -------------------------------------------------------------------

_ANGLE_MARGIN = 0.05


class _Problem:
    """Flattened search space for the generic route.

    The active block is written as ``S = W[:, :c] diag(sigma) V`` with ``W``
    and ``V`` Reck meshes. Only ``M - L`` singular values may drop below one,
    which is exactly the condition for ``S`` to sit inside a ``U(M)``. The
    remaining coordinates are pick-off angles (``t = cos tau``) and projector
    angles (``alpha = cos eta``).
    """

    def __init__(self, target: TargetState, shape: Tuple[int, int, int, int]):
        n, k, l, m = shape
        if target.n_qubits != n:
            raise ConfigurationError("target and scheme have different qubit counts")
        if l < n + k or m < l:
            raise ConfigurationError(f"shape {shape} violates L >= N+K and M >= L")
        self.shape = shape
        self.n, self.k, self.l, self.m = n, k, l, m
        self.c = target.as_array()
        # orthonormal complement of the target: mismatch = its overlap with the output
        full = np.linalg.qr(np.column_stack([self.c, np.eye(len(self.c))]))[0]
        self.complement = full[:, 1:]
        self.ncol = n + k
        self.nfree = max(0, min(self.ncol, m - l))
        self.nfix = self.ncol - self.nfree
        self.angle_offset = l * l + self.ncol * self.ncol
        self.dim = self.angle_offset + self.nfree + n + l
        anc = list(range(n, n + k))
        self.terms = []
        for y in qubit_basis(n):
            cols = [j for j, b in enumerate(y) if not b] + anc
            self.terms.append((y, cols, list(combinations(range(l), len(cols)))))
        lb = np.full(self.dim, -np.inf)
        ub = np.full(self.dim, np.inf)
        lb[self.angle_offset:] = 0.0
        ub[self.angle_offset:] = math.pi / 2
        self.bounds = list(zip(lb, ub))
        inner_lb, inner_ub = lb.copy(), ub.copy()
        inner_lb[self.angle_offset:] = _ANGLE_MARGIN
        inner_ub[self.angle_offset:] = math.pi / 2 - _ANGLE_MARGIN
        self.inner = (inner_lb, inner_ub)
        # sampling box for restarts: one period for every phase coordinate
        self.sample_lb = np.zeros(self.dim)
        self.sample_ub = np.full(self.dim, 2 * math.pi)
        self.sample_lb[self.angle_offset:] = _ANGLE_MARGIN
        self.sample_ub[self.angle_offset:] = math.pi / 2 - _ANGLE_MARGIN

    def unpack(self, x):
        l, c = self.l, self.ncol
        w = reck_matrix(l, x[:l * l])
        v = reck_matrix(c, x[l * l:self.angle_offset])
        o = self.angle_offset
        sigma = np.concatenate([np.ones(self.nfix), np.cos(x[o:o + self.nfree])])
        s = (w[:, :c] * sigma) @ v
        tau = x[o + self.nfree:o + self.nfree + self.n]
        eta = x[o + self.nfree + self.n:]
        return s, np.cos(tau), np.sin(tau), np.cos(eta), np.sin(eta)

    def output(self, x) -> np.ndarray:
        s, t, r, alpha, beta = self.unpack(x)
        out = np.empty(len(self.terms), dtype=complex)
        for idx, (y, cols, subsets) in enumerate(self.terms):
            d = 0j
            for rows in subsets:
                w = 1.0
                for i in range(self.l):
                    w *= beta[i] if i in rows else alpha[i]
                d += w * permanent(s, rows, cols)
            pick = 1.0
            for i, b in enumerate(y):
                pick *= t[i] if b else r[i]
            out[idx] = pick * d
        return out

    def infidelity(self, x) -> float:
        o = self.output(x)
        nrm = float(np.vdot(o, o).real)
        if nrm <= 1e-300:
            return 1.0
        return 1.0 - abs(np.vdot(self.c, o)) ** 2 / nrm

    def mismatch(self, x) -> np.ndarray:
        o = self.output(x)
        g = self.complement.conj().T @ o / max(np.linalg.norm(o), 1e-300)
        return np.concatenate([g.real, g.imag])

    def log_overlap(self, x) -> float:
        return math.log(max(abs(np.vdot(self.c, self.output(x))) ** 2, 1e-300))

    def config(self, x) -> SchemeConfig:
        s, t, r, alpha, beta = self.unpack(x)
        n, k, l, m = self.shape
        return SchemeConfig(n, k, l, m, unitary_completion(s, m),
                            tuple(zip(t.tolist(), r.tolist())),
                            tuple(zip(alpha.tolist(), beta.tolist())))


def _project_constraints(problem: _Problem, x, iters: int = 20, tol: float = 1e-14):
    """Minimum-norm Newton steps onto the zero set of the mismatch vector."""
    x = np.array(x, dtype=float)
    for _ in range(iters):
        g = problem.mismatch(x)
        if np.max(np.abs(g)) < tol:
            break
        jac = np.empty((len(g), len(x)))
        for i in range(len(x)):
            dx = np.zeros_like(x)
            dx[i] = 1e-7
            jac[:, i] = (problem.mismatch(x + dx) - problem.mismatch(x - dx)) / 2e-7
        x = x - np.linalg.lstsq(jac, g, rcond=None)[0]
    return x


def _generic_restart(args):
    """Feasibility search, penalty continuation on -log Pr, then exact projection."""
    problem, x0, max_evals = args
    per_phase = max(20, max_evals // (4 * (problem.dim + 1)))
    opts = {"maxiter": per_phase, "maxfun": max_evals, "ftol": 1e-15, "gtol": 1e-10}
    lo, hi = problem.inner
    res = minimize(problem.infidelity, np.clip(x0, lo, hi), method="L-BFGS-B",
                   bounds=list(zip(lo, hi)), options=opts)
    x, iters = res.x, int(res.nit)
    if res.fun > 1e-2:
        return x, iters
    for weight in (1e2, 1e4, 1e6):
        def penalized(z, w=weight):
            return -problem.log_overlap(z) + w * problem.infidelity(z)
        res = minimize(penalized, x, method="L-BFGS-B", bounds=problem.bounds, options=opts)
        x, iters = res.x, iters + int(res.nit)
    return _project_constraints(problem, x), iters


def optimize_generic(target: TargetState, shape=None, budget: Budget = Budget(), seed: int = 0,
                     warm_start: Optional[np.ndarray] = None) -> OptimizationResult:
    shape = tuple(shape) if shape is not None else default_shape(target.n_qubits)
    problem = _Problem(target, shape)
    starts = _lhs(budget.restarts, problem.sample_lb, problem.sample_ub, seed)
    if warm_start is not None and len(warm_start) == problem.dim:
        starts[0] = warm_start
    outs = _run_restarts(_generic_restart, [(problem, x0, budget.max_evals) for x0 in starts], budget)
    candidates = []
    for idx, (x, nit) in enumerate(outs):
        try:
            cfg = problem.config(x)
        except (NoCompletionError, ValueError):
            continue
        pr, res, fid = evaluate(cfg, target)
        candidates.append(OptimizationResult(cfg, pr, res, fid, seed, nit, target, budget,
                                             "generic", idx, x))
    if not candidates:
        raise InfeasibleError("no restart produced a valid configuration")
    best = _pick_best(candidates)
    if not best.feasible:
        raise InfeasibleError(f"best residual {best.residual:.3e} exceeds tolerance",
                              best.residual, best)
    return best


def optimize(target: TargetState, shape=None, budget: Budget = Budget(), seed: int = 0,
             method: str = "auto", warm_start=None) -> OptimizationResult:
    """Maximize heralding probability for ``target``; deterministic for a given seed.

    ``method`` is ``"chain"`` (two-qubit cluster family only), ``"generic"``
    or ``"auto"``.
    """
    shape = tuple(shape) if shape is not None else default_shape(target.n_qubits)
    use_chain = method == "chain" or (
        method == "auto" and target.family == "cluster" and shape == (2, 0, 2, 3))
    if use_chain:
        if target.family != "cluster" or shape != (2, 0, 2, 3):
            raise ConfigurationError("the elimination chain only covers two-qubit cluster targets")
        return optimize_cluster_chain(target, budget, seed, warm_start)
    return optimize_generic(target, shape, budget, seed, warm_start)


def phi_sweep(phi_grid: Sequence[float], chi: float = 0.0, budget: Budget = Budget(),
              seed: int = 0) -> List[Tuple[float, Optional[float]]]:
    """Optimal cluster success probability per relative phase, warm-started along the grid."""
    rows = []
    warm = None
    for phi in phi_grid:
        if not 0.0 <= phi <= math.pi + 1e-12:
            raise ValueError(f"phi = {phi} outside [0, pi]")
        try:
            res = optimize_cluster_chain(TargetState.cluster(phi, chi), budget, seed, warm)
            warm = res.vector
            rows.append((float(phi), res.success_probability))
        except InfeasibleError:
            rows.append((float(phi), None))
    return rows


def result_dumps(result: OptimizationResult) -> str:
    return json.dumps(result.to_json(), indent=2, sort_keys=True)
