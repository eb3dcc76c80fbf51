"""Heralding projectors, pick-off outputs and the detector event model.

Port layout of a scheme with ``N`` qubits, ``K`` ancilla photons, ``L``
single-qubit detectors and an ``M``-mode network: source ports ``0..N-1``
receive the picked-off amplitude of the principal photons, ports
``N..N+K-1`` receive ancilla photons and the rest vacuum. Detector ports
``0..L-1`` carry single-qubit projectors, the remaining outputs are
projected onto vacuum.

A detector with projector ``(alpha, beta)`` retrodicts the bra
``alpha <0| + beta <1|``; the projector coefficients ``d[x]`` are the
overlaps ``<q_1 .. q_L 0 .. 0| U |x, 1^K, 0 ..>``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from itertools import combinations, permutations, product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (ConfigurationError, ConstraintError, DimensionError, DomainError,
                     NotCorrectableError)
from .fock import FockState, StateVector, qubit_basis
from .network import (UnitaryMatrix, apply_network, matrix_from_json, occupations_with_total,
                      permanent)

NORM_ATOL = 1e-12

ADAPTIVE = "adaptive"
COHERENT = "coherent"

FAILURE, DESIRED, INVERT = 0, 1, 2


def _cjson(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _cparse(obj) -> complex:
    if isinstance(obj, Mapping):
        return complex(float(obj["re"]), float(obj.get("im", 0.0)))
    return complex(obj)


@dataclass(frozen=True)
class SchemeConfig:
    """Full description of one heralded preparation circuit.

    ``qubit_projectors`` stores ``(alpha, beta)`` per detector. ``theta`` is
    a common phase applied to every ``alpha`` (``alpha -> alpha e^{i theta}``),
    so ``alpha`` itself can be kept real and non-negative. ``detector``
    selects the adaptive (default) or coherent-state realization, either one
    name for all detectors or one name per detector.
    """

    n_qubits: int
    n_ancilla_photons: int
    n_measured: int
    unitary_dim: int
    unitary: UnitaryMatrix
    pickoff: Tuple[Tuple[complex, complex], ...]
    qubit_projectors: Tuple[Tuple[complex, complex], ...]
    theta: float = 0.0
    detector: object = ADAPTIVE
    coherent_amplitude: float = 1.0

    def __post_init__(self):
        n, k, l, m = self.n_qubits, self.n_ancilla_photons, self.n_measured, self.unitary_dim
        if n < 1 or k < 0:
            raise ConfigurationError("need n_qubits >= 1 and n_ancilla_photons >= 0")
        if l < n + k:
            raise ConfigurationError(
                f"L >= N + K is required (L={l}, N={n}, K={k}): with fewer detectors "
                "the all-ones component can never be heralded")
        if m < l or m < n + k:
            raise ConfigurationError(f"unitary_dim M={m} must be at least L={l} and N+K={n + k}")
        if not isinstance(self.unitary, UnitaryMatrix):
            object.__setattr__(self, "unitary", UnitaryMatrix(self.unitary))
        if self.unitary.dim != m:
            raise ConfigurationError(f"unitary has dim {self.unitary.dim}, expected M={m}")
        pick = tuple((complex(t), complex(r)) for t, r in self.pickoff)
        proj = tuple((complex(a), complex(b)) for a, b in self.qubit_projectors)
        if len(pick) != n:
            raise ConfigurationError(f"expected {n} pick-off splitters, got {len(pick)}")
        if len(proj) != l:
            raise ConfigurationError(f"expected {l} qubit projectors, got {len(proj)}")
        for i, (t, r) in enumerate(pick):
            if abs(abs(t) ** 2 + abs(r) ** 2 - 1.0) > NORM_ATOL:
                raise ConstraintError(f"pick-off {i}: |t|^2 + |r|^2 != 1")
        for i, (a, b) in enumerate(proj):
            if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > NORM_ATOL:
                raise ConstraintError(f"projector {i}: |alpha|^2 + |beta|^2 != 1")
        det = self.detector
        kinds = (det,) * l if isinstance(det, str) else tuple(det)
        if len(kinds) != l or any(d not in (ADAPTIVE, COHERENT) for d in kinds):
            raise ConfigurationError(f"invalid detector model {det!r}")
        object.__setattr__(self, "pickoff", pick)
        object.__setattr__(self, "qubit_projectors", proj)
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "detector", det if isinstance(det, str) else kinds)

    # --- derived quantities
    @property
    def detector_models(self) -> Tuple[str, ...]:
        det = self.detector
        return (det,) * self.n_measured if isinstance(det, str) else tuple(det)

    @property
    def is_adaptive(self) -> bool:
        return all(d == ADAPTIVE for d in self.detector_models)

    def effective_projectors(self) -> Tuple[np.ndarray, np.ndarray]:
        """``(alpha * e^{i theta}, beta)`` arrays fed to the projector formulas."""
        a = np.array([p[0] for p in self.qubit_projectors], dtype=complex)
        b = np.array([p[1] for p in self.qubit_projectors], dtype=complex)
        return a * cmath.exp(1j * self.theta), b

    def active_matrix(self) -> np.ndarray:
        """The ``L x (N+K)`` block of detector rows and photon-fed source columns."""
        return self.unitary.entries[:self.n_measured, :self.n_qubits + self.n_ancilla_photons]

    def shape(self) -> Tuple[int, int, int, int]:
        return self.n_qubits, self.n_ancilla_photons, self.n_measured, self.unitary_dim

    def with_inverted(self, detectors: Sequence[int]) -> "SchemeConfig":
        """Copy with ``beta -> -beta`` on the listed detectors."""
        proj = list(self.qubit_projectors)
        for i in detectors:
            a, b = proj[i]
            proj[i] = (a, -b)
        return replace(self, qubit_projectors=tuple(proj))

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "n_ancilla_photons": self.n_ancilla_photons,
            "n_measured": self.n_measured,
            "unitary_dim": self.unitary_dim,
            "unitary": self.unitary.to_json(),
            "pickoff": [{"t": _cjson(t), "r": _cjson(r)} for t, r in self.pickoff],
            "qubit_projectors": [{"alpha": _cjson(a), "beta": _cjson(b)}
                                 for a, b in self.qubit_projectors],
            "theta": self.theta,
            "detector": self.detector if isinstance(self.detector, str) else list(self.detector),
            "coherent_amplitude": self.coherent_amplitude,
        }

    @classmethod
    def from_json(cls, doc: Mapping, unitary_atol: float = 1e-9) -> "SchemeConfig":
        try:
            raw_u = matrix_from_json(doc["unitary"])
            return cls(
                n_qubits=int(doc["n_qubits"]),
                n_ancilla_photons=int(doc.get("n_ancilla_photons", 0)),
                n_measured=int(doc["n_measured"]),
                unitary_dim=int(doc["unitary_dim"]),
                unitary=UnitaryMatrix(raw_u, atol=unitary_atol),
                pickoff=tuple((_cparse(p["t"]), _cparse(p["r"])) for p in doc["pickoff"]),
                qubit_projectors=tuple((_cparse(q["alpha"]), _cparse(q["beta"]))
                                       for q in doc["qubit_projectors"]),
                theta=float(doc.get("theta", 0.0)),
                detector=doc.get("detector", ADAPTIVE) if isinstance(doc.get("detector", ADAPTIVE), str)
                else tuple(doc["detector"]),
                coherent_amplitude=float(doc.get("coherent_amplitude", 1.0)),
            )
        except KeyError as exc:
            raise ConfigurationError(f"scheme config is missing field {exc.args[0]!r}") from None


@dataclass(frozen=True)
class HeraldingProjector:
    """Coefficients of the retrodicted bra on the principal source ports.

    ``coefficients`` holds the ``2^N`` qubit keys; ``extra_terms`` the
    bunched (some occupation >= 2) components, which never reach the
    principal outputs of a pick-off stage fed by qubit inputs.
    """

    n_qubits: int
    coefficients: Mapping[Tuple[int, ...], complex]
    extra_terms: Mapping[FockState, complex] = field(default_factory=dict)

    def __post_init__(self):
        keys = set(self.coefficients)
        if keys != set(qubit_basis(self.n_qubits)):
            raise DimensionError(f"projector needs exactly the {2 ** self.n_qubits} qubit keys")

    def __getitem__(self, bits) -> complex:
        if isinstance(bits, str):
            bits = tuple(int(c) for c in bits)
        return self.coefficients[tuple(bits)]

    def as_array(self) -> np.ndarray:
        return np.array([self.coefficients[b] for b in qubit_basis(self.n_qubits)])


# --- closed-form projector coefficients ------------------------------------

def _require_shape(cfg: SchemeConfig, n, k, l, m):
    if cfg.shape() != (n, k, l, m):
        raise ConfigurationError(
            f"expected (N, K, L, M) = {(n, k, l, m)}, got {cfg.shape()}")


def projector_coefficients_2q(cfg: SchemeConfig) -> HeraldingProjector:
    """The two-qubit projector of a ``U(3)`` network with one vacuum port."""
    _require_shape(cfg, 2, 0, 2, 3)
    (a1, a2), (b1, b2) = cfg.effective_projectors()
    u = cfg.unitary.entries

    def P(rows, cols):  # 1-based, as in the closed forms
        return permanent(u, [r - 1 for r in rows], [c - 1 for c in cols])

    d = {
        (0, 0): a1 * a2,
        (0, 1): a1 * b2 * P([2], [2]) + a2 * b1 * P([1], [2]),
        (1, 0): a1 * b2 * P([2], [1]) + a2 * b1 * P([1], [1]),
        (1, 1): b2 * b1 * P([1, 2], [1, 2]),
    }
    # <02| and <20| are unit-normalized kets, hence the sqrt(2) from a^2|0> = sqrt(2)|2>
    extra = {
        FockState((0, 2)): math.sqrt(2) * b2 * b1 * P([1], [2]) * P([2], [2]),
        FockState((2, 0)): math.sqrt(2) * b2 * b1 * P([1], [1]) * P([2], [1]),
    }
    return HeraldingProjector(2, d, extra)


def projector_coefficients_3q(cfg: SchemeConfig) -> HeraldingProjector:
    """Three-qubit projector with a 3x3 active block (``M = 6``)."""
    _require_shape(cfg, 3, 0, 3, 6)
    (a1, a2, a3), (b1, b2, b3) = cfg.effective_projectors()
    u = cfg.unitary.entries

    def P(rows, cols):
        return permanent(u, [r - 1 for r in rows], [c - 1 for c in cols])

    d = {(0, 0, 0): a1 * a2 * a3}
    for col, key in ((1, (1, 0, 0)), (2, (0, 1, 0)), (3, (0, 0, 1))):
        d[key] = (a2 * a3 * b1 * P([1], [col]) + a1 * a3 * b2 * P([2], [col])
                  + a1 * a2 * b3 * P([3], [col]))
    for cols, key in (([1, 2], (1, 1, 0)), ([1, 3], (1, 0, 1)), ([2, 3], (0, 1, 1))):
        d[key] = (a1 * b2 * b3 * P([2, 3], cols) + a2 * b1 * b3 * P([1, 3], cols)
                  + a3 * b1 * b2 * P([1, 2], cols))
    d[(1, 1, 1)] = b1 * b2 * b3 * P([1, 2, 3], [1, 2, 3])
    extra = _extra_terms(cfg)
    return HeraldingProjector(3, d, extra)


def _subset_sum(u, alpha, beta, n_measured, cols, norm=1.0):
    """Sum over detector subsets T with |T| = len(cols) of beta_T alpha_~T Per(u[T, cols])."""
    k = len(cols)
    total = 0j
    for rows in combinations(range(n_measured), k):
        weight = 1 + 0j
        for i in range(n_measured):
            weight *= beta[i] if i in rows else alpha[i]
        if weight == 0:
            continue
        total += weight * permanent(u, rows, cols)
    return total / norm


def _literal_sum(u, alpha, beta, n_measured, cols):
    # sum over all L! orderings; each distinct detector subset appears k!(L-k)! times
    k = len(cols)
    total = 0j
    for sigma in permutations(range(n_measured)):
        weight = 1 + 0j
        for i in sigma[:k]:
            weight *= beta[i]
        for i in sigma[k:]:
            weight *= alpha[i]
        total += weight * permanent(u, sigma[:k], cols)
    return total / (math.factorial(k) * math.factorial(n_measured - k))


def _extra_terms(cfg: SchemeConfig) -> Dict[FockState, complex]:
    n, k, l = cfg.n_qubits, cfg.n_ancilla_photons, cfg.n_measured
    alpha, beta = cfg.effective_projectors()
    u = cfg.unitary.entries
    ancilla = list(range(n, n + k))
    extra = {}
    for total in range(2, l - k + 1):
        for occ in occupations_with_total(n, total):
            if max(occ) < 2:
                continue
            cols = [j for j, c in enumerate(occ) for _ in range(c)] + ancilla
            norm = math.sqrt(math.prod(math.factorial(c) for c in occ))
            val = _subset_sum(u, alpha, beta, l, cols, norm)
            if abs(val) > 1e-15:
                extra[FockState(occ)] = val
    return extra


def projector_coefficients_nq(cfg: SchemeConfig, literal: bool = False,
                              with_extra: bool = True) -> HeraldingProjector:
    """General ``N``-qubit projector with ``K`` ancilla photons and ``L`` detectors.

    ``d[x]`` sums, over every assignment of the ``|x| + K`` photons to
    distinct detectors, the product of ``beta`` on the clicking detectors,
    ``alpha`` on the silent ones, and the permanent of the corresponding
    ``(|x|+K) x (|x|+K)`` slice of the active block. With ``literal=True``
    the sum runs over all ``L!`` detector orderings and divides out the
    multiplicity of each subset, which is slower but structurally closer to
    the permutation-sum form.
    """
    n, k, l = cfg.n_qubits, cfg.n_ancilla_photons, cfg.n_measured
    if l < n + k:
        raise ConfigurationError(f"L >= N + K is required (L={l}, N={n}, K={k})")
    alpha, beta = cfg.effective_projectors()
    u = cfg.unitary.entries
    ancilla = list(range(n, n + k))
    summer = _literal_sum if literal else _subset_sum
    d = {}
    for bits in qubit_basis(n):
        cols = [j for j, b in enumerate(bits) if b] + ancilla
        d[bits] = summer(u, alpha, beta, l, cols)
    extra = _extra_terms(cfg) if with_extra else {}
    return HeraldingProjector(n, d, extra)


def projector_coefficients(cfg: SchemeConfig) -> HeraldingProjector:
    """Dispatch to the dedicated closed form when one exists."""
    if cfg.shape() == (2, 0, 2, 3):
        return projector_coefficients_2q(cfg)
    if cfg.shape() == (3, 0, 3, 6):
        return projector_coefficients_3q(cfg)
    return projector_coefficients_nq(cfg)


# --- pick-off stage ----------------------------------------------------------

def _check_qubit_input(cfg: SchemeConfig, state: StateVector):
    if state.mode_count != cfg.n_qubits:
        raise DimensionError(f"input has {state.mode_count} modes, scheme has {cfg.n_qubits} qubits")
    if state.max_occupation() > 1:
        raise DomainError("pick-off inputs must lie in the qubit subspace (occupation <= 1)")


def pickoff_amplitudes(cfg: SchemeConfig, d: Mapping[Tuple[int, ...], complex],
                       bits_in: Tuple[int, ...]) -> Dict[Tuple[int, ...], complex]:
    """Output amplitudes for one qubit basis input.

    Each present photon is kept (amplitude ``t``) or sent to the network
    (amplitude ``r``); the heralded amplitude is the product of those with
    the projector coefficient of the sent subset.
    """
    present = [i for i, b in enumerate(bits_in) if b]
    out = {}
    for kept in product((0, 1), repeat=len(present)):
        y = [0] * cfg.n_qubits
        sent = [0] * cfg.n_qubits
        amp = 1 + 0j
        for i, keep in zip(present, kept):
            t, r = cfg.pickoff[i]
            if keep:
                y[i] = 1
                amp *= t
            else:
                sent[i] = 1
                amp *= r
        out[tuple(y)] = out.get(tuple(y), 0j) + amp * d[tuple(sent)]
    return out


def pickoff_output(cfg: SchemeConfig, proj: HeraldingProjector,
                   input_state: Optional[StateVector] = None) -> StateVector:
    """Un-normalized heralded principal-mode state; default input ``|1...1>``."""
    if input_state is None:
        input_state = StateVector.basis((1,) * cfg.n_qubits)
    _check_qubit_input(cfg, input_state)
    acc = {}
    for basis, amp in input_state.amplitudes.items():
        for y, val in pickoff_amplitudes(cfg, proj.coefficients, basis.occupations).items():
            acc[y] = acc.get(y, 0j) + amp * val
    return StateVector(cfg.n_qubits, acc)


def success_probability(out: StateVector) -> float:
    """Heralding probability: squared norm of the un-normalized output."""
    return out.norm_squared()


def ideal_output(cfg: SchemeConfig, input_state: Optional[StateVector] = None) -> StateVector:
    return pickoff_output(cfg, projector_coefficients(cfg), input_state)


# --- single-qubit projector realizations ------------------------------------

def sq_projector_coherent(alpha: complex, t: float, r: float) -> Tuple[Tuple[complex, complex], float]:
    """Coherent-state detector: bra ``e^{-|a|^2/2} (r a <0| + t <1|)``.

    Returns the two un-normalized bra coefficients and the probability scale
    ``e^{-|a|^2}``.
    """
    if abs(t * t + r * r - 1.0) > NORM_ATOL:
        raise ConstraintError("coherent-state detector needs t^2 + r^2 = 1")
    pref = math.exp(-abs(alpha) ** 2 / 2.0)
    return (r * alpha * pref, t * pref), pref ** 2


@dataclass(frozen=True)
class AdaptiveProjector:
    """Three-outcome POVM of one adaptive detector.

    ``desired`` and ``invert`` are bra coefficients on ``(<0|, <1|)``;
    ``failure`` is the POVM element on the ``{|0>, |1>, |2>}`` truncation.
    """

    desired: Tuple[complex, complex]
    invert: Tuple[complex, complex]
    failure: np.ndarray

    def element(self, outcome: int) -> np.ndarray:
        if outcome == FAILURE:
            return self.failure
        bra = np.array(self.desired if outcome == DESIRED else self.invert, dtype=complex)
        ket = np.zeros(3, dtype=complex)
        ket[:2] = bra.conj()
        return np.outer(ket, ket.conj())


def sq_projector_adaptive(alpha: complex, beta: complex) -> AdaptiveProjector:
    """Balanced splitter fed with ``beta|0> + alpha|1>`` and two photon counters."""
    alpha, beta = complex(alpha), complex(beta)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > NORM_ATOL:
        raise ConstraintError("adaptive detector needs |alpha|^2 + |beta|^2 = 1")
    s = 1.0 / math.sqrt(2.0)
    desired = (s * alpha, s * beta)
    invert = (s * alpha, -s * beta)
    pi1 = np.zeros((3, 3), dtype=complex)
    for bra in (desired, invert):
        ket = np.array([bra[0].conjugate(), bra[1].conjugate(), 0])
        pi1 += np.outer(ket, ket.conj())
    failure = np.eye(3, dtype=complex) - pi1
    return AdaptiveProjector(desired, invert, failure)


# --- composite events and feed-forward ---------------------------------------

@dataclass(frozen=True)
class MeasurementEvent:
    """Joint outcome of the ``L`` detectors: 0 failure, 1 desired, 2 invert.

    Any click in a vacuum-projected port is reported as the all-failure event.
    """

    outcomes: Tuple[int, ...]

    def __post_init__(self):
        out = tuple(int(o) for o in self.outcomes)
        if any(o not in (FAILURE, DESIRED, INVERT) for o in out):
            raise ValueError(f"outcomes must be 0, 1 or 2, got {out}")
        object.__setattr__(self, "outcomes", out)

    @classmethod
    def all_desired(cls, n: int) -> "MeasurementEvent":
        return cls((DESIRED,) * n)

    @classmethod
    def all_invert(cls, n: int) -> "MeasurementEvent":
        return cls((INVERT,) * n)

    @property
    def is_all_desired(self) -> bool:
        return all(o == DESIRED for o in self.outcomes)

    @property
    def is_all_invert(self) -> bool:
        return all(o == INVERT for o in self.outcomes)


def event_space(n_measured: int) -> List[MeasurementEvent]:
    return [MeasurementEvent(o) for o in product((FAILURE, DESIRED, INVERT), repeat=n_measured)]


def joint_state(cfg: SchemeConfig, input_state: StateVector) -> Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], complex]:
    """Amplitudes over (principal output occupations, network output occupations)."""
    _check_qubit_input(cfg, input_state)
    n, k, m = cfg.n_qubits, cfg.n_ancilla_photons, cfg.unitary_dim
    acc = {}
    for basis, amp in input_state.amplitudes.items():
        present = [i for i, b in enumerate(basis.occupations) if b]
        for kept in product((0, 1), repeat=len(present)):
            y = [0] * n
            src = [0] * m
            for j in range(n, n + k):
                src[j] = 1
            branch = amp
            for i, keep in zip(present, kept):
                t, r = cfg.pickoff[i]
                if keep:
                    y[i] = 1
                    branch *= t
                else:
                    src[i] = 1
                    branch *= r
            if branch == 0:
                continue
            outs = apply_network(cfg.unitary, StateVector.basis(tuple(src)))
            for occ, val in outs.amplitudes.items():
                key = (tuple(y), occ.occupations)
                acc[key] = acc.get(key, 0j) + branch * val
    return acc


def _contract(joint, cfg: SchemeConfig, bras: Mapping[int, Tuple[complex, complex]]) -> float:
    """Squared norm after applying rank-1 bras on some detectors and vacuum on dark ports."""
    l = cfg.n_measured
    groups = {}
    for (y, occ), amp in joint.items():
        if any(occ[j] for j in range(l, cfg.unitary_dim)):
            continue
        val = amp
        for i, (a, b) in bras.items():
            c = occ[i]
            val *= a if c == 0 else b if c == 1 else 0.0
            if val == 0:
                break
        if val == 0:
            continue
        rest = (y, tuple(occ[i] for i in range(l) if i not in bras))
        groups[rest] = groups.get(rest, 0j) + val
    return float(sum(abs(v) ** 2 for v in groups.values()))


def event_probability(cfg: SchemeConfig, input_state: StateVector,
                      event: MeasurementEvent, joint=None) -> float:
    """Probability of a composite adaptive-detector event for a normalized input.

    Failure elements are expanded as ``I - Pi1 - Pi2`` so every term is a
    rank-one contraction or an identity.
    """
    if not cfg.is_adaptive:
        raise ConfigurationError("event probabilities are defined for adaptive detectors")
    if len(event.outcomes) != cfg.n_measured:
        raise DimensionError("event length must equal the number of detectors")
    if joint is None:
        joint = joint_state(cfg, input_state)
    alpha, beta = cfg.effective_projectors()
    povms = [sq_projector_adaptive(a, b) for a, b in zip(alpha, beta)]
    fixed = {i: (povms[i].desired if o == DESIRED else povms[i].invert)
             for i, o in enumerate(event.outcomes) if o != FAILURE}
    failed = [i for i, o in enumerate(event.outcomes) if o == FAILURE]
    total = 0.0
    for choice in product((None, DESIRED, INVERT), repeat=len(failed)):
        bras = dict(fixed)
        sign = 1.0
        for i, c in zip(failed, choice):
            if c is not None:
                bras[i] = povms[i].desired if c == DESIRED else povms[i].invert
                sign = -sign
        total += sign * _contract(joint, cfg, bras)
    if all(o == FAILURE for o in event.outcomes):
        norm = sum(abs(v) ** 2 for v in joint.values())
        dark = _contract(joint, cfg, {})
        total += norm - dark
    return float(total)


def event_output(cfg: SchemeConfig, event: MeasurementEvent,
                 input_state: Optional[StateVector] = None) -> StateVector:
    """Heralded principal state for an event built only from desired/invert outcomes."""
    if FAILURE in event.outcomes:
        raise NotCorrectableError("failure outcomes do not herald a pure output")
    inverted = [i for i, o in enumerate(event.outcomes) if o == INVERT]
    cfg_ev = cfg.with_inverted(inverted)
    out = pickoff_output(cfg_ev, projector_coefficients_nq(cfg_ev, with_extra=False), input_state)
    return out.scaled(2.0 ** (-cfg.n_measured / 2.0))


def feed_forward_correct(out: StateVector, event: MeasurementEvent) -> StateVector:
    """Undo an all-invert herald with a pi phase shift on every principal mode."""
    if event.is_all_desired:
        return out
    if not event.is_all_invert:
        raise NotCorrectableError(f"event {event.outcomes} has no feed-forward correction")
    return StateVector(out.mode_count,
                       {k: v * (-1) ** k.total_photons for k, v in out.amplitudes.items()})


def coherent_detector_scale(alpha: complex, beta: complex, amplitude: float = 1.0) -> float:
    """Probability factor of a coherent-state detector tuned to ``(alpha, beta)``.

    The splitter ratio is chosen so the bra is proportional to
    ``alpha <0| + beta <1|``; the returned value is the squared proportionality
    constant, ``e^{-1}`` at unit amplitude.
    """
    g2 = abs(amplitude) ** 2
    a2, b2 = abs(alpha) ** 2, abs(beta) ** 2
    if b2 == 0.0:
        return math.exp(-g2)
    t2 = b2 * g2 / (b2 * g2 + a2)
    r = math.sqrt(1.0 - t2)
    t = math.sqrt(t2)
    (c0, c1), _ = sq_projector_coherent(amplitude, t, r)
    return abs(c1) ** 2 / b2


def heralded_success_probability(cfg: SchemeConfig, input_state: Optional[StateVector] = None,
                                 feed_forward: bool = True) -> float:
    """Ideal success probability times the realizable detector overheads.

    Adaptive detectors herald the desired bra with amplitude ``1/sqrt(2)``
    each; correcting the all-invert event doubles the accepted probability.
    """
    pr = success_probability(ideal_output(cfg, input_state))
    scale = 1.0
    alpha, beta = cfg.effective_projectors()
    for model, a, b in zip(cfg.detector_models, alpha, beta):
        scale *= 0.5 if model == ADAPTIVE else coherent_detector_scale(a, b, cfg.coherent_amplitude)
    if feed_forward and cfg.is_adaptive:
        scale *= 2.0
    return pr * scale
