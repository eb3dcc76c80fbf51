"""Brute-force Fock-space simulation of a full heralding scheme.

Nothing here touches permanents or the network module: photons are
propagated by substituting every creation operator with its image under
the mode transformation and expanding the product term by term. Only the
state container from :mod:`heraldix.fock` is shared with the closed forms.
"""

from __future__ import annotations

import cmath
import json
import math
import time
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np

from .errors import DimensionError, StructuralError, TractabilityError
from .fock import FockState, StateVector

PHOTON_BOUND = 8


def _create_all(matrix: np.ndarray, modes: Sequence[int], occ: Tuple[int, ...]) -> Dict[Tuple[int, ...], complex]:
    """Expand ``prod_j (a_j^+)^{n_j} / sqrt(n_j!) |vac>`` with ``a_j^+ -> sum_i m[i, j] a_i^+``.

    ``modes`` lists the global indices the matrix acts on; occupations of
    other modes in ``occ`` are carried through untouched.
    """
    base = list(occ)
    norm = 1.0
    pending = []
    for local, g in enumerate(modes):
        for _ in range(base[g]):
            pending.append(local)
        norm *= math.factorial(base[g])
        base[g] = 0
    terms = {tuple(base): 1.0 / math.sqrt(norm) + 0j}
    for j in pending:
        nxt = {}
        for state, amp in terms.items():
            for i_local, g in enumerate(modes):
                coeff = matrix[i_local, j]
                if coeff == 0:
                    continue
                s = list(state)
                # a^+ |n> = sqrt(n+1) |n+1>
                factor = math.sqrt(s[g] + 1)
                s[g] += 1
                key = tuple(s)
                nxt[key] = nxt.get(key, 0j) + amp * coeff * factor
        terms = nxt
    return terms


def evolve(state: Mapping[Tuple[int, ...], complex], matrix: np.ndarray,
           modes: Sequence[int]) -> Dict[Tuple[int, ...], complex]:
    """Apply the linear-optical map ``matrix`` (column = image of an input mode) on ``modes``."""
    out = {}
    for occ, amp in state.items():
        for key, val in _create_all(matrix, modes, occ).items():
            out[key] = out.get(key, 0j) + amp * val
    return {k: v for k, v in out.items() if abs(v) > 1e-300}


def _splitter(t: complex, r: complex) -> np.ndarray:
    # (tap, principal): the principal photon goes to r|tap> + t|principal>
    t, r = complex(t), complex(r)
    return np.array([[t.conjugate(), r], [-r.conjugate(), t]], dtype=complex)


def _bra_weight(cfg, occ_net: Sequence[int], alpha, beta) -> complex:
    w = 1 + 0j
    for i, c in enumerate(occ_net):
        if i < cfg.n_measured:
            w *= alpha[i] if c == 0 else beta[i] if c == 1 else 0.0
        elif c:
            return 0j
        if w == 0:
            return 0j
    return w


def _measurement(cfg):
    phase = cmath.exp(1j * cfg.theta)
    alpha = [complex(a) * phase for a, _ in cfg.qubit_projectors]
    beta = [complex(b) for _, b in cfg.qubit_projectors]
    return alpha, beta


def _check_bound(photons: int):
    if photons > PHOTON_BOUND:
        raise TractabilityError(f"{photons} photons exceeds the brute-force bound of {PHOTON_BOUND}")


def brute_force_projector(cfg, with_extra: bool = True):
    """Read the projector coefficients off ``<q..q 0..0| U |n, 1^K, 0..>`` directly."""
    from .heralding import HeraldingProjector

    n, k, l, m = cfg.n_qubits, cfg.n_ancilla_photons, cfg.n_measured, cfg.unitary_dim
    _check_bound(l)
    u = np.asarray(cfg.unitary.entries)
    alpha, beta = _measurement(cfg)
    modes = list(range(m))
    coeffs = {}
    extra = {}
    max_total = l - k if with_extra else n
    for occ in product(range(max_total + 1), repeat=n):
        total = sum(occ)
        if total > max_total:
            continue
        bunched = max(occ) > 1
        if bunched and not with_extra:
            continue
        src = list(occ) + [1] * k + [0] * (m - n - k)
        amp = 0j
        for out_occ, val in evolve({tuple(src): 1.0}, u, modes).items():
            amp += val * _bra_weight(cfg, out_occ, alpha, beta)
        if bunched:
            if abs(amp) > 1e-15:
                extra[FockState(occ)] = amp
        else:
            coeffs[tuple(occ)] = amp
    return HeraldingProjector(n, coeffs, extra)


def brute_force_output(cfg, input_state: StateVector) -> StateVector:
    """Full simulation: split principal photons, run the network, project the detectors."""
    n, k, m = cfg.n_qubits, cfg.n_ancilla_photons, cfg.unitary_dim
    if input_state.mode_count != n:
        raise DimensionError(f"input has {input_state.mode_count} modes, scheme has {n} qubits")
    _check_bound(max((b.total_photons for b in input_state.amplitudes), default=0) + k)
    u = np.asarray(cfg.unitary.entries)
    alpha, beta = _measurement(cfg)
    # global modes: principal 0..n-1 then network n..n+m-1
    state = {}
    for basis, amp in input_state.amplitudes.items():
        occ = list(basis.occupations) + [0] * m
        for j in range(k):
            occ[n + n + j] = 1
        state[tuple(occ)] = amp
    for i, (t, r) in enumerate(cfg.pickoff):
        state = evolve(state, _splitter(t, r), [n + i, i])
    state = evolve(state, u, list(range(n, n + m)))
    acc = {}
    for occ, amp in state.items():
        w = _bra_weight(cfg, occ[n:], alpha, beta)
        if w != 0:
            key = occ[:n]
            acc[key] = acc.get(key, 0j) + amp * w
    return StateVector(n, acc)


@dataclass
class OracleReport:
    max_abs_deviation: float
    deviations: Dict[str, float] = field(default_factory=dict)
    elapsed: float = 0.0
    n_configs: int = 1

    def merge(self, other: "OracleReport", prefix: str = "") -> "OracleReport":
        devs = dict(self.deviations)
        for key, val in other.deviations.items():
            name = prefix + key
            devs[name] = max(devs.get(name, 0.0), val)
        return OracleReport(max(self.max_abs_deviation, other.max_abs_deviation), devs,
                            self.elapsed + other.elapsed, self.n_configs + other.n_configs)

    def to_json(self) -> dict:
        return {"max_abs_deviation": self.max_abs_deviation, "deviations": self.deviations,
                "elapsed": self.elapsed, "n_configs": self.n_configs}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _phase_rotation(values: Mapping) -> complex:
    # makes the first non-negligible coefficient (key order) real-positive
    for key in sorted(values):
        if abs(values[key]) > 1e-300:
            return cmath.exp(-1j * cmath.phase(values[key]))
    return 1 + 0j


def compare(closed_form, oracle_proj) -> OracleReport:
    """Per-key absolute deviations between two projectors after global-phase alignment."""
    start = time.perf_counter()
    if closed_form.n_qubits != oracle_proj.n_qubits or \
            set(closed_form.coefficients) != set(oracle_proj.coefficients):
        raise StructuralError("projectors have different coefficient keys")
    rot_a = _phase_rotation(closed_form.coefficients)
    rot_b = _phase_rotation(oracle_proj.coefficients)
    devs = {}
    for key in sorted(closed_form.coefficients):
        diff = closed_form.coefficients[key] * rot_a - oracle_proj.coefficients[key] * rot_b
        devs["".join(map(str, key))] = float(abs(diff))
    for key in set(closed_form.extra_terms) | set(oracle_proj.extra_terms):
        diff = closed_form.extra_terms.get(key, 0j) * rot_a - oracle_proj.extra_terms.get(key, 0j) * rot_b
        devs[key.label()] = float(abs(diff))
    return OracleReport(max(devs.values(), default=0.0), devs, time.perf_counter() - start)
