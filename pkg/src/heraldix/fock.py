"""Occupation-number basis states and sparse state vectors.

States are stored as maps from occupation tuples to complex amplitudes.
Passive networks conserve photon number, so the reachable basis is always
finite and no Fock cutoff is needed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Tuple, Union

from .errors import DegenerateStateError, DimensionError

PRUNE_THRESHOLD = 1e-15
NORM_TOLERANCE = 1e-12

OccLike = Union["FockState", Sequence[int]]


@dataclass(frozen=True, order=True)
class FockState:
    """A single occupation-number basis ket, e.g. ``FockState((0, 1))``."""

    occupations: Tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupations)
        if not occ:
            raise DimensionError("a Fock state needs at least one mode")
        if any(n < 0 for n in occ):
            raise ValueError(f"negative occupation in {occ}")
        object.__setattr__(self, "occupations", occ)

    @property
    def mode_count(self) -> int:
        return len(self.occupations)

    @property
    def total_photons(self) -> int:
        return sum(self.occupations)

    def __iter__(self):
        return iter(self.occupations)

    def __len__(self):
        return len(self.occupations)

    def __getitem__(self, i):
        return self.occupations[i]

    def label(self) -> str:
        return "".join(str(n) for n in self.occupations)

    def __repr__(self):
        return f"|{self.label()}>"


def _as_fock(key: OccLike) -> FockState:
    if isinstance(key, FockState):
        return key
    if isinstance(key, str):
        return FockState(tuple(int(ch) for ch in key))
    return FockState(tuple(key))


class StateVector:
    """Immutable, possibly un-normalized superposition of Fock states.

    ``amplitudes`` maps :class:`FockState` to complex numbers; amplitudes
    with modulus below ``prune`` are dropped at construction.
    """

    __slots__ = ("_modes", "_amps", "_normalized")

    def __init__(self, mode_count: int, amplitudes: Mapping[OccLike, complex] = None,
                 normalized: bool = False, prune: float = PRUNE_THRESHOLD):
        mode_count = int(mode_count)
        if mode_count <= 0:
            raise DimensionError("mode_count must be positive")
        amps = {}
        for key, value in (amplitudes or {}).items():
            state = _as_fock(key)
            if state.mode_count != mode_count:
                raise DimensionError(
                    f"basis state {state!r} has {state.mode_count} modes, expected {mode_count}")
            value = complex(value)
            if abs(value) <= prune:
                continue
            amps[state] = amps.get(state, 0j) + value
        amps = {k: v for k, v in amps.items() if abs(v) > prune}
        self._modes = mode_count
        self._amps = MappingProxyType(dict(sorted(amps.items())))
        if normalized and abs(_norm_sq(self._amps) - 1.0) > NORM_TOLERANCE:
            raise ValueError("state flagged normalized but its squared norm is not 1")
        self._normalized = bool(normalized)

    # construction helpers
    @classmethod
    def basis(cls, occupations: OccLike, amplitude: complex = 1.0) -> "StateVector":
        state = _as_fock(occupations)
        return cls(state.mode_count, {state: amplitude}, normalized=abs(amplitude) == 1.0)

    @classmethod
    def zero(cls, mode_count: int) -> "StateVector":
        return cls(mode_count, {})

    @classmethod
    def from_pairs(cls, mode_count: int, pairs: Iterable[Tuple[OccLike, complex]]) -> "StateVector":
        acc = {}
        for key, value in pairs:
            state = _as_fock(key)
            acc[state] = acc.get(state, 0j) + complex(value)
        return cls(mode_count, acc)

    @property
    def mode_count(self) -> int:
        return self._modes

    @property
    def amplitudes(self) -> Mapping[FockState, complex]:
        return self._amps

    @property
    def normalized(self) -> bool:
        return self._normalized

    def __getitem__(self, key: OccLike) -> complex:
        return self._amps.get(_as_fock(key), 0j)

    def __iter__(self):
        return iter(self._amps.items())

    def __len__(self):
        return len(self._amps)

    def norm_squared(self) -> float:
        return _norm_sq(self._amps)

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def is_zero(self) -> bool:
        return not self._amps

    def scaled(self, factor: complex) -> "StateVector":
        return StateVector(self._modes, {k: factor * v for k, v in self._amps.items()})

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_modes(self, other)
        acc = dict(self._amps)
        for k, v in other._amps.items():
            acc[k] = acc.get(k, 0j) + v
        return StateVector(self._modes, acc)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return self + other.scaled(-1.0)

    def max_occupation(self) -> int:
        return max((max(k.occupations) for k in self._amps), default=0)

    def allclose(self, other: "StateVector", atol: float = 1e-12) -> bool:
        _check_modes(self, other)
        keys = set(self._amps) | set(other._amps)
        return all(abs(self[k] - other[k]) <= atol for k in keys)

    def to_json(self) -> dict:
        return {
            "modes": self._modes,
            "terms": [{"occ": list(k.occupations), "re": v.real, "im": v.imag}
                      for k, v in self._amps.items()],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "StateVector":
        try:
            modes = int(doc["modes"])
            terms = doc["terms"]
            pairs = [(tuple(t["occ"]), complex(float(t["re"]), float(t.get("im", 0.0))))
                     for t in terms]
        except KeyError as exc:
            raise ValueError(f"state vector JSON is missing field {exc.args[0]!r}") from None
        return cls.from_pairs(modes, pairs)

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self._modes == other._modes and dict(self._amps) == dict(other._amps)

    def __hash__(self):
        return hash((self._modes, tuple(self._amps.items())))

    def __repr__(self):
        terms = " + ".join(f"({v:.6g}){k!r}" for k, v in self._amps.items()) or "0"
        return f"StateVector({terms})"


def _norm_sq(amps: Mapping) -> float:
    return float(sum(abs(v) ** 2 for v in amps.values()))


def _check_modes(a: StateVector, b: StateVector) -> None:
    if a.mode_count != b.mode_count:
        raise DimensionError(f"mode count mismatch: {a.mode_count} vs {b.mode_count}")


def inner_product(a: StateVector, b: StateVector) -> complex:
    """Return <a|b>, conjugating the left argument."""
    _check_modes(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for key in small.amplitudes:
        total += a[key].conjugate() * b[key]
    return total


def normalize(s: StateVector) -> Tuple[StateVector, float]:
    """Scale ``s`` to unit norm and fix its global phase.

    The amplitude of the lexicographically first basis state becomes real
    and positive. Returns ``(state, original_norm)``.
    """
    nrm = s.norm()
    if nrm == 0.0:
        raise DegenerateStateError("cannot normalize the zero vector")
    first = next(iter(s.amplitudes.values()))
    if s.normalized and first.imag == 0.0 and first.real > 0.0:
        return s, nrm
    phase = cmath.exp(-1j * cmath.phase(first))
    amps = {k: v * phase / nrm for k, v in s.amplitudes.items()}
    # the leading amplitude is exactly real after rotation
    key0 = next(iter(amps))
    amps[key0] = complex(abs(amps[key0]), 0.0)
    renorm = math.sqrt(_norm_sq(amps))
    amps = {k: v / renorm for k, v in amps.items()}
    return StateVector(s.mode_count, amps, normalized=True), nrm


def fidelity(target: StateVector, state: StateVector) -> float:
    """Pure-state fidelity ``|<target|state>|^2 / <state|state>``."""
    _check_modes(target, state)
    denom = state.norm_squared()
    if denom == 0.0:
        raise DegenerateStateError("fidelity of the zero vector is undefined")
    tnorm = target.norm_squared()
    value = abs(inner_product(target, state)) ** 2 / (denom * tnorm)
    return float(min(max(value, 0.0), 1.0))


def ensemble_fidelity(target: StateVector,
                      branches: Iterable[Tuple[float, StateVector]]) -> float:
    """Fidelity ``<t|rho|t>/Tr rho`` of an un-normalized mixture.

    ``branches`` holds ``(weight, state)`` pairs; ``rho = sum w |s><s|``.
    """
    num = 0.0
    den = 0.0
    tnorm = target.norm_squared()
    for weight, state in branches:
        num += weight * abs(inner_product(target, state)) ** 2
        den += weight * state.norm_squared()
    if den == 0.0:
        raise DegenerateStateError("mixture has zero trace")
    return float(num / (den * tnorm))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product; ``b``'s modes are appended after ``a``'s."""
    amps = {}
    for ka, va in a.amplitudes.items():
        for kb, vb in b.amplitudes.items():
            amps[ka.occupations + kb.occupations] = va * vb
    return StateVector(a.mode_count + b.mode_count, amps)


def qubit_basis(n: int):
    """All ``n``-bit occupation tuples in lexicographic order."""
    from itertools import product
    return [tuple(bits) for bits in product((0, 1), repeat=n)]
