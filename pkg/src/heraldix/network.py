"""Passive linear-optical networks.

Orientation convention used throughout the package: ``u[i, j]`` is the
amplitude for a photon entering input port ``j`` to leave through output
port ``i``, so ``U |1_j> = sum_i u[i, j] |1_i>``. In the heralding formulas
the row of a permanent therefore indexes a detector (output) port and the
column a source (input) port. Some texts write the same network with the
transposed ("row = input") orientation; everything here, including the
brute-force oracle, uses the column-image orientation above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ConstraintError, DimensionError
from .fock import StateVector

UNITARY_ATOL = 1e-9


class UnitaryMatrix:
    """An ``M x M`` unitary with entries checked on construction."""

    __slots__ = ("_entries",)

    def __init__(self, entries, atol: float = UNITARY_ATOL):
        arr = np.array(entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionError(f"unitary must be a non-empty square matrix, got shape {arr.shape}")
        err = unitarity_error(arr)
        if err > atol:
            raise ConstraintError(f"matrix is not unitary: max |UU^dag - I| = {err:.3e}")
        arr.setflags(write=False)
        self._entries = arr

    @classmethod
    def identity(cls, dim: int) -> "UnitaryMatrix":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def nearest(cls, matrix) -> "UnitaryMatrix":
        """Polar-projection of an approximately unitary matrix."""
        w, _, vh = np.linalg.svd(np.asarray(matrix, dtype=complex))
        return cls(w @ vh)

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        return UnitaryMatrix(self._entries @ other._entries)

    def __getitem__(self, idx):
        return self._entries[idx]

    def to_json(self) -> list:
        return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in self._entries]

    @classmethod
    def from_json(cls, rows, atol: float = UNITARY_ATOL) -> "UnitaryMatrix":
        return cls(matrix_from_json(rows), atol=atol)

    def __eq__(self, other):
        if not isinstance(other, UnitaryMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    def __hash__(self):
        return hash(self._entries.tobytes())

    def __repr__(self):
        return f"UnitaryMatrix(dim={self.dim})"


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(float(z["re"]), float(z.get("im", 0.0))) for z in row]
                     for row in rows], dtype=complex)


def unitarity_error(m: np.ndarray) -> float:
    """Max deviation of ``m m^dag`` from the identity (row norms and overlaps)."""
    m = np.asarray(m)
    return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))


@dataclass(frozen=True)
class ActiveSubmatrix:
    """Row/column selection of a network; rows are detector ports, columns source ports."""

    parent: UnitaryMatrix
    row_indices: Tuple[int, ...]
    col_indices: Tuple[int, ...]

    def __post_init__(self):
        rows = tuple(int(i) for i in self.row_indices)
        cols = tuple(int(j) for j in self.col_indices)
        for name, idx in (("row", rows), ("column", cols)):
            if len(set(idx)) != len(idx):
                raise DimensionError(f"duplicate {name} index in {idx}")
            if any(i < 0 or i >= self.parent.dim for i in idx):
                raise DimensionError(f"{name} index out of range in {idx}")
        object.__setattr__(self, "row_indices", rows)
        object.__setattr__(self, "col_indices", cols)

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.row_indices), len(self.col_indices)

    @property
    def matrix(self) -> np.ndarray:
        return self.parent.entries[np.ix_(self.row_indices, self.col_indices)]

    def P(self, rows: Sequence[int], cols: Sequence[int]) -> complex:
        """Permanent over positions *within* the submatrix (zero-based)."""
        return permanent(self.matrix, rows, cols)


def permanent(m, rows: Sequence[int], cols: Sequence[int]) -> complex:
    """Permanent of ``m[rows][:, cols]`` by Ryser's formula in Gray-code order.

    Repeated indices are allowed (needed for bunched photons); the empty
    selection has permanent 1.
    """
    if len(rows) != len(cols):
        raise DimensionError(f"permanent needs a square selection, got {len(rows)}x{len(cols)}")
    k = len(rows)
    if k == 0:
        return 1.0 + 0j
    a = [[complex(m[i][j]) for j in cols] for i in rows]
    if k == 1:
        return a[0][0]
    if k == 2:
        return a[0][0] * a[1][1] + a[0][1] * a[1][0]
    return _ryser_gray(a, k)


def _ryser_gray(a: List[List[complex]], k: int) -> complex:
    # Per(A) = (-1)^k sum_S (-1)^|S| prod_i sum_{j in S} a_ij, subsets visited in Gray order
    rowsums = [0j] * k
    in_set = [False] * k
    total = 0j
    size = 0
    for g in range(1, 1 << k):
        j = (g & -g).bit_length() - 1  # bit flipped between Gray codes g-1 and g
        if in_set[j]:
            in_set[j] = False
            size -= 1
            for i in range(k):
                rowsums[i] -= a[i][j]
        else:
            in_set[j] = True
            size += 1
            for i in range(k):
                rowsums[i] += a[i][j]
        prod = 1 + 0j
        for s in rowsums:
            prod *= s
        total += -prod if size & 1 else prod
    return total if k % 2 == 0 else -total


def permanent_naive(m, rows: Sequence[int] = None, cols: Sequence[int] = None) -> complex:
    """Permutation-sum permanent; k! terms, used as an independent check."""
    m = np.asarray(m)
    rows = range(m.shape[0]) if rows is None else rows
    cols = range(m.shape[1]) if cols is None else cols
    a = m[np.ix_(list(rows), list(cols))]
    k = a.shape[0]
    if a.shape != (k, k):
        raise DimensionError("permanent needs a square selection")
    total = 0j
    for perm in permutations(range(k)):
        prod = 1 + 0j
        for i, p in enumerate(perm):
            prod *= a[i, p]
        total += prod
    return total


def occupations_with_total(modes: int, photons: int):
    """All occupation tuples of ``photons`` bosons in ``modes`` modes."""
    out = []
    for combo in combinations_with_replacement(range(modes), photons):
        occ = [0] * modes
        for i in combo:
            occ[i] += 1
        out.append(tuple(occ))
    return out


def _expand(occ: Sequence[int]) -> List[int]:
    return [i for i, n in enumerate(occ) for _ in range(n)]


def transition_amplitude(u: np.ndarray, out_occ: Sequence[int], in_occ: Sequence[int]) -> complex:
    """``<out|U|in>`` for Fock states of equal photon number."""
    if sum(out_occ) != sum(in_occ):
        return 0j
    norm = 1.0
    for n in list(out_occ) + list(in_occ):
        norm *= math.factorial(n)
    return permanent(u, _expand(out_occ), _expand(in_occ)) / math.sqrt(norm)


def apply_network(u: UnitaryMatrix, s: StateVector) -> StateVector:
    """Propagate ``s`` through the network (linear over basis states)."""
    if s.mode_count != u.dim:
        raise DimensionError(f"state has {s.mode_count} modes but network has {u.dim}")
    m = u.entries
    cache = {}
    acc = {}
    for basis, amp in s.amplitudes.items():
        n_in = basis.occupations
        total = sum(n_in)
        if total not in cache:
            cache[total] = occupations_with_total(u.dim, total)
        for out in cache[total]:
            val = transition_amplitude(m, out, n_in)
            if val != 0:
                acc[out] = acc.get(out, 0j) + amp * val
    return StateVector(u.dim, acc)


def beam_splitter_unitary(t: complex, r: complex, modes: Tuple[int, int], dim: int) -> UnitaryMatrix:
    """Two-mode splitter on ``modes = (i, j)`` embedded in an identity of size ``dim``.

    A photon entering ``j`` leaves as ``r |1_i> + t |1_j>``; a photon entering
    ``i`` leaves as ``t* |1_i> - r* |1_j>``. For real ``t, r`` this is the
    creation-operator map ``a_i^+ -> t a_i^+ - r a_j^+``, ``a_j^+ -> r a_i^+ + t a_j^+``.
    """
    t = complex(t)
    r = complex(r)
    if abs(abs(t) ** 2 + abs(r) ** 2 - 1.0) > 1e-12:
        raise ConstraintError(f"|t|^2 + |r|^2 = {abs(t)**2 + abs(r)**2!r}, expected 1")
    i, j = modes
    if i == j or not (0 <= i < dim and 0 <= j < dim):
        raise DimensionError(f"invalid beam splitter modes {modes} for dim {dim}")
    m = np.eye(dim, dtype=complex)
    m[i, i] = t.conjugate()
    m[j, i] = -r.conjugate()
    m[i, j] = r
    m[j, j] = t
    return UnitaryMatrix(m)


# --- Reck triangular mesh -------------------------------------------------

@dataclass(frozen=True)
class ReckParameters:
    """Triangular mesh: ``U = diag(exp(i*output_phases)) @ T_last @ ... @ T_first``.

    Each ``T`` acts on the adjacent mode pair given by :func:`reck_planes` with
    block ``[[e^{i phi} cos(theta), -sin(theta)], [e^{i phi} sin(theta), cos(theta)]]``.
    """

    dim: int
    angles: Tuple[Tuple[float, float], ...]
    output_phases: Tuple[float, ...]

    def __post_init__(self):
        n_planes = self.dim * (self.dim - 1) // 2
        if len(self.angles) != n_planes:
            raise DimensionError(f"dim {self.dim} needs {n_planes} planes, got {len(self.angles)}")
        if len(self.output_phases) != self.dim:
            raise DimensionError(f"dim {self.dim} needs {self.dim} output phases")
        object.__setattr__(self, "angles", tuple((float(a), float(b)) for a, b in self.angles))
        object.__setattr__(self, "output_phases", tuple(float(p) for p in self.output_phases))

    @property
    def n_params(self) -> int:
        return self.dim * self.dim

    def to_vector(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.angles, dtype=float).reshape(-1),
                               np.asarray(self.output_phases, dtype=float)])

    @classmethod
    def from_vector(cls, dim: int, vec) -> "ReckParameters":
        vec = np.asarray(vec, dtype=float)
        n = dim * (dim - 1) // 2
        angles = vec[:2 * n].reshape(n, 2) if n else np.zeros((0, 2))
        return cls(dim, tuple(map(tuple, angles)), tuple(vec[2 * n:2 * n + dim]))


def reck_planes(dim: int) -> List[Tuple[int, int]]:
    """Mode pairs in the order the planes act (first entry acts first)."""
    return [(c, c + 1) for i in range(dim - 1, 0, -1) for c in range(i)]


def reck_matrix(dim: int, vec) -> np.ndarray:
    """Compose a Reck parameter vector straight to an ndarray (optimizer hot path)."""
    vec = np.asarray(vec, dtype=float)
    planes = reck_planes(dim)
    u = np.eye(dim, dtype=complex)
    for k, (p, q) in enumerate(planes):
        theta, phi = vec[2 * k], vec[2 * k + 1]
        c, s = math.cos(theta), math.sin(theta)
        e = complex(math.cos(phi), math.sin(phi))
        rp = u[p].copy()
        u[p] = e * c * rp - s * u[q]
        u[q] = e * s * rp + c * u[q]
    phases = vec[2 * len(planes):2 * len(planes) + dim]
    return np.exp(1j * phases)[:, None] * u


def reck_compose(p: ReckParameters) -> UnitaryMatrix:
    return UnitaryMatrix(reck_matrix(p.dim, p.to_vector()), atol=1e-12)


def reck_decompose(u: UnitaryMatrix) -> ReckParameters:
    """Null the strictly lower triangle by right-multiplied Givens rotations.

    Rows are processed bottom-up; within a row the weight is pushed from the
    left-most column towards the diagonal. What remains is the output phase
    screen.
    """
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    dim = u.dim
    w = np.array(u.entries, dtype=complex)
    angles = []
    for i, c in [(i, c) for i in range(dim - 1, 0, -1) for c in range(i)]:
        x, y = w[i, c], w[i, c + 1]
        if abs(x) < 1e-300:
            theta, phi = 0.0, 0.0
        else:
            theta = math.atan2(abs(x), abs(y))
            phi = float(np.angle(x) - np.angle(y)) if abs(y) > 1e-300 else float(np.angle(x))
        cs, sn = math.cos(theta), math.sin(theta)
        e = complex(math.cos(phi), math.sin(phi))
        # w <- w @ T^dag on columns (c, c+1)
        col_c = w[:, c].copy()
        col_d = w[:, c + 1].copy()
        w[:, c] = col_c * e.conjugate() * cs - col_d * sn
        w[:, c + 1] = col_c * e.conjugate() * sn + col_d * cs
        angles.append((theta, phi))
    phases = tuple(float(np.angle(w[k, k])) for k in range(dim))
    return ReckParameters(dim, tuple(angles), phases)


def random_unitary(dim: int, rng: np.random.Generator) -> UnitaryMatrix:
    """Haar-random unitary (QR of a complex Ginibre matrix with phase fix)."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return UnitaryMatrix(q)
