"""Phased Pauli operators, outcome assignments and dense realizations.

Dense matrices are an oracle path only: they are built for d^n up to
``DENSE_CAP`` and compared with an entrywise tolerance of ``ATOL``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .field import CapExceeded, SymplecticSpace, Subspace, Vector

DENSE_CAP = 250
ATOL = 1e-9


class DenseCapExceeded(CapExceeded):
    pass


def omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def check_dense(space: SymplecticSpace, cap: int = DENSE_CAP) -> int:
    dim = space.d**space.n
    if dim > cap:
        raise DenseCapExceeded(f"d^n = {dim} exceeds dense cap {cap}")
    return dim


def _basis_digits(n: int, d: int) -> np.ndarray:
    """Rows are the digit vectors j in Z_d^n, qudit 0 most significant."""
    idx = np.arange(d**n)
    return np.stack([(idx // d ** (n - 1 - k)) % d for k in range(n)], axis=1)


@lru_cache(maxsize=None)
def _pauli_cached(n: int, d: int, a: Vector) -> np.ndarray:
    z = np.array(a[:n], dtype=np.int64)
    x = np.array(a[n:], dtype=np.int64)
    digits = _basis_digits(n, d)
    shifted = (digits + x) % d
    weights = d ** np.arange(n - 1, -1, -1)
    target = shifted @ weights
    half = pow(2, -1, d)
    expo = (-int(z @ x) * half + shifted @ z) % d
    m = np.zeros((d**n, d**n), dtype=complex)
    m[target, np.arange(d**n)] = omega(d) ** expo
    m.setflags(write=False)
    return m


def pauli_matrix(space: SymplecticSpace, a: Sequence[int], phase: int = 0,
                 cap: int = DENSE_CAP) -> np.ndarray:
    """Dense omega^phase * T_a with T_a = omega^{-<a_z|a_x>/2} Z^{a_z} X^{a_x}."""
    check_dense(space, cap)
    m = _pauli_cached(space.n, space.d, space.vector(a))
    if phase % space.d:
        return omega(space.d) ** (phase % space.d) * m
    return m.copy()


@dataclass(frozen=True)
class PhasedPauli:
    """omega^phase * T_label."""

    space: SymplecticSpace
    label: Vector
    phase: int = 0

    def __mul__(self, other: PhasedPauli) -> PhasedPauli:
        # T_a T_b = omega^{[a,b]/2} T_{a+b}
        sp = self.space
        ph = self.phase + other.phase + sp.half * sp.product(self.label, other.label)
        return PhasedPauli(sp, sp.add(self.label, other.label), ph % sp.d)

    def matrix(self, cap: int = DENSE_CAP) -> np.ndarray:
        return pauli_matrix(self.space, self.label, self.phase, cap)


def beta(space: SymplecticSpace, a: Sequence[int], b: Sequence[int]) -> int:
    """Phase defect of T_a T_b = omega^{-beta} T_{a+b} for commuting a, b.

    Identically zero for odd d under the symmetric phase convention; kept so
    that downstream formulas can be written with it.
    """
    if space.product(a, b):
        raise ValueError("beta is only defined for commuting labels")
    return 0


def commutator_phase(space: SymplecticSpace, a: Sequence[int], b: Sequence[int]) -> int:
    """Exponent k with T_a T_b T_a^-1 T_b^-1 = omega^k."""
    return space.product(a, b)


@dataclass(frozen=True)
class OutcomeAssignment:
    """Linear outcome values r on an isotropic subspace, stored on its basis."""

    subspace: Subspace
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != self.subspace.dim:
            raise ValueError("need one value per basis vector")
        if not self.subspace.is_isotropic():
            raise ValueError("outcome assignments need an isotropic subspace")

    @classmethod
    def from_vectors(cls, space: SymplecticSpace, rows, values) -> OutcomeAssignment:
        """Build from arbitrary spanning vectors with their outcome values."""
        from .field import linear_extension

        ext = linear_extension([space.vector(r) for r in rows], values, space.d, space.dim)
        if ext is None:
            raise ValueError("outcome values are not linear on the span")
        basis, vals = ext
        sub = Subspace(space, tuple(tuple(int(x) for x in r) for r in basis))
        return cls(sub, tuple(int(v) for v in vals))

    def __call__(self, a: Sequence[int]) -> int:
        res, coords = self.subspace.reduce(a)
        if any(res):
            raise ValueError(f"{a} is not in the measured subspace")
        return sum(c * v for c, v in zip(coords, self.values)) % self.subspace.space.d

    def all_values(self):
        """(element, r(element)) for every element of the subspace."""
        for a in self.subspace.elements():
            yield a, self(a)


def projector(r: OutcomeAssignment, cap: int = DENSE_CAP) -> np.ndarray:
    """Pi_I^r = |I|^{-1} sum_{a in I} omega^{-r(a)} T_a."""
    sp = r.subspace.space
    dim = check_dense(sp, cap)
    w = omega(sp.d)
    out = np.zeros((dim, dim), dtype=complex)
    for a, val in r.all_values():
        out += w ** (-val) * _pauli_cached(sp.n, sp.d, a)
    return out / r.subspace.size


def all_outcome_assignments(subspace: Subspace):
    """Every linear outcome assignment on an isotropic subspace."""
    import itertools

    d = subspace.space.d
    for vals in itertools.product(range(d), repeat=subspace.dim):
        yield OutcomeAssignment(subspace, vals)


def pauli_coefficients(space: SymplecticSpace, x: np.ndarray) -> dict[Vector, complex]:
    """Coefficients c_b with X = d^{-n} sum_b c_b T_b, i.e. c_b = Tr(T_b^dag X)."""
    check_dense(space)
    return {
        b: complex(np.vdot(_pauli_cached(space.n, space.d, b), x))
        for b in space.vectors()
    }


def dense_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def dense_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("dense operator must be a square array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
