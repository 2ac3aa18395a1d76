"""Prime-field arithmetic and symplectic linear algebra on E = Z_d^{2n}.

Vectors are plain tuples of ints ``(z_1, ..., z_n, x_1, ..., x_n)`` reduced
mod d, which is also their serialized form.  Subspaces are kept in reduced
row-echelon form, which makes them canonical and hashable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

Vector = tuple[int, ...]


class CapExceeded(RuntimeError):
    """A configured size cap would be exceeded."""


class DimensionMismatch(ValueError):
    pass


def is_prime(d: int) -> bool:
    if d < 2:
        return False
    return all(d % p for p in range(2, int(d**0.5) + 1))


def check_odd_prime(d: int) -> int:
    if not isinstance(d, (int, np.integer)) or not is_prime(int(d)) or d == 2:
        raise ValueError(f"d must be an odd prime, got {d!r}")
    return int(d)


def inv_mod(x: int, d: int) -> int:
    x %= d
    if x == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {d}")
    return pow(x, -1, d)


def rref(mat: np.ndarray, d: int, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form of ``mat`` over Z_d.

    Pivots are searched only among the first ``ncols`` columns, so trailing
    columns can carry values along (augmented elimination).  Zero rows are
    kept at the bottom; callers slice them off with ``len(pivots)``.
    """
    r = np.array(mat, dtype=np.int64) % d
    if r.ndim != 2:
        raise ValueError("expected a 2-d array")
    rows, cols = r.shape
    ncols = cols if ncols is None else ncols
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == rows:
            break
        nz = np.nonzero(r[row:, col])[0]
        if nz.size == 0:
            continue
        p = row + int(nz[0])
        if p != row:
            r[[row, p]] = r[[p, row]]
        r[row] = (r[row] * inv_mod(int(r[row, col]), d)) % d
        factors = r[:, col].copy()
        factors[row] = 0
        if factors.any():
            r = (r - np.outer(factors, r[row])) % d
        pivots.append(col)
        row += 1
    return r, pivots


def nullspace(mat: np.ndarray, d: int, ncols: int) -> np.ndarray:
    """Basis (as rows) of {x : mat @ x = 0 mod d}."""
    mat = np.asarray(mat, dtype=np.int64).reshape(-1, ncols)
    r, pivots = rref(mat, d)
    free = [c for c in range(ncols) if c not in pivots]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[k, fc] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = (-r[i, fc]) % d
    return basis


def linear_extension(
    rows: Sequence[Sequence[int]], values: Sequence[int], d: int, width: int
) -> tuple[np.ndarray, np.ndarray] | None:
    """Row-reduce vectors together with prescribed linear values.

    Returns ``(basis, basis_values)`` with the basis in RREF, or None when
    the values are inconsistent with any linear functional on the span.
    """
    if len(rows) == 0:
        return np.zeros((0, width), dtype=np.int64), np.zeros(0, dtype=np.int64)
    aug = np.zeros((len(rows), width + 1), dtype=np.int64)
    aug[:, :width] = np.asarray(rows, dtype=np.int64).reshape(len(rows), width)
    aug[:, width] = np.asarray(values, dtype=np.int64)
    r, pivots = rref(aug, d, ncols=width)
    k = len(pivots)
    if r[k:, width].any():
        return None
    return r[:k, :width], r[:k, width]


@dataclass(frozen=True)
class SymplecticSpace:
    """The space E = Z_d^{2n} with [a, b] = <a_z|b_x> - <a_x|b_z>."""

    n: int
    d: int

    def __post_init__(self):
        check_odd_prime(self.d)
        if self.n < 1:
            raise ValueError(f"number of qudits must be positive, got {self.n}")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def size(self) -> int:
        return self.d ** (2 * self.n)

    @cached_property
    def half(self) -> int:
        """2^{-1} mod d."""
        return inv_mod(2, self.d)

    @cached_property
    def form(self) -> np.ndarray:
        """Matrix J with [a, b] = a^T J b."""
        n = self.n
        j = np.zeros((2 * n, 2 * n), dtype=np.int64)
        j[:n, n:] = np.eye(n, dtype=np.int64)
        j[n:, :n] = -np.eye(n, dtype=np.int64)
        return j

    def vector(self, seq: Iterable[int]) -> Vector:
        v = tuple(int(x) % self.d for x in seq)
        if len(v) != self.dim:
            raise DimensionMismatch(f"expected length {self.dim}, got {len(v)}")
        return v

    def check(self, v: Sequence[int]) -> None:
        if len(v) != self.dim:
            raise DimensionMismatch(f"expected length {self.dim}, got {len(v)}")

    @property
    def zero(self) -> Vector:
        return (0,) * self.dim

    def e(self, i: int) -> Vector:
        """Z-type basis vector on qudit i (0-based)."""
        v = [0] * self.dim
        v[i] = 1
        return tuple(v)

    def f(self, i: int) -> Vector:
        """X-type basis vector on qudit i (0-based)."""
        v = [0] * self.dim
        v[self.n + i] = 1
        return tuple(v)

    def add(self, a: Sequence[int], b: Sequence[int]) -> Vector:
        return tuple((x + y) % self.d for x, y in zip(a, b))

    def scale(self, c: int, a: Sequence[int]) -> Vector:
        return tuple((c * x) % self.d for x in a)

    def product(self, a: Sequence[int], b: Sequence[int]) -> int:
        if len(a) != self.dim or len(b) != self.dim:
            raise DimensionMismatch("vector length does not match the space")
        n = self.n
        s = sum(a[i] * b[n + i] - a[n + i] * b[i] for i in range(n))
        return s % self.d

    def normalize(self, v: Sequence[int]) -> Vector:
        """Scale v so that its first nonzero entry is 1 (canonical line label)."""
        for x in v:
            if x % self.d:
                return self.scale(inv_mod(x, self.d), v)
        return tuple(v)

    def span(self, vectors: Iterable[Sequence[int]]) -> Subspace:
        rows = [self.vector(v) for v in vectors]
        if not rows:
            return Subspace(self, ())
        r, piv = rref(np.array(rows), self.d)
        return Subspace(self, tuple(tuple(int(x) for x in row) for row in r[: len(piv)]))

    def full(self) -> Subspace:
        return self.span([self.e(i) for i in range(self.n)] + [self.f(i) for i in range(self.n)])

    def zero_subspace(self) -> Subspace:
        return Subspace(self, ())

    def vectors(self) -> Iterator[Vector]:
        """All d^{2n} elements of E in lexicographic order."""
        return itertools.product(range(self.d), repeat=self.dim)

    def lines(self) -> list[Vector]:
        """Normalized representatives of all 1-dimensional subspaces."""
        return [v for v in self.vectors() if any(v) and self.normalize(v) == v]

    def subspaces(self, k: int) -> Iterator[Subspace]:
        """All k-dimensional subspaces, one canonical RREF basis each."""
        m, d = self.dim, self.d
        for pivots in itertools.combinations(range(m), k):
            # free entries: row i, columns after pivot i that are not pivots
            slots = [(i, c) for i in range(k) for c in range(pivots[i] + 1, m) if c not in pivots]
            for vals in itertools.product(range(d), repeat=len(slots)):
                rows = [[0] * m for _ in range(k)]
                for i, p in enumerate(pivots):
                    rows[i][p] = 1
                for (i, c), x in zip(slots, vals):
                    rows[i][c] = x
                yield Subspace(self, tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class Subspace:
    """A subspace of E stored by its RREF basis."""

    space: SymplecticSpace
    basis: tuple[Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return self.space.d ** self.dim

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.basis, dtype=np.int64).reshape(self.dim, self.space.dim)

    @cached_property
    def pivots(self) -> tuple[int, ...]:
        return tuple(next(i for i, x in enumerate(row) if x) for row in self.basis)

    def _check(self, other: Subspace) -> None:
        if other.space != self.space:
            raise DimensionMismatch("subspaces live in different spaces")

    def coordinates(self, v: Sequence[int]) -> tuple[int, ...]:
        """Coefficients along the basis (valid when v lies in the subspace)."""
        return tuple(int(v[p]) % self.space.d for p in self.pivots)

    def reduce(self, v: Sequence[int]) -> tuple[Vector, tuple[int, ...]]:
        """Split v = residual + sum c_j basis_j with residual zero on pivots.

        The residual is the lexicographically least element of the coset
        v + self.
        """
        self.space.check(v)
        c = self.coordinates(v)
        if not c:
            return tuple(int(x) % self.space.d for x in v), c
        res = (np.asarray(v, dtype=np.int64) - np.asarray(c, dtype=np.int64) @ self.matrix) % self.space.d
        return tuple(int(x) for x in res), c

    def contains(self, v: Sequence[int]) -> bool:
        return not any(self.reduce(v)[0])

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def contains_subspace(self, other: Subspace) -> bool:
        self._check(other)
        return all(self.contains(b) for b in other.basis)

    def perp(self) -> Subspace:
        """Symplectic complement {b : [a, b] = 0 for all a in self}."""
        sp = self.space
        if self.dim == 0:
            return sp.full()
        ns = nullspace(self.matrix @ sp.form, sp.d, sp.dim)
        return sp.span(ns.tolist())

    def join(self, other: Subspace) -> Subspace:
        self._check(other)
        return self.space.span(self.basis + other.basis)

    def __add__(self, other: Subspace) -> Subspace:
        return self.join(other)

    def intersect(self, other: Subspace) -> Subspace:
        self._check(other)
        return self.perp().join(other.perp()).perp()

    def is_isotropic(self) -> bool:
        if self.dim == 0:
            return True
        g = (self.matrix @ self.space.form @ self.matrix.T) % self.space.d
        return not g.any()

    def elements(self) -> Iterator[Vector]:
        d = self.space.d
        if self.dim == 0:
            yield self.space.zero
            return
        for coeffs in itertools.product(range(d), repeat=self.dim):
            yield tuple(int(x) for x in (np.asarray(coeffs) @ self.matrix) % d)

    def element_set(self) -> frozenset[Vector]:
        return frozenset(self.elements())

    def to_json(self) -> list[list[int]]:
        return [list(v) for v in self.basis]


def symplectic_product(a: Sequence[int], b: Sequence[int], d: int) -> int:
    """[a, b] for vectors of matching length 2n."""
    if len(a) != len(b) or len(a) % 2:
        raise DimensionMismatch("vectors must have equal even length")
    n = len(a) // 2
    return sum(a[i] * b[n + i] - a[n + i] * b[i] for i in range(n)) % d


def orthogonal_closure(
    space: SymplecticSpace, seed: Iterable[Sequence[int]], cap: int | None = None
) -> frozenset[Vector]:
    """Smallest superset of ``seed`` closed under adding orthogonal pairs.

    Brute-force worklist over the materialized set, meant as a test oracle.
    ``cap`` bounds the size of the result (default d^{2n}, itself limited
    to 3^8 elements).
    """
    d = space.d
    limit = min(space.size, 3**8) if cap is None else cap
    if space.size > 3**8 and cap is None:
        raise CapExceeded(f"closure oracle limited to 3^8 elements, |E| = {space.size}")
    items: list[Vector] = []
    index: set[Vector] = set()
    work: list[Vector] = []
    for v in seed:
        v = space.vector(v)
        if v not in index:
            index.add(v)
            items.append(v)
            work.append(v)
    jf = space.form
    while work:
        x = work.pop()
        arr = np.array(items, dtype=np.int64)
        prods = (arr @ (jf @ np.asarray(x, dtype=np.int64))) % d
        for k in np.nonzero(prods == 0)[0]:
            s = tuple(int(t) for t in (arr[k] + np.asarray(x)) % d)
            if s not in index:
                index.add(s)
                items.append(s)
                work.append(s)
                if len(items) > limit:
                    raise CapExceeded(f"closure exceeds cap of {limit} elements")
    return frozenset(items)
