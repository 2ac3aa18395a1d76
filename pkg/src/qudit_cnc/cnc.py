"""Closed-and-noncontextual (CNC) sets, value assignments and phase points.

A CNC set is stored in one of two canonical forms:

* subspace form: a single subspace V (``core``), no generators;
* cone form: an isotropic core I plus pairwise non-commuting generators
  a_1..a_xi (xi >= 2) in I^perp, the set being the union of <a_k, I>.

Generators are reduced modulo I (lexicographically least coset element),
scaled so their first nonzero entry is 1, and sorted.  Value assignments
are stored on the core basis and on the generators only.

A subspace V whose quotient by its radical is a hyperbolic plane is also a
union of d+1 lines over that radical, and carries nonlinear assignments.
Phase points on such a V use subspace form when gamma is linear and cone
form otherwise, so every (set, gamma) pair has exactly one representation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .field import (
    CapExceeded,
    Subspace,
    SymplecticSpace,
    Vector,
    inv_mod,
    linear_extension,
    orthogonal_closure,
)
from .pauli import DENSE_CAP, _pauli_cached, check_dense, omega

ORACLE_LIMIT = 729


class NotClosedError(ValueError):
    """The given element set is not closed under inference."""


class InconsistentAssignment(ValueError):
    pass


class Check(NamedTuple):
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class CncSet:
    space: SymplecticSpace
    core: Subspace
    generators: tuple[Vector, ...] = ()

    @classmethod
    def subspace(cls, sub: Subspace) -> CncSet:
        return cls(sub.space, sub)

    @classmethod
    def cone(cls, space: SymplecticSpace, core: Subspace | Iterable[Sequence[int]],
             generators: Iterable[Sequence[int]]) -> CncSet:
        """Canonical cone form; collapses to subspace form when xi <= 1."""
        if not isinstance(core, Subspace):
            core = space.span(core)
        gens: set[Vector] = set()
        for g in generators:
            res, _ = core.reduce(space.vector(g))
            if not any(res):
                raise ValueError(f"generator {tuple(g)} lies in the core")
            gens.add(space.normalize(res))
        ordered = tuple(sorted(gens))
        if len(ordered) <= 1:
            return cls(space, core.join(space.span(ordered)))
        return cls(space, core, ordered)

    @property
    def form(self) -> str:
        return "cone" if self.generators else "subspace"

    @property
    def xi(self) -> int:
        return len(self.generators)

    @property
    def num_generators(self) -> int:
        return self.core.dim + self.xi

    @property
    def size(self) -> int:
        d = self.space.d
        if not self.generators:
            return self.core.size
        return (self.xi * d - self.xi + 1) * self.core.size

    @cached_property
    def _gen_index(self) -> dict[Vector, int]:
        return {g: k for k, g in enumerate(self.generators)}

    def locate(self, v: Sequence[int]) -> tuple[int, int, tuple[int, ...]] | None:
        """Write v = lam * a_k + (core element with given coordinates).

        Returns ``(k, lam, core_coords)`` with k = -1 for core elements, or
        None when v is not in the set.
        """
        res, coords = self.core.reduce(v)
        if not any(res):
            return -1, 0, coords
        if not self.generators:
            return None
        lam = next(x for x in res if x)
        k = self._gen_index.get(self.space.normalize(res))
        if k is None:
            return None
        return k, lam, coords

    def __contains__(self, v) -> bool:
        return self.locate(v) is not None

    def is_subspace(self) -> bool:
        """True when the element set is closed under all addition."""
        if not self.generators:
            return True
        return self.xi == self.space.d + 1 and self.space.span(self.generators).dim == 2

    def span(self) -> Subspace:
        return self.core.join(self.space.span(self.generators)) if self.generators else self.core

    def elements(self) -> Iterator[Vector]:
        """Each element exactly once."""
        yield from self.core.elements()
        if not self.generators:
            return
        d = self.space.d
        core_elems = np.array(list(self.core.elements()), dtype=np.int64)
        for g in self.generators:
            garr = np.asarray(g, dtype=np.int64)
            for lam in range(1, d):
                for row in (core_elems + lam * garr) % d:
                    yield tuple(int(x) for x in row)

    def element_set(self) -> frozenset[Vector]:
        return frozenset(self.elements())


def validate(obj: CncSet | PhasePoint, oracle_limit: int = ORACLE_LIMIT) -> Check:
    """Check the canonical-form invariants; cross-check closure at small size.

    For a PhasePoint the assignment is additionally checked on every
    orthogonal pair of elements when the set is small enough.
    """
    if isinstance(obj, PhasePoint):
        chk = validate(obj.cnc, oracle_limit)
        if chk and obj.cnc.size <= oracle_limit:
            chk = _check_noncontextual(obj.gamma)
        return chk
    cs = obj
    sp = cs.space
    if cs.core.space != sp:
        return Check(False, "core lives in a different space")
    if sp.span(cs.core.basis).basis != cs.core.basis:
        return Check(False, "core basis is not in reduced row-echelon form")
    if cs.generators:
        if cs.xi < 2:
            return Check(False, "cone form needs at least two generators")
        if not cs.core.is_isotropic():
            return Check(False, "core of a cone must be isotropic")
        if list(cs.generators) != sorted(set(cs.generators)):
            return Check(False, "generators not sorted or repeated")
        for g in cs.generators:
            res, _ = cs.core.reduce(g)
            if not any(res):
                return Check(False, f"generator {g} lies in the core")
            if res != g or sp.normalize(g) != g:
                return Check(False, f"generator {g} is not a canonical coset representative")
            for b in cs.core.basis:
                if sp.product(g, b):
                    return Check(False, f"generator {g} is not orthogonal to the core")
        for g, h in itertools.combinations(cs.generators, 2):
            if sp.product(g, h) == 0:
                return Check(False, f"generators {g} and {h} commute")
    if sp.size <= oracle_limit and cs.size <= oracle_limit:
        elems = cs.element_set()
        if orthogonal_closure(sp, elems) != elems:
            return Check(False, "closure oracle disagrees: set is not closed under inference")
    return Check(True)


def _check_noncontextual(gamma: ValueAssignment) -> Check:
    sp = gamma.owner.space
    table = dict(gamma.items())
    if table.get(sp.zero, 0) != 0:
        return Check(False, "gamma(0) must be 0")
    elems = sorted(table)
    arr = np.array(elems, dtype=np.int64)
    vals = np.array([table[v] for v in elems], dtype=np.int64)
    gram = (arr @ sp.form @ arr.T) % sp.d
    for i, j in zip(*np.nonzero(gram == 0)):
        s = tuple(int(x) for x in (arr[i] + arr[j]) % sp.d)
        if (vals[i] + vals[j] - table[s]) % sp.d:
            return Check(False, f"gamma not additive on {elems[i]}, {elems[j]}")
    return Check(True)


def classify(elements: Iterable[Sequence[int]], space: SymplecticSpace) -> CncSet:
    """Canonical CncSet whose element set equals a given closed set."""
    elems = frozenset(space.vector(v) for v in elements)
    if not elems:
        raise NotClosedError("empty set")
    arr = np.array(sorted(elems), dtype=np.int64)
    gram = (arr @ space.form @ arr.T) % space.d
    idx = {v: i for i, v in enumerate(sorted(elems))}
    for i, j in zip(*np.nonzero(gram == 0)):
        s = tuple(int(x) for x in (arr[i] + arr[j]) % space.d)
        if s not in idx:
            raise NotClosedError(f"{tuple(arr[i])} + {tuple(arr[j])} missing from the set")
    sub = space.span(elems)
    if sub.size == len(elems):
        return CncSet.subspace(sub)
    central = [tuple(int(x) for x in arr[i]) for i in range(len(arr)) if not gram[i].any()]
    core = space.span(central)
    gens = []
    for v in elems:
        res, _ = core.reduce(v)
        if any(res):
            gens.append(res)
    cs = CncSet.cone(space, core, gens)
    if cs.element_set() != elems or not validate(cs, oracle_limit=0):
        raise NotClosedError("set is closed but has no canonical form (classification failed)")
    return cs


@dataclass(frozen=True)
class ValueAssignment:
    """Noncontextual gamma on a CNC set, stored on generators."""

    owner: CncSet
    core_values: tuple[int, ...]
    generator_values: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.core_values) != self.owner.core.dim:
            raise ValueError("need one value per core basis vector")
        if len(self.generator_values) != self.owner.xi:
            raise ValueError("need one value per generator")

    def __call__(self, v: Sequence[int]) -> int:
        loc = self.owner.locate(v)
        if loc is None:
            raise KeyError(f"{tuple(v)} is not in the set")
        k, lam, coords = loc
        d = self.owner.space.d
        val = sum(c * x for c, x in zip(coords, self.core_values))
        if k >= 0:
            val += lam * self.generator_values[k]
        return val % d

    def items(self) -> Iterator[tuple[Vector, int]]:
        """(b, gamma(b)) for every element of the set."""
        cs = self.owner
        d = cs.space.d
        cvals = np.asarray(self.core_values, dtype=np.int64)
        mat = cs.core.matrix
        k = cs.core.dim
        coeffs = np.array(list(itertools.product(range(d), repeat=k)), dtype=np.int64).reshape(d**k, k)
        core_elems = (coeffs @ mat.reshape(k, cs.space.dim)) % d
        core_vals = (coeffs @ cvals.reshape(k)) % d
        for row, val in zip(core_elems, core_vals):
            yield tuple(int(x) for x in row), int(val)
        for g, gv in zip(cs.generators, self.generator_values):
            garr = np.asarray(g, dtype=np.int64)
            for lam in range(1, d):
                for row, val in zip((core_elems + lam * garr) % d, (core_vals + lam * gv) % d):
                    yield tuple(int(x) for x in row), int(val)

    def linear_extension(self) -> tuple[np.ndarray, np.ndarray] | None:
        sp = self.owner.space
        rows = list(self.owner.core.basis) + list(self.owner.generators)
        vals = list(self.core_values) + list(self.generator_values)
        return linear_extension(rows, vals, sp.d, sp.dim)


def extend_assignment(cs: CncSet, core_values: Sequence[int],
                      generator_values: Sequence[int] = ()) -> ValueAssignment:
    d = cs.space.d
    return ValueAssignment(cs, tuple(int(v) % d for v in core_values),
                           tuple(int(v) % d for v in generator_values))


def is_linear(gamma: ValueAssignment) -> bool:
    """Whether gamma is the restriction of a linear functional on <Omega>."""
    return gamma.linear_extension() is not None


@dataclass(frozen=True)
class PhasePoint:
    cnc: CncSet
    gamma: ValueAssignment

    def __post_init__(self):
        if self.gamma.owner != self.cnc:
            raise ValueError("assignment belongs to a different set")

    @property
    def space(self) -> SymplecticSpace:
        return self.cnc.space

    @property
    def num_generators(self) -> int:
        return self.cnc.num_generators

    def __contains__(self, v) -> bool:
        return v in self.cnc

    def value(self, v: Sequence[int]) -> int:
        return self.gamma(v)

    def restrict_perp(self, a: Sequence[int]) -> PhasePoint:
        """(Omega cap a^perp, gamma restricted), computed on generators."""
        sp = self.space
        d = sp.d
        a = sp.vector(a)
        core = self.cnc.core.basis
        cvals = self.gamma.core_values
        prods = [sp.product(a, b) for b in core]
        if not any(prods):
            if not self.cnc.generators:
                return self
            keep = [k for k, g in enumerate(self.cnc.generators) if sp.product(a, g) == 0]
            return make_point(sp, core, cvals,
                              [self.cnc.generators[k] for k in keep],
                              [self.gamma.generator_values[k] for k in keep])
        j0 = next(j for j, p in enumerate(prods) if p)
        inv = inv_mod(prods[j0], d)
        u = sp.scale(inv, core[j0])  # [a, u] = 1
        gu = (inv * cvals[j0]) % d
        new_core, new_vals = [], []
        for j, (b, p) in enumerate(zip(core, prods)):
            if j == j0:
                continue
            new_core.append(sp.add(b, sp.scale(-p, u)))
            new_vals.append((cvals[j] - p * gu) % d)
        gens, gvals = [], []
        for g, gv in zip(self.cnc.generators, self.gamma.generator_values):
            p = sp.product(a, g)
            gens.append(sp.add(g, sp.scale(-p, u)))
            gvals.append((gv - p * gu) % d)
        return make_point(sp, new_core, new_vals, gens, gvals)

    def extend(self, rows: Sequence[Sequence[int]], values: Sequence[int]) -> PhasePoint:
        """(<rows> + Omega, gamma x r) for isotropic rows orthogonal to Omega."""
        return make_point(
            self.space,
            list(self.cnc.core.basis) + [self.space.vector(r) for r in rows],
            list(self.gamma.core_values) + list(values),
            self.cnc.generators,
            self.gamma.generator_values,
        )

    def operator(self, cap: int = DENSE_CAP) -> np.ndarray:
        return phase_point_operator(self, cap)


def make_point(space: SymplecticSpace, core_rows: Sequence[Sequence[int]],
               core_values: Sequence[int], generators: Sequence[Sequence[int]] = (),
               generator_values: Sequence[int] = ()) -> PhasePoint:
    """Canonical PhasePoint from possibly redundant generator data."""
    d = space.d
    ext = linear_extension(list(core_rows), list(core_values), d, space.dim)
    if ext is None:
        raise InconsistentAssignment("core values are not linear")
    basis, bvals = ext
    core = Subspace(space, tuple(tuple(int(x) for x in r) for r in basis))
    cvals = tuple(int(v) for v in bvals)
    gens: dict[Vector, int] = {}
    for g, gv in zip(generators, generator_values):
        res, coords = core.reduce(g)
        val = (gv - sum(c * x for c, x in zip(coords, cvals))) % d
        if not any(res):
            if val:
                raise InconsistentAssignment(f"generator {tuple(g)} in core with conflicting value")
            continue
        inv = inv_mod(next(x for x in res if x), d)
        key = space.scale(inv, res)
        val = (val * inv) % d
        if gens.setdefault(key, val) != val:
            raise InconsistentAssignment(f"conflicting values on line {key}")
    order = sorted(gens)
    if len(order) <= 1:
        ext = linear_extension(list(core.basis) + order, list(cvals) + [gens[g] for g in order],
                               d, space.dim)
        return _subspace_point(space, *ext)
    cs = CncSet(space, core, tuple(order))
    gamma = ValueAssignment(cs, cvals, tuple(gens[g] for g in order))
    if cs.is_subspace():
        lin = gamma.linear_extension()
        if lin is not None:
            return _subspace_point(space, *lin)
    return PhasePoint(cs, gamma)


def _subspace_point(space: SymplecticSpace, basis: np.ndarray, vals: np.ndarray) -> PhasePoint:
    sub = Subspace(space, tuple(tuple(int(x) for x in r) for r in basis))
    cs = CncSet.subspace(sub)
    return PhasePoint(cs, ValueAssignment(cs, tuple(int(v) for v in vals)))


def wigner_point(space: SymplecticSpace, u: Sequence[int]) -> PhasePoint:
    """The point (E, gamma_u) with A = d^{-n} sum_b omega^{[u,b]} T_b."""
    u = space.vector(u)
    full = space.full()
    vals = [space.product(b, u) for b in full.basis]
    return make_point(space, full.basis, vals)


def phase_point_operator(p: PhasePoint, cap: int = DENSE_CAP) -> np.ndarray:
    """A_Omega^gamma = d^{-n} sum_{b in Omega} omega^{-gamma(b)} T_b."""
    sp = p.space
    dim = check_dense(sp, cap)
    w = omega(sp.d)
    out = np.zeros((dim, dim), dtype=complex)
    for b, val in p.gamma.items():
        out += w ** (-val) * _pauli_cached(sp.n, sp.d, b)
    return out / dim


def noncommuting_construction(n: int, d: int) -> list[Vector]:
    """dn+1 pairwise non-orthogonal vectors built from a line covering of E_1."""
    space = SymplecticSpace(n, d)
    # c_1 = e, c_2 = f, c_{2+k} = e + k f; the last one, e + (d-1) f, is c_{d+1}
    cover = [(1, 0), (0, 1)] + [(1, k) for k in range(1, d)]
    last = cover[-1]

    def vec(parts: Sequence[tuple[int, int]]) -> Vector:
        z = [p[0] for p in parts] + [0] * (n - len(parts))
        x = [p[1] for p in parts] + [0] * (n - len(parts))
        return space.vector(z + x)

    out = []
    for row in range(n):
        for c in cover[:d]:
            out.append(vec([last] * row + [c]))
    out.append(vec([last] * n))
    return out


def isotropic_subspaces(space: SymplecticSpace, max_dim: int | None = None) -> Iterator[Subspace]:
    top = space.n if max_dim is None else min(max_dim, space.n)
    for k in range(top + 1):
        for sub in space.subspaces(k):
            if sub.is_isotropic():
                yield sub


def _line_classes(space: SymplecticSpace, core: Subspace) -> list[Vector]:
    """Canonical generators: lines of core^perp / core."""
    seen = set()
    for v in core.perp().elements():
        res, _ = core.reduce(v)
        if any(res):
            seen.add(space.normalize(res))
    return sorted(seen)


def _cliques(lines: list[Vector], space: SymplecticSpace, max_size: int) -> Iterator[tuple[int, ...]]:
    """Pairwise non-orthogonal index sets of size >= 2, in lexicographic order."""
    m = len(lines)
    if m == 0:
        return
    arr = np.array(lines, dtype=np.int64)
    adj = ((arr @ space.form @ arr.T) % space.d) != 0
    nbrs = [set(np.nonzero(adj[i])[0].tolist()) for i in range(m)]

    def grow(clique: tuple[int, ...], cands: list[int]):
        if len(clique) >= 2:
            yield clique
        if len(clique) == max_size:
            return
        for pos, c in enumerate(cands):
            yield from grow(clique + (c,), [x for x in cands[pos + 1:] if x in nbrs[c]])

    for i in range(m):
        yield from grow((i,), [x for x in range(i + 1, m) if x in nbrs[i]])


def cnc_sets(space: SymplecticSpace, max_xi: int | None = None) -> Iterator[CncSet]:
    """Every canonical CNC set (subspace forms, then cone forms up to max_xi)."""
    max_xi = 2 * space.n * space.d if max_xi is None else max_xi
    for k in range(space.dim + 1):
        for sub in space.subspaces(k):
            yield CncSet.subspace(sub)
    for core in isotropic_subspaces(space, space.n - 1):
        lines = _line_classes(space, core)
        for clique in _cliques(lines, space, max_xi):
            yield CncSet(space, core, tuple(lines[i] for i in clique))


def enumerate_phase_points(space: SymplecticSpace, max_xi: int | None = None,
                           max_points: int | None = None, start: int = 0) -> Iterator[PhasePoint]:
    """Every phase point up to the caps, each exactly once.

    Subspace-form sets carry their linear assignments; cone-form sets carry
    all d^{dim I + xi} assignments except, for cones that are subspaces,
    the linear ones (already listed in subspace form).  ``start`` skips that
    many points so an interrupted run can resume; exceeding ``max_points``
    raises CapExceeded carrying ``resume_from``.
    """
    d = space.d
    count = 0
    for cs in cnc_sets(space, max_xi):
        nvals = cs.core.dim + cs.xi
        plane = cs.generators and cs.is_subspace()
        for vals in itertools.product(range(d), repeat=nvals):
            gamma = ValueAssignment(cs, vals[: cs.core.dim], vals[cs.core.dim:])
            if plane and is_linear(gamma):
                continue
            if count >= start:
                if max_points is not None and count - start >= max_points:
                    err = CapExceeded(f"more than {max_points} phase points")
                    err.resume_from = count
                    raise err
                yield PhasePoint(cs, gamma)
            count += 1


def point_to_json(p: PhasePoint) -> dict:
    """Phase-point record; gamma is keyed by index into I + generators."""
    cs = p.cnc
    vals = list(p.gamma.core_values) + list(p.gamma.generator_values)
    return {
        "d": cs.space.d,
        "n": cs.space.n,
        "form": cs.form,
        "I": cs.core.to_json(),
        "generators": [list(g) for g in cs.generators],
        "gamma": {str(i): int(v) for i, v in enumerate(vals)},
    }


def point_from_json(data: dict) -> PhasePoint:
    space = SymplecticSpace(int(data["n"]), int(data["d"]))
    core = [space.vector(v) for v in data["I"]]
    gens = [space.vector(v) for v in data.get("generators", [])]
    gamma = data["gamma"]
    vals = [int(gamma[str(i)]) for i in range(len(core) + len(gens))]
    form = data.get("form", "cone" if gens else "subspace")
    if form == "subspace" and gens:
        raise ValueError("subspace form takes no generators")
    return make_point(space, core, vals[: len(core)], gens, vals[len(core):])
