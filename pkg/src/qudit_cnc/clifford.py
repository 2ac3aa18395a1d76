"""Clifford elements as symplectic-affine pairs (S, b).

The element g = T_b U_S acts by g T_a g^dag = omega^{[b, S a]} T_{S a}, where
U_S is the phase-free Weil-representation unitary of S.  Global phases are
dropped throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .cnc import CncSet, PhasePoint, make_point
from .field import SymplecticSpace, Vector
from .pauli import DENSE_CAP, _basis_digits, _pauli_cached, check_dense, omega

GATE_NAMES = ("F", "P", "SUM", "X", "Z")


class UnknownGate(ValueError):
    pass


def _as_matrix(space: SymplecticSpace, s) -> np.ndarray:
    m = np.asarray(s, dtype=np.int64) % space.d
    if m.shape != (space.dim, space.dim):
        raise ValueError(f"S must be {space.dim}x{space.dim}, got shape {m.shape}")
    return m


def is_symplectic(space: SymplecticSpace, s) -> bool:
    m = _as_matrix(space, s)
    j = space.form
    return not ((m.T @ j @ m - j) % space.d).any()


@dataclass(frozen=True)
class CliffordElement:
    space: SymplecticSpace
    S: tuple[tuple[int, ...], ...]
    b: Vector

    @classmethod
    def from_data(cls, space: SymplecticSpace, s, b: Sequence[int] | None = None) -> CliffordElement:
        m = _as_matrix(space, s)
        if not is_symplectic(space, m):
            raise ValueError("S does not preserve the symplectic form")
        vec = space.zero if b is None else space.vector(b)
        return cls(space, tuple(tuple(int(x) for x in row) for row in m), vec)

    @classmethod
    def identity(cls, space: SymplecticSpace) -> CliffordElement:
        return cls.from_data(space, np.eye(space.dim, dtype=np.int64))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.S, dtype=np.int64)

    def apply(self, a: Sequence[int]) -> Vector:
        """S a."""
        return tuple(int(x) for x in (self.matrix @ np.asarray(a, dtype=np.int64)) % self.space.d)

    def phase(self, a: Sequence[int]) -> int:
        """Phi(a) = [b, S a]."""
        return self.space.product(self.b, self.apply(a))

    def conjugate(self, a: Sequence[int]) -> tuple[int, Vector]:
        """(Phi(a), S a): g T_a g^dag = omega^Phi(a) T_{S a}."""
        sa = self.apply(a)
        return self.space.product(self.b, sa), sa

    def act_on_label(self, u: Sequence[int]) -> Vector:
        """Wigner covariance u -> S u + b."""
        return self.space.add(self.apply(u), self.b)

    def __matmul__(self, other: CliffordElement) -> CliffordElement:
        return compose(self, other)

    def inverse(self) -> CliffordElement:
        sp = self.space
        j = sp.form
        s_inv = (-j @ self.matrix.T @ j) % sp.d
        b = (-(s_inv @ np.asarray(self.b, dtype=np.int64))) % sp.d
        return CliffordElement(sp, tuple(tuple(int(x) for x in r) for r in s_inv),
                               tuple(int(x) for x in b))

    def power(self, k: int) -> CliffordElement:
        base = self if k >= 0 else self.inverse()
        out = CliffordElement.identity(self.space)
        for _ in range(abs(k)):
            out = compose(out, base)
        return out

    def unitary(self, cap: int = DENSE_CAP) -> np.ndarray:
        """Dense T_b U_S (up to global phase)."""
        check_dense(self.space, cap)
        sp = self.space
        return _pauli_cached(sp.n, sp.d, self.b) @ _weil_unitary(sp.n, sp.d, self.S)

    def act_on_phase_point(self, p: PhasePoint) -> PhasePoint:
        return act_on_phase_point(self, p)


def compose(g: CliffordElement, h: CliffordElement) -> CliffordElement:
    """g h as (S_g S_h, b_g + S_g b_h)."""
    if g.space != h.space:
        raise ValueError("elements act on different spaces")
    sp = g.space
    s = (g.matrix @ h.matrix) % sp.d
    b = sp.add(g.b, g.apply(h.b))
    return CliffordElement(sp, tuple(tuple(int(x) for x in r) for r in s), b)


def act_on_phase_point(g: CliffordElement, p: PhasePoint) -> PhasePoint:
    """(S Omega, g.gamma) with g.gamma(S c) = gamma(c) - [b, S c]."""
    sp = g.space
    d = sp.d
    core = p.cnc.core.basis
    new_core = [g.apply(c) for c in core]
    core_vals = [(v - sp.product(g.b, sc)) % d for v, sc in zip(p.gamma.core_values, new_core)]
    gens = [g.apply(a) for a in p.cnc.generators]
    gen_vals = [(v - sp.product(g.b, sa)) % d for v, sa in zip(p.gamma.generator_values, gens)]
    return make_point(sp, new_core, core_vals, gens, gen_vals)


def act_on_cnc_set(g: CliffordElement, cs: CncSet) -> CncSet:
    """The set S Omega (Pauli translations fix labels)."""
    sp = g.space
    core = sp.span([g.apply(v) for v in cs.core.basis])
    if cs.generators:
        return CncSet.cone(sp, core, [g.apply(a) for a in cs.generators])
    return CncSet.subspace(core)


def _local_matrix(space: SymplecticSpace, blocks: dict[tuple[int, int], int]) -> np.ndarray:
    m = np.eye(space.dim, dtype=np.int64)
    for (i, j), v in blocks.items():
        m[i, j] = v
    return m % space.d


def gate(space: SymplecticSpace, name: str, qudits: Sequence[int], param: int = 1) -> CliffordElement:
    """Named generator on 0-based qudit indices.

    F and P act on one qudit, SUM on (control, target); ``param`` is the
    power for F, P and SUM and the shift amount for X and Z.
    """
    n = space.n
    qs = [int(q) for q in qudits]
    arity = 2 if name == "SUM" else 1
    if name not in GATE_NAMES:
        raise UnknownGate(f"unknown gate {name!r}; expected one of {', '.join(GATE_NAMES)}")
    if len(qs) != arity:
        raise ValueError(f"{name} takes {arity} qudit index(es), got {len(qs)}")
    for q in qs:
        if not 0 <= q < n:
            raise IndexError(f"qudit index {q} out of range for n = {n}")
    if name == "SUM" and qs[0] == qs[1]:
        raise ValueError("SUM needs distinct control and target")
    q = qs[0]
    if name == "X":
        v = [0] * space.dim
        v[n + q] = param
        return CliffordElement.from_data(space, np.eye(space.dim, dtype=np.int64), v)
    if name == "Z":
        v = [0] * space.dim
        v[q] = param
        return CliffordElement.from_data(space, np.eye(space.dim, dtype=np.int64), v)
    if name == "F":
        # (z, x) -> (-x, z)
        m = _local_matrix(space, {(q, q): 0, (n + q, n + q): 0, (q, n + q): -1, (n + q, q): 1})
    elif name == "P":
        # (z, x) -> (z + x, x)
        m = _local_matrix(space, {(q, n + q): 1})
    else:
        c, t = qs
        # x_t += x_c, z_c -= z_t
        m = _local_matrix(space, {(n + t, n + c): 1, (c, t): -1})
    return CliffordElement.from_data(space, m).power(param)


def random_clifford(space: SymplecticSpace, rng: np.random.Generator, depth: int = 12) -> CliffordElement:
    """Product of random generators, used for randomized tests and orbits."""
    g = CliffordElement.identity(space)
    for _ in range(depth):
        name = GATE_NAMES[rng.integers(len(GATE_NAMES))]
        if name == "SUM":
            if space.n < 2:
                continue
            qs = [int(x) for x in rng.choice(space.n, size=2, replace=False)]
        else:
            qs = [int(rng.integers(space.n))]
        param = int(rng.integers(1, space.d))
        g = compose(gate(space, name, qs, param), g)
    return g


@lru_cache(maxsize=4096)
def _weil_unitary(n: int, d: int, s: tuple[tuple[int, ...], ...]) -> np.ndarray:
    """Phase-free U with U T_a U^dag = T_{S a}, fixed up to a global phase.

    Built as the twirl sum_a T_{S a} M T_a^dag, which commutes correctly for
    any seed M and is nonzero for some basis matrix M.
    """
    dim = d**n
    sm = np.array(s, dtype=np.int64)
    space = SymplecticSpace(n, d)
    if (sm == np.eye(2 * n, dtype=np.int64)).all():
        return np.eye(dim, dtype=complex)
    labels = list(space.vectors())
    for seed in range(dim * dim):
        m = np.zeros((dim, dim), dtype=complex)
        m.flat[seed] = 1.0
        u = np.zeros((dim, dim), dtype=complex)
        for a in labels:
            sa = tuple(int(x) for x in (sm @ np.asarray(a)) % d)
            u += _pauli_cached(n, d, sa) @ m @ _pauli_cached(n, d, a).conj().T
        norm = np.linalg.norm(u)
        if norm > 1e-6:
            u *= np.sqrt(dim) / norm
            # fix the global phase on the first nonzero entry for determinism
            k = np.flatnonzero(np.abs(u) > 1e-9)[0]
            u *= np.abs(u.flat[k]) / u.flat[k]
            u.setflags(write=False)
            return u
    raise RuntimeError("twirl vanished for every seed matrix")


def named_unitary(n: int, d: int, name: str, qudits: Sequence[int]) -> np.ndarray:
    """Textbook matrices for the generators, independent of the twirl."""
    dim = d**n
    digits = _basis_digits(n, d)
    weights = d ** np.arange(n - 1, -1, -1)
    w = omega(d)
    u = np.zeros((dim, dim), dtype=complex)
    if name == "F":
        q = qudits[0]
        for col in range(dim):
            for k in range(d):
                new = digits[col].copy()
                new[q] = k
                u[new @ weights, col] += w ** (-(k * digits[col][q]) % d) / np.sqrt(d)
        return u
    if name == "P":
        half = pow(2, -1, d)
        q = qudits[0]
        return np.diag(w ** ((half * digits[:, q] ** 2) % d))
    if name == "SUM":
        c, t = qudits
        new = digits.copy()
        new[:, t] = (new[:, t] + new[:, c]) % d
        u[new @ weights, np.arange(dim)] = 1
        return u
    raise UnknownGate(name)
