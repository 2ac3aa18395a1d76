"""Wigner functions, CNC decompositions by linear programming, the Lambda
polytope, isotropic projections and the closedness separation witness."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import lp
from .clifford import act_on_cnc_set, act_on_phase_point, gate
from .cnc import CncSet, PhasePoint, cnc_sets, enumerate_phase_points, phase_point_operator, wigner_point
from .field import CapExceeded, Subspace, SymplecticSpace, Vector
from .oracle import DensityState
from .pauli import ATOL, DENSE_CAP, OutcomeAssignment, _pauli_cached, check_dense, projector

RECON_TOL = 1e-7
STABILIZER_CAP = 2


class DictionarySpanError(ValueError):
    def __init__(self, deficit: int, message: str):
        super().__init__(message)
        self.deficit = deficit


def _operator(x) -> np.ndarray:
    return np.asarray(x.matrix if isinstance(x, DensityState) else x, dtype=complex)


# --- Wigner function -----------------------------------------------------------

def wigner_function(rho, space: SymplecticSpace | None = None) -> dict[Vector, float]:
    """W(u) = d^{-n} Tr(rho A_u) for every u in E."""
    if isinstance(rho, DensityState):
        space = rho.space
    if space is None:
        raise ValueError("space needed for a bare matrix")
    m = _operator(rho)
    dim = check_dense(space)
    return {u: float(np.trace(m @ wigner_point(space, u).operator()).real) / dim
            for u in space.vectors()}


# --- Pauli-coordinate embedding ------------------------------------------------

@lru_cache(maxsize=None)
def _pair_representatives(space: SymplecticSpace) -> tuple[Vector, ...]:
    """One label of each {b, -b} pair, b != 0."""
    return tuple(b for b in space.vectors() if any(b) and b < space.scale(-1, b))


@lru_cache(maxsize=None)
def _row_index(space: SymplecticSpace) -> dict[Vector, tuple[int, int]]:
    """Map label -> (row of its pair, conjugation sign)."""
    out = {}
    for k, b in enumerate(_pair_representatives(space)):
        out[b] = (k, 1)
        out[space.scale(-1, b)] = (k, -1)
    return out


def _embed(space: SymplecticSpace, coeffs: Mapping[Vector, complex] | np.ndarray, exact: bool) -> np.ndarray:
    """Real coordinates of a Hermitian operator from c_b = Tr(T_b^dag X).

    Float: [c_0, Re c_b, Im c_b for each pair representative b].  Exact (d = 3)
    uses (x, y) with c_b = x + y omega for x, y rational.
    """
    reps = _pair_representatives(space)
    out = np.empty(1 + 2 * len(reps), dtype=object if exact else float)
    get = coeffs.get if isinstance(coeffs, Mapping) else None
    c0 = get(space.zero, 0)
    out[0] = c0 if exact else float(np.real(c0))
    for k, b in enumerate(reps):
        c = get(b, 0)
        if exact:
            out[1 + 2 * k], out[2 + 2 * k] = c if isinstance(c, tuple) else (Fraction(0), Fraction(0))
        else:
            out[1 + 2 * k], out[2 + 2 * k] = np.real(c), np.imag(c)
    return out


_OMEGA3_XY = {0: (Fraction(1), Fraction(0)), 1: (Fraction(0), Fraction(1)), 2: (Fraction(-1), Fraction(-1))}


def point_coordinates(p: PhasePoint, exact: bool = False) -> np.ndarray:
    """Coordinates of A_Omega^gamma, read off gamma without dense matrices.

    Tr(T_b^dag A) = omega^{-gamma(b)} for b in Omega and 0 otherwise.
    """
    sp = p.space
    reps = _row_index(sp)
    d = sp.d
    if exact and d != 3:
        raise ValueError("exact coordinates are implemented for d = 3")
    coeffs: dict[Vector, object] = {}
    for b, val in p.gamma.items():
        if b != sp.zero and reps[b][1] < 0:
            continue
        if exact:
            coeffs[b] = _OMEGA3_XY[(-val) % 3] if any(b) else Fraction(1)
        else:
            coeffs[b] = np.exp(-2j * np.pi * val / d)
    return _embed(sp, coeffs, exact)


def operator_coordinates(space: SymplecticSpace, x: np.ndarray, exact: bool = False,
                         max_denominator: int = 10**6) -> np.ndarray:
    """Coordinates of a dense Hermitian operator."""
    check_dense(space)
    x = np.asarray(x, dtype=complex)
    coeffs = {}
    for b in itertools.chain([space.zero], _pair_representatives(space)):
        c = complex(np.vdot(_pauli_cached(space.n, space.d, b), x))
        if exact:
            if space.d != 3:
                raise ValueError("exact coordinates are implemented for d = 3")
            y = 2 * c.imag / np.sqrt(3)
            xr = c.real + c.imag / np.sqrt(3)
            coeffs[b] = (Fraction(xr).limit_denominator(max_denominator),
                         Fraction(y).limit_denominator(max_denominator))
            if not any(b):
                coeffs[b] = Fraction(c.real).limit_denominator(max_denominator)
        else:
            coeffs[b] = c
    return _embed(space, coeffs, exact)


# --- decomposition -------------------------------------------------------------

@dataclass
class Decomposition:
    dictionary: list[PhasePoint]
    coefficients: np.ndarray | None
    feasible: bool
    objective: float | None
    residual: float | None
    certificate: np.ndarray | None = None
    exact: bool = False
    status: str = ""

    def sparse(self, tol: float = 1e-12) -> dict[int, float]:
        if self.coefficients is None:
            return {}
        return {i: float(c) for i, c in enumerate(self.coefficients) if abs(float(c)) > tol}


def _dictionary_matrix(dictionary: Sequence[PhasePoint], exact: bool) -> np.ndarray:
    cols = [point_coordinates(p, exact) for p in dictionary]
    return np.stack(cols, axis=1)


def cnc_decompose(rho, dictionary: Sequence[PhasePoint], mode: str = "feasibility",
                  exact: bool = False, space: SymplecticSpace | None = None) -> Decomposition:
    """Expand rho over phase-point operators.

    ``rho`` is a DensityState, a dense matrix, or a PhasePoint (whose exact
    coordinates are then used).  In feasibility mode the coefficients are
    nonnegative, otherwise a Farkas certificate is returned.  In
    min-negativity mode the total negative weight is minimized.
    """
    if mode not in ("feasibility", "min-negativity"):
        raise ValueError(f"unknown mode {mode!r}")
    if not dictionary:
        raise ValueError("empty dictionary")
    space = dictionary[0].space
    if isinstance(rho, PhasePoint):
        target = point_coordinates(rho, exact)
    else:
        target = operator_coordinates(space, _operator(rho), exact)
    mat = _dictionary_matrix(dictionary, exact)
    fmat = mat.astype(float)
    rank = np.linalg.matrix_rank(fmat)
    if np.linalg.matrix_rank(np.column_stack([fmat, target.astype(float)])) > rank:
        deficit = space.size - rank
        raise DictionarySpanError(deficit, f"dictionary spans rank {rank} of {space.size}; "
                                           f"target lies outside (deficit {deficit})")
    k = len(dictionary)
    if mode == "feasibility":
        res = lp.solve(np.zeros(k, dtype=int), mat, target, exact=exact)
        coeffs = res.x
    else:
        split = np.concatenate([mat, -mat], axis=1)
        cost = np.concatenate([np.zeros(k, dtype=int), np.ones(k, dtype=int)])
        res = lp.solve(cost, split, target, exact=exact)
        coeffs = None if res.x is None else res.x[:k] - res.x[k:]
    if res.status != "optimal":
        if res.status == "infeasible" and not lp.verify_certificate(mat, target, res.certificate, exact):
            raise ArithmeticError("LP reported infeasibility without a valid certificate")
        return Decomposition(list(dictionary), None, False, None, None, res.certificate, exact, res.status)
    residual = float(np.abs(fmat @ coeffs.astype(float) - target.astype(float)).max())
    if residual > RECON_TOL:
        raise ArithmeticError(f"LP tolerance failure: reconstruction residual {residual:.3g}")
    obj = 0.0 if mode == "feasibility" else float(res.objective)
    return Decomposition(list(dictionary), coeffs, True, obj, residual, None, exact, res.status)


def reconstruct(dec: Decomposition) -> np.ndarray:
    """Dense sum of coefficient-weighted phase-point operators."""
    out = None
    for p, c in zip(dec.dictionary, dec.coefficients):
        if float(c) == 0:
            continue
        term = float(c) * phase_point_operator(p)
        out = term if out is None else out + term
    return out


def wigner_dictionary(space: SymplecticSpace) -> list[PhasePoint]:
    return [wigner_point(space, u) for u in space.vectors()]


def clifford_orbit(seeds: Sequence[PhasePoint], limit: int = 100_000) -> list[PhasePoint]:
    """Closure of seed points under the generating gates."""
    if not seeds:
        return []
    sp = seeds[0].space
    gens = _generating_gates(sp)
    gens += [gate(sp, name, [q]) for name in ("X", "Z") for q in range(sp.n)]
    seen = dict.fromkeys(seeds)
    frontier = list(seen)
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = act_on_phase_point(g, p)
                if q not in seen:
                    seen[q] = None
                    nxt.append(q)
                    if len(seen) > limit:
                        raise CapExceeded(f"orbit exceeds {limit} points")
        frontier = nxt
    return list(seen)


def _generating_gates(space: SymplecticSpace):
    gens = [gate(space, name, [q]) for name in ("F", "P") for q in range(space.n)]
    gens += [gate(space, "SUM", [c, t]) for c in range(space.n) for t in range(space.n) if c != t]
    return gens


def cnc_set_orbits(space: SymplecticSpace, max_xi: int | None = None) -> list[tuple[CncSet, int]]:
    """One representative per Clifford orbit of CNC sets, with orbit sizes.

    Pauli translations fix every set, so the symplectic generators suffice.
    """
    gens = _generating_gates(space)
    seen: dict[CncSet, int] = {}
    reps: list[CncSet] = []
    for cs in cnc_sets(space, max_xi):
        if cs in seen:
            continue
        rid = len(reps)
        reps.append(cs)
        seen[cs] = rid
        frontier = [cs]
        while frontier:
            nxt = []
            for c in frontier:
                for g in gens:
                    q = act_on_cnc_set(g, c)
                    if q not in seen:
                        seen[q] = rid
                        nxt.append(q)
            frontier = nxt
    sizes = [0] * len(reps)
    for rid in seen.values():
        sizes[rid] += 1
    return list(zip(reps, sizes))


def default_dictionary(space: SymplecticSpace, max_points: int = 5000,
                       max_xi: int | None = None) -> list[PhasePoint]:
    """Wigner points plus enumerated points up to ``max_points``.

    At n = 1 this is every phase point; at larger n the enumeration is
    truncated and the cap is reported by the caller.
    """
    out = dict.fromkeys(wigner_dictionary(space))
    try:
        for p in enumerate_phase_points(space, max_xi=max_xi, max_points=max_points):
            out.setdefault(p)
    except CapExceeded:
        pass
    return list(out)


# --- stabilizer states and Lambda ----------------------------------------------

def maximal_isotropic_subspaces(space: SymplecticSpace) -> list[Subspace]:
    return [s for s in space.subspaces(space.n) if s.is_isotropic()]


def stabilizer_states(space: SymplecticSpace, cap: int = STABILIZER_CAP) -> list[DensityState]:
    """|psi><psi| = Pi_I^r for every maximal isotropic I and outcome r."""
    if space.n > cap:
        raise CapExceeded(f"stabilizer enumeration capped at n <= {cap}")
    out = []
    for sub in maximal_isotropic_subspaces(space):
        for vals in itertools.product(range(space.d), repeat=space.n):
            out.append(DensityState(space, projector(OutcomeAssignment(sub, vals))))
    return out


@lru_cache(maxsize=None)
def _stabilizer_stack(space: SymplecticSpace) -> np.ndarray:
    return np.stack([s.matrix for s in stabilizer_states(space)])


@dataclass
class LambdaResult:
    member: bool
    min_overlap: float
    violating_index: int | None


def lambda_membership(x, space: SymplecticSpace, tol: float = ATOL) -> LambdaResult:
    """X is in Lambda iff Tr(sigma X) >= -tol for every stabilizer state sigma."""
    m = _operator(x)
    if abs(np.trace(m) - 1) > 1e-7 or not np.allclose(m, m.conj().T, atol=1e-7):
        raise ValueError("Lambda membership needs a unit-trace Hermitian operator")
    stack = _stabilizer_stack(space)
    overlaps = np.einsum("kij,ji->k", stack, m).real
    k = int(np.argmin(overlaps))
    member = bool(overlaps[k] >= -tol)
    return LambdaResult(member, float(overlaps[k]), None if member else k)


# --- isotropic projections ------------------------------------------------------

def project_isotropic(x: np.ndarray, sub: Subspace) -> np.ndarray:
    """pr_I(X) = d^{-n} sum_{a in I} Tr(T_a^dag X) T_a."""
    sp = sub.space
    dim = check_dense(sp)
    out = np.zeros((dim, dim), dtype=complex)
    for a in sub.elements():
        t = _pauli_cached(sp.n, sp.d, a)
        out += np.vdot(t, x) * t
    return out / dim


def simplex_vertices(sub: Subspace) -> list[tuple[OutcomeAssignment, np.ndarray]]:
    """Unit-trace vertices (|I| / d^n) Pi_I^gamma."""
    sp = sub.space
    scale = sub.size / sp.d**sp.n
    out = []
    for vals in itertools.product(range(sp.d), repeat=sub.dim):
        r = OutcomeAssignment(sub, vals)
        out.append((r, scale * projector(r)))
    return out


@dataclass
class ProjectionReport:
    subspace: Subspace
    fixed_points_ok: bool
    samples: int
    min_coordinate: float
    max_residual: float
    ok: bool
    failures: list[int] = field(default_factory=list)


def iso_projection_check(sub: Subspace, samples: Sequence[np.ndarray], tol: float = 1e-7) -> ProjectionReport:
    """Vertices are fixed by pr_I, and pr_I(X) is a convex combination of them.

    Barycentric coordinates come from Tr(Pi_I^gamma X) and are cross-checked
    by a least-squares solve against the vertex matrices.
    """
    if not sub.is_isotropic():
        raise ValueError("subspace is not isotropic")
    verts = simplex_vertices(sub)
    fixed = all(np.allclose(project_isotropic(v, sub), v, atol=ATOL) for _, v in verts)
    vmat = np.stack([v.ravel() for _, v in verts], axis=1)
    min_coord = np.inf
    max_res = 0.0
    failures = []
    for i, x in enumerate(samples):
        x = _operator(x)
        px = project_isotropic(x, sub)
        bary = np.array([np.trace(projector(r) @ x).real for r, _ in verts])
        lsq = np.linalg.lstsq(vmat, px.ravel(), rcond=None)[0]
        res = max(np.abs(vmat @ bary - px.ravel()).max(), np.abs(lsq.real - bary).max())
        max_res = max(max_res, float(res))
        min_coord = min(min_coord, float(bary.min()))
        if bary.min() < -tol or res > tol or abs(bary.sum() - 1) > tol:
            failures.append(i)
    ok = fixed and not failures
    return ProjectionReport(sub, fixed, len(samples), float(min_coord), max_res, ok, failures)


# --- generalized phase operators and the separation witness ---------------------

@dataclass(frozen=True)
class GeneralizedPhaseOp:
    """d^{-n} sum_{u in Omega} e^{i eta(u)} T_u with eta(-u) = -eta(u)."""

    space: SymplecticSpace
    eta: Mapping[Vector, float]

    def __post_init__(self):
        sp = self.space
        eta = {sp.vector(u): float(v) % (2 * np.pi) for u, v in self.eta.items()}
        if sp.zero not in eta or abs(np.exp(1j * eta[sp.zero]) - 1) > ATOL:
            raise ValueError("support must contain 0 with eta(0) = 0")
        for u, v in eta.items():
            w = eta.get(sp.scale(-1, u))
            if w is None or abs(np.exp(1j * (v + w)) - 1) > ATOL:
                raise ValueError(f"eta(-u) must equal -eta(u) at u = {u}")
        object.__setattr__(self, "eta", eta)

    @classmethod
    def from_phase_point(cls, p: PhasePoint) -> GeneralizedPhaseOp:
        d = p.space.d
        return cls(p.space, {b: -2 * np.pi * v / d for b, v in p.gamma.items()})

    @property
    def support(self) -> frozenset[Vector]:
        return frozenset(self.eta)

    def operator(self, cap: int = DENSE_CAP) -> np.ndarray:
        sp = self.space
        dim = check_dense(sp, cap)
        out = np.zeros((dim, dim), dtype=complex)
        for u, v in self.eta.items():
            out += np.exp(1j * v) * _pauli_cached(sp.n, sp.d, u)
        return out / dim


@dataclass
class WitnessResult:
    lhs: float
    rhs_max: float
    separated: bool
    rhs_values: list[float]


def separation_witness(a_op: GeneralizedPhaseOp, a: Sequence[int], b: Sequence[int]) -> WitnessResult:
    """Hyperplane separating pr_I(A) from pr_I(Lambda) for I = <a, b>.

    Needs a, b in Omega, [a, b] = 0, a + b not in Omega and a, b independent.
    The right side is the largest value of Tr(V Y) over the unit-trace
    vertices V of the projected simplex.
    """
    sp = a_op.space
    d = sp.d
    a, b = sp.vector(a), sp.vector(b)
    eta = a_op.eta
    if a not in eta or b not in eta:
        raise ValueError("a and b must lie in the support")
    if sp.product(a, b):
        raise ValueError("a and b must commute")
    ab = sp.add(a, b)
    if ab in eta:
        raise ValueError("a + b must lie outside the support")
    sub = sp.span([a, b])
    if sub.dim != 2:
        raise ValueError("a and b must be linearly independent")
    offset = 2 * np.pi * (d // 2) / d
    terms = [(a, eta[a]), (b, eta[b]), (ab, eta[a] + eta[b] + offset)]
    dim = check_dense(sp)
    y = np.zeros((dim, dim), dtype=complex)
    for u, ph in terms:
        t = np.exp(1j * ph) * _pauli_cached(sp.n, d, u)
        y += t + t.conj().T
    lhs = float(np.trace(project_isotropic(a_op.operator(), sub) @ y).real)
    rhs = [float(np.trace(v @ y).real) for _, v in simplex_vertices(sub)]
    return WitnessResult(lhs, max(rhs), lhs > max(rhs) + ATOL, rhs)


def eta_linearity_check(a_op: GeneralizedPhaseOp, sub: Subspace, tol: float = 1e-9) -> bool:
    """Whether eta on I is 2 pi / d times a linear functional I -> Z_d."""
    sp = a_op.space
    d = sp.d
    vals = {}
    for u in sub.elements():
        if u not in a_op.eta:
            raise ValueError("I must be contained in the support")
        k = a_op.eta[u] * d / (2 * np.pi)
        if abs(k - round(k)) > tol:
            return False
        vals[u] = int(round(k)) % d
    lin = [vals[v] for v in sub.basis]
    for u, k in vals.items():
        coords = sub.coordinates(u)
        if sum(c * x for c, x in zip(coords, lin)) % d != k:
            return False
    return True
