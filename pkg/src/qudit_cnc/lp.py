"""Two-phase dense-tableau simplex for  min c.x  s.t.  A x = b, x >= 0.

Works on floats (tolerance ``TOL``) or exactly on ``fractions.Fraction``.
Pricing is Dantzig's rule, switching to Bland's rule after a run of
degenerate pivots so the method cannot cycle.  Infeasible problems return
a Farkas certificate y with y.A <= 0 and y.b > 0, read off the phase-one
duals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

TOL = 1e-7
DEGENERATE_SWITCH = 50


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | Fraction | None
    certificate: np.ndarray | None
    iterations: int
    exact: bool


class _Tableau:
    def __init__(self, t: np.ndarray, basis: list[int], exact: bool, tol: float):
        self.t = t  # rows 0..m-1 constraints, last row reduced costs; last column rhs
        self.basis = basis
        self.exact = exact
        self.tol = 0 if exact else tol
        self.iterations = 0

    def pivot(self, r: int, c: int) -> None:
        t = self.t
        t[r] = t[r] / t[r, c]
        col = t[:, c].copy()
        col[r] = 0
        nz = np.nonzero(col != 0)[0] if self.exact else np.nonzero(np.abs(col) > 0)[0]
        if nz.size:
            t[nz] = t[nz] - np.outer(col[nz], t[r])
        if not self.exact:
            t[r, c] = 1.0
            t[nz, c] = 0.0
        self.basis[r] = c
        self.iterations += 1

    def run(self, allowed: np.ndarray) -> str:
        """Optimize over columns where ``allowed`` is True."""
        t = self.t
        m = t.shape[0] - 1
        degenerate = 0
        while True:
            cost = t[m, :-1]
            cand = np.nonzero(allowed & (cost < -self.tol))[0]
            if cand.size == 0:
                return "optimal"
            if degenerate >= DEGENERATE_SWITCH:
                c = int(cand[0])
            else:
                c = int(cand[np.argmin(cost[cand].astype(float))])
            col = t[:m, c]
            rows = np.nonzero(col > self.tol)[0]
            if rows.size == 0:
                return "unbounded"
            ratios = t[rows, -1] / col[rows]
            best = ratios.min()
            if self.exact:
                ties = rows[ratios == best]
            else:
                ties = rows[ratios <= best + self.tol]
            r = int(min(ties, key=lambda i: self.basis[i]))
            degenerate = degenerate + 1 if t[r, -1] == 0 or (not self.exact and abs(t[r, -1]) <= self.tol) else 0
            self.pivot(r, c)


def _convert(arr, exact: bool) -> np.ndarray:
    a = np.asarray(arr)
    if not exact:
        return a.astype(float)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        if isinstance(v, Fraction):
            out[idx] = v
        elif isinstance(v, (int, np.integer)):
            out[idx] = Fraction(int(v))
        else:
            out[idx] = Fraction(float(v))
    return out


def solve(c: Sequence, a: np.ndarray, b: Sequence, exact: bool = False, tol: float = TOL) -> LPResult:
    """Minimize c.x subject to A x = b and x >= 0."""
    a = _convert(a, exact)
    b = _convert(b, exact)
    c = _convert(c, exact)
    m, nvar = a.shape
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    sign = np.array([-1 if (bi < 0) else 1 for bi in b], dtype=np.int64)
    a = a * sign[:, None]
    b = b * sign
    # columns: original vars, artificials, rhs
    t = np.empty((m + 1, nvar + m + 1), dtype=object if exact else float)
    t[...] = zero
    t[:m, :nvar] = a
    for i in range(m):
        t[i, nvar + i] = one
    t[:m, -1] = b
    # phase one: minimize the sum of artificials
    t[m, :nvar] = -a.sum(axis=0)
    t[m, -1] = -b.sum()
    tab = _Tableau(t, list(range(nvar, nvar + m)), exact, tol)
    allowed = np.ones(nvar + m, dtype=bool)
    tab.run(allowed)
    phase1 = -t[m, -1]
    if (phase1 > 0) if exact else (phase1 > tol):
        # duals of phase one: y = c_B B^{-1}, and B^{-1} sits in the artificial columns
        cb = np.array([one if j >= nvar else zero for j in tab.basis], dtype=object if exact else float)
        y = cb @ t[:m, nvar:nvar + m]
        return LPResult("infeasible", None, None, y * sign, tab.iterations, exact)
    # drive artificials out of the basis; rows that cannot be cleared are redundant
    keep = []
    for i in range(m):
        j = tab.basis[i]
        if j < nvar:
            keep.append(i)
            continue
        row = t[i, :nvar]
        nz = np.nonzero(row != 0)[0] if exact else np.nonzero(np.abs(row) > tol)[0]
        if nz.size:
            tab.pivot(i, int(nz[0]))
            keep.append(i)
    rows = keep + [m]
    t2 = np.empty((len(rows), nvar + 1), dtype=object if exact else float)
    t2[:, :nvar] = t[rows, :nvar]
    t2[:, -1] = t[rows, -1]
    basis = [tab.basis[i] for i in keep]
    # phase two objective row: c - c_B B^{-1} A
    t2[-1, :nvar] = c
    t2[-1, -1] = zero
    for i, j in enumerate(basis):
        if c[j] != 0:
            t2[-1] = t2[-1] - c[j] * t2[i]
    tab2 = _Tableau(t2, basis, exact, tol)
    tab2.iterations = tab.iterations
    status = tab2.run(np.ones(nvar, dtype=bool))
    if status == "unbounded":
        return LPResult("unbounded", None, None, None, tab2.iterations, exact)
    x = np.empty(nvar, dtype=object if exact else float)
    x[...] = zero
    for i, j in enumerate(tab2.basis):
        x[j] = t2[i, -1]
    obj = sum((ci * xi for ci, xi in zip(c, x)), zero)
    return LPResult("optimal", x, obj, None, tab2.iterations, exact)


def verify_certificate(a: np.ndarray, b: Sequence, y: np.ndarray, exact: bool = False,
                       tol: float = TOL) -> bool:
    """Farkas check: y.A <= 0 and y.b > 0 (exactly, or with tolerance)."""
    a = _convert(a, exact)
    b = _convert(b, exact)
    y = _convert(y, exact)
    ya = y @ a
    yb = y @ b
    if exact:
        return all(v <= 0 for v in ya) and yb > 0
    return bool((ya <= tol).all() and yb > tol)
