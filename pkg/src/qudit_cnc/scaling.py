"""Wall-time scaling of generator-level phase-point updates in n."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .clifford import act_on_phase_point, gate
from .cnc import PhasePoint, make_point
from .field import SymplecticSpace
from .simulate import measure_update_single


def synthetic_point(n: int, d: int = 3, xi: int = 3, dim_core: int = 1) -> PhasePoint:
    """Cone with xi lines on qudit 0 over the core <e_1, ..., e_dim_core>."""
    if not 2 <= xi <= d + 1:
        raise ValueError("xi must lie in [2, d + 1] for single-qudit lines")
    if dim_core > n - 1:
        raise ValueError("core needs dim_core <= n - 1 spare qudits")
    sp = SymplecticSpace(n, d)
    lines = [sp.e(0), sp.f(0)] + [sp.add(sp.e(0), sp.scale(k, sp.f(0))) for k in range(1, d)]
    gens = lines[:xi]
    vals = [k % d for k in range(xi)]
    core = [sp.e(q) for q in range(1, 1 + dim_core)]
    return make_point(sp, core, [0] * dim_core, gens, vals)


@dataclass
class ScalingResult:
    ns: list[int]
    seconds_per_update: list[float]
    exponent: float


def update_cost(n: int, d: int = 3, xi: int = 3, dim_core: int = 1, steps: int = 60,
                seed: int = 0) -> float:
    """Mean seconds per gate or measurement update at n qudits.

    Every update starts from the same synthetic point, so xi and dim I are
    fixed while the vectors grow with n.  Gates are random generators on
    random qudits and measured labels are uniformly random nonzero vectors.
    """
    sp = SymplecticSpace(n, d)
    rng = np.random.default_rng(seed)
    p0 = synthetic_point(n, d, xi, dim_core)
    gates = []
    for _ in range(steps):
        name = ("F", "P", "X", "Z", "SUM")[rng.integers(5)]
        qs = [int(x) for x in rng.choice(n, size=2, replace=False)] if name == "SUM" else [int(rng.integers(n))]
        gates.append(gate(sp, name, qs))
    labels = []
    while len(labels) < steps:
        a = tuple(int(x) for x in rng.integers(0, d, sp.dim))
        if any(a):
            labels.append(a)
    outcomes = [int(s) for s in rng.integers(0, d, steps)]
    start = time.perf_counter()
    for g in gates:
        act_on_phase_point(g, p0)
    for a, s in zip(labels, outcomes):
        measure_update_single(p0, a, s=s)
    elapsed = time.perf_counter() - start
    return elapsed / (2 * steps)


def fit_exponent(ns: Sequence[int] = (4, 8, 16, 32, 64), **kwargs) -> ScalingResult:
    """Least-squares slope of log(time) against log(n)."""
    times = [update_cost(n, **kwargs) for n in ns]
    slope = float(np.polyfit(np.log(ns), np.log(times), 1)[0])
    return ScalingResult(list(ns), times, slope)
