"""Sampling simulators over CNC and Wigner phase spaces.

Randomness: shots are grouped in blocks of ``BLOCK`` and block k draws a
``(BLOCK, 1 + m)`` matrix of uniforms from ``SeedSequence(seed,
spawn_key=(k,))``.  Column 0 picks the input phase point, column 1 + j
serves the j-th measurement.  Shot i therefore sees the same numbers no
matter how many shots are requested or how blocks are scheduled.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit, CondGateOp, MeasureOp
from .cnc import PhasePoint
from .clifford import act_on_phase_point
from .field import SymplecticSpace, Vector
from .pauli import OutcomeAssignment

BLOCK = 4096
WEIGHT_TOL = 1e-9


class NegativeWeightError(ValueError):
    """Sampling needs a nonnegative, normalized representation."""


@dataclass(frozen=True)
class ShotRecord:
    outcomes: dict[str, int]
    final: object = None  # PhasePoint for the CNC path, label for the Wigner path


def measure_update_single(p: PhasePoint, a: Sequence[int], s: int | None = None,
                          rng: np.random.Generator | None = None) -> tuple[int, PhasePoint]:
    """Measure T_a on the phase point.

    If a is in Omega the outcome is gamma(a); otherwise it is uniform (taken
    from ``s`` when given, else drawn from ``rng``).
    """
    sp = p.space
    a = sp.vector(a)
    if not any(a):
        raise ValueError("measurement label must be nonzero")
    if a in p.cnc:
        return p.gamma(a), p.restrict_perp(a)
    if s is None:
        if rng is None:
            raise ValueError("a random outcome needs s or rng")
        s = int(rng.integers(sp.d))
    s %= sp.d
    # a not in Omega forces <a> cap Omega = {0}; extend() raises otherwise
    return s, p.restrict_perp(a).extend([a], [s])


def acceptance_weight(p: PhasePoint, subspace) -> float:
    """|Omega cap I| / |I| = Tr(Pi_I^r A) for consistent r."""
    inside = [v for v in subspace.elements() if v in p.cnc]
    return len(inside) / subspace.size


def measure_update_isotropic(p: PhasePoint, r: OutcomeAssignment) -> tuple[bool, PhasePoint | None, float]:
    """Joint measurement of an isotropic subspace with outcome r.

    Returns (accept, new point, weight).  Rejection means r disagrees with
    gamma on Omega cap I, a probability-zero branch.
    """
    sub = r.subspace
    q = p
    for b in sub.basis:
        q = q.restrict_perp(b)  # Omega cap I^perp
    inside = [v for v in sub.elements() if v in p.cnc]
    for v in inside:
        if p.gamma(v) != r(v):
            return False, None, 0.0
    weight = len(inside) / sub.size
    return True, q.extend(sub.basis, r.values), weight


class _Transitions:
    """Memoized phase-point transitions keyed by (point id, instruction)."""

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.points: list[PhasePoint] = []
        self.ids: dict[PhasePoint, int] = {}
        self.memo: dict[tuple[int, int], object] = {}

    def intern(self, p: PhasePoint) -> int:
        pid = self.ids.get(p)
        if pid is None:
            pid = len(self.points)
            self.points.append(p)
            self.ids[p] = pid
        return pid

    def gate(self, pid: int, k: int, g) -> int:
        key = (pid, k)
        nxt = self.memo.get(key)
        if nxt is None:
            nxt = self.intern(act_on_phase_point(g, self.points[pid]))
            self.memo[key] = nxt
        return nxt

    def measure(self, pid: int, k: int, a: Vector):
        """(fixed outcome, next id) or (None, next ids per outcome)."""
        key = (pid, k)
        out = self.memo.get(key)
        if out is None:
            p = self.points[pid]
            d = p.space.d
            if a in p.cnc:
                val, q = measure_update_single(p, a)
                out = (val, self.intern(q))
            else:
                out = (None, tuple(self.intern(measure_update_single(p, a, s)[1]) for s in range(d)))
            self.memo[key] = out
        return out


def _validate_weights(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if (w < -WEIGHT_TOL).any():
        raise NegativeWeightError(f"negative weight {w.min():.3g}; sampling needs a nonnegative ensemble")
    if abs(w.sum() - 1) > WEIGHT_TOL:
        raise NegativeWeightError(f"weights sum to {w.sum():.12g}, not 1")
    w = np.clip(w, 0, None)
    return np.cumsum(w / w.sum())


def _uniforms(seed: int, block: int, cols: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.default_rng(ss).random((BLOCK, cols))


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("CNC_THREADS", "1") or 1)
    return max(1, threads)


def _run_blocks(shots: int, worker, threads: int | None) -> list:
    nblocks = -(-shots // BLOCK)
    tasks = [(b, min(BLOCK, shots - b * BLOCK)) for b in range(nblocks)]
    nthreads = _threads(threads)
    if nthreads == 1 or nblocks == 1:
        parts = [worker(b, cnt) for b, cnt in tasks]
    else:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(lambda t: worker(*t), tasks))
    return [rec for part in parts for rec in part]


def run_cnc(ensemble: Sequence[tuple[PhasePoint, float]], circuit: Circuit, seed: int,
            shots: int, threads: int | None = None, keep_final: bool = True) -> list[ShotRecord]:
    """Sample outcomes by walking phase points through the circuit."""
    if not ensemble:
        raise ValueError("empty ensemble")
    for p, _ in ensemble:
        if p.space != circuit.space:
            raise ValueError("ensemble and circuit live on different spaces")
    cdf = _validate_weights([w for _, w in ensemble])
    trans = _Transitions(circuit)
    start_ids = [trans.intern(p) for p, _ in ensemble]
    d = circuit.space.d
    cols = 1 + circuit.num_measurements
    instrs = circuit.instructions

    def worker(block: int, count: int) -> list[ShotRecord]:
        u = _uniforms(seed, block, cols)
        picks = np.minimum(np.searchsorted(cdf, u[:count, 0], side="right"), len(cdf) - 1)
        outs = (u[:count, 1:] * d).astype(np.int64)
        recs = []
        for i in range(count):
            pid = start_ids[picks[i]]
            res: dict[str, int] = {}
            m = 0
            for k, ins in enumerate(instrs):
                if isinstance(ins, MeasureOp):
                    val, nxt = trans.measure(pid, k, ins.a)
                    if val is None:
                        val = int(outs[i, m])
                        pid = nxt[val]
                    else:
                        pid = nxt
                    res[ins.var] = val
                    m += 1
                elif isinstance(ins, CondGateOp):
                    if ins.fires(res, d):
                        pid = trans.gate(pid, k, ins.element)
                else:
                    pid = trans.gate(pid, k, ins.element)
            recs.append(ShotRecord(res, trans.points[pid] if keep_final else None))
        return recs

    return _run_blocks(shots, worker, threads)


def label_index(space: SymplecticSpace, u: Sequence[int]) -> int:
    """Position of u in lexicographic order of E."""
    idx = 0
    for x in u:
        idx = idx * space.d + int(x) % space.d
    return idx


def index_label(space: SymplecticSpace, idx: int) -> Vector:
    out = []
    for _ in range(space.dim):
        idx, r = divmod(idx, space.d)
        out.append(r)
    return tuple(reversed(out))


def gamma_set(space: SymplecticSpace, a: Sequence[int], u: Sequence[int]) -> list[Vector]:
    """u + <a>, the resampling set after measuring T_a at Wigner label u."""
    return sorted({space.add(u, space.scale(t, a)) for t in range(space.d)})


def run_wigner(distribution: np.ndarray | Mapping[Vector, float], circuit: Circuit, seed: int,
               shots: int, threads: int | None = None) -> list[ShotRecord]:
    """Sample outcomes by walking Wigner labels through the circuit."""
    sp = circuit.space
    d = sp.d
    if isinstance(distribution, Mapping):
        probs = np.zeros(sp.size)
        for u, w in distribution.items():
            probs[label_index(sp, sp.vector(u))] += w
    else:
        probs = np.asarray(distribution, dtype=float)
        if probs.shape != (sp.size,):
            raise ValueError(f"need {sp.size} Wigner values, got shape {probs.shape}")
    cdf = _validate_weights(probs)
    cols = 1 + circuit.num_measurements
    instrs = circuit.instructions
    mats = {k: (ins.element.matrix, np.asarray(ins.element.b, dtype=np.int64))
            for k, ins in enumerate(instrs) if not isinstance(ins, MeasureOp)}
    jmat = sp.form

    def worker(block: int, count: int) -> list[ShotRecord]:
        uni = _uniforms(seed, block, cols)
        picks = np.minimum(np.searchsorted(cdf, uni[:count, 0], side="right"), len(cdf) - 1)
        ts = (uni[:count, 1:] * d).astype(np.int64)
        recs = []
        for i in range(count):
            u = np.asarray(index_label(sp, int(picks[i])), dtype=np.int64)
            res: dict[str, int] = {}
            m = 0
            for k, ins in enumerate(instrs):
                if isinstance(ins, MeasureOp):
                    a = np.asarray(ins.a, dtype=np.int64)
                    res[ins.var] = int(a @ jmat @ u) % d
                    u = (u + ts[i, m] * a) % d
                    m += 1
                elif isinstance(ins, CondGateOp) and not ins.fires(res, d):
                    continue
                else:
                    s, b = mats[k]
                    u = (s @ u + b) % d
            recs.append(ShotRecord(res, tuple(int(x) for x in u)))
        return recs

    return _run_blocks(shots, worker, threads)


def empirical_distribution(records: Sequence[ShotRecord], variables: Sequence[str]) -> dict[tuple, float]:
    counts: dict[tuple, int] = {}
    for r in records:
        key = tuple(r.outcomes[v] for v in variables)
        counts[key] = counts.get(key, 0) + 1
    total = len(records)
    return {k: c / total for k, c in counts.items()}
