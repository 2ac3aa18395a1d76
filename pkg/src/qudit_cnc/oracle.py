"""Exact dense-matrix reference: Born-rule branching over whole circuits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit, CondGateOp, MeasureOp
from .field import CapExceeded, SymplecticSpace
from .pauli import ATOL, OutcomeAssignment, check_dense, projector

BRANCH_CAP = 729


class ZeroProbabilityBranch(ValueError):
    pass


@dataclass(frozen=True)
class DensityState:
    space: SymplecticSpace
    matrix: np.ndarray

    def __post_init__(self):
        dim = check_dense(self.space)
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (dim, dim):
            raise ValueError(f"state must be {dim}x{dim}, got {m.shape}")
        if not np.allclose(m, m.conj().T, atol=ATOL):
            raise ValueError("state is not Hermitian")
        if abs(np.trace(m) - 1) > ATOL:
            raise ValueError(f"state has trace {np.trace(m).real:.12g}, not 1")
        if np.linalg.eigvalsh(m).min() < -ATOL:
            raise ValueError("state is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def as_matrix(rho) -> np.ndarray:
    """Dense matrix of a DensityState or of a raw unit-trace Hermitian operator."""
    return np.asarray(rho.matrix if isinstance(rho, DensityState) else rho, dtype=complex)


def pure_state(space: SymplecticSpace, vec: Sequence[complex]) -> DensityState:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityState(space, np.outer(v, v.conj()))


def named_state(space: SymplecticSpace, name: str) -> DensityState:
    """stabilizer-zero (|0..0>), maximally-mixed, or strange ((|1>-|2>)/sqrt2 per qudit, d=3)."""
    dim = check_dense(space)
    if name == "stabilizer-zero":
        v = np.zeros(dim, dtype=complex)
        v[0] = 1
        return pure_state(space, v)
    if name == "maximally-mixed":
        return DensityState(space, np.eye(dim, dtype=complex) / dim)
    if name == "strange":
        one = np.zeros(space.d, dtype=complex)
        one[1], one[2] = 1, -1
        v = np.ones(1, dtype=complex)
        for _ in range(space.n):
            v = np.kron(v, one)
        return pure_state(space, v)
    raise ValueError(f"unknown named state {name!r}")


def measurement_projector(space: SymplecticSpace, a: Sequence[int], s: int) -> np.ndarray:
    """Projector onto the omega^s eigenspace of T_a."""
    r = OutcomeAssignment.from_vectors(space, [a], [s])
    return projector(r)


def evolve(rho: DensityState | np.ndarray, circuit: Circuit, outcomes: Mapping[str, int] | Sequence[int],
           normalize: bool = True) -> tuple[float, np.ndarray]:
    """Joint Born probability of one outcome branch and the post-circuit state."""
    sp = circuit.space
    d = sp.d
    if not isinstance(outcomes, Mapping):
        outcomes = dict(zip(circuit.measure_vars, outcomes))
    m = np.array(as_matrix(rho))
    bound: dict[str, int] = {}
    for ins in circuit.instructions:
        if isinstance(ins, MeasureOp):
            s = int(outcomes[ins.var]) % d
            proj = measurement_projector(sp, ins.a, s)
            m = proj @ m @ proj
            bound[ins.var] = s
        elif isinstance(ins, CondGateOp) and not ins.fires(bound, d):
            continue
        else:
            u = ins.element.unitary()
            m = u @ m @ u.conj().T
    prob = float(np.trace(m).real)
    if normalize:
        if prob < ATOL:
            raise ZeroProbabilityBranch("branch has probability zero; cannot normalize")
        m = m / prob
    return prob, m


def joint_distribution(rho: DensityState | np.ndarray, circuit: Circuit, branch_cap: int = BRANCH_CAP,
                       cutoff: float = 1e-14) -> dict[tuple[int, ...], float]:
    """Exact outcome distribution, keyed by outcomes in measurement order.

    ``rho`` may also be a non-positive unit-trace operator such as a
    nonnegative mixture of phase-point operators; its branch weights are
    still the Born-rule traces.
    """
    sp = circuit.space
    d = sp.d
    if d ** circuit.num_measurements > branch_cap:
        raise CapExceeded(f"{d}^{circuit.num_measurements} branches exceed cap {branch_cap}")
    unitaries = {}
    projs = {}
    for k, ins in enumerate(circuit.instructions):
        if isinstance(ins, MeasureOp):
            projs[k] = [measurement_projector(sp, ins.a, s) for s in range(d)]
        else:
            unitaries[k] = ins.element.unitary()
    out: dict[tuple[int, ...], float] = {}

    def walk(k: int, m: np.ndarray, bound: dict[str, int], key: tuple[int, ...]):
        while k < len(circuit.instructions):
            ins = circuit.instructions[k]
            if isinstance(ins, MeasureOp):
                for s in range(d):
                    p = projs[k][s]
                    mm = p @ m @ p
                    if np.trace(mm).real > cutoff:
                        walk(k + 1, mm, {**bound, ins.var: s}, key + (s,))
                return
            if not (isinstance(ins, CondGateOp) and not ins.fires(bound, d)):
                u = unitaries[k]
                m = u @ m @ u.conj().T
            k += 1
        out[key] = out.get(key, 0.0) + float(np.trace(m).real)

    walk(0, as_matrix(rho), {}, ())
    return out


def tv_distance(p: Mapping, q: Mapping, strict: bool = False) -> float:
    """Half the L1 distance; missing keys count as probability zero.

    With ``strict`` the two supports must use the same outcome space
    (keys of equal length), otherwise a KeyError is raised.
    """
    keys = set(p) | set(q)
    if strict and len({len(k) if isinstance(k, tuple) else 1 for k in keys}) > 1:
        raise KeyError("distributions are over different outcome spaces")
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
