"""Adaptive Clifford circuits with Pauli measurements."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .clifford import CliffordElement, gate
from .field import SymplecticSpace, Vector


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class GateOp:
    element: CliffordElement
    record: Mapping = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class MeasureOp:
    a: Vector
    var: str


@dataclass(frozen=True)
class CondGateOp:
    """Apply ``element`` iff sum_v coef_v * m_v + const == 0 mod d."""

    element: CliffordElement
    coefficients: tuple[tuple[str, int], ...]
    const: int = 0
    record: Mapping = field(default_factory=dict, compare=False, hash=False)

    def fires(self, outcomes: Mapping[str, int], d: int) -> bool:
        total = self.const
        for var, coef in self.coefficients:
            if var not in outcomes:
                raise CircuitError(f"condition uses unbound variable {var!r}")
            total += coef * outcomes[var]
        return total % d == 0


Instruction = Union[GateOp, MeasureOp, CondGateOp]


@dataclass(frozen=True)
class Circuit:
    space: SymplecticSpace
    instructions: tuple[Instruction, ...] = ()

    def __post_init__(self):
        bound: set[str] = set()
        for ins in self.instructions:
            if isinstance(ins, MeasureOp):
                self.space.check(ins.a)
                if not any(x % self.space.d for x in ins.a):
                    raise CircuitError("measurement label must be nonzero")
                if ins.var in bound:
                    raise CircuitError(f"variable {ins.var!r} bound twice")
                bound.add(ins.var)
            elif isinstance(ins, CondGateOp):
                for var, _ in ins.coefficients:
                    if var not in bound:
                        raise CircuitError(f"condition uses unbound variable {var!r}")
                if ins.element.space != self.space:
                    raise CircuitError("gate acts on a different space")
            elif isinstance(ins, GateOp):
                if ins.element.space != self.space:
                    raise CircuitError("gate acts on a different space")
            else:
                raise CircuitError(f"unknown instruction {ins!r}")

    @property
    def measure_vars(self) -> tuple[str, ...]:
        return tuple(i.var for i in self.instructions if isinstance(i, MeasureOp))

    @property
    def num_measurements(self) -> int:
        return len(self.measure_vars)


def gate_from_record(space: SymplecticSpace, rec: Mapping) -> CliffordElement:
    if "S" in rec:
        return CliffordElement.from_data(space, rec["S"], rec.get("b"))
    return gate(space, rec["name"], rec.get("qudits", []), int(rec.get("param", 1)))


def circuit_from_json(data: Mapping) -> Circuit:
    space = SymplecticSpace(int(data["n"]), int(data["d"]))
    out: list[Instruction] = []
    for rec in data.get("instructions", []):
        op = rec.get("op")
        if op == "gate":
            out.append(GateOp(gate_from_record(space, rec), rec))
        elif op == "measure":
            out.append(MeasureOp(space.vector(rec["a"]), str(rec["var"])))
        elif op == "cond-gate":
            cond = rec["if"]
            coefs = tuple((str(k), int(v)) for k, v in cond.get("vars", {}).items())
            out.append(CondGateOp(gate_from_record(space, rec["gate"]), coefs,
                                  int(cond.get("const", 0)), rec))
        else:
            raise CircuitError(f"unknown op {op!r}")
    return Circuit(space, tuple(out))


def _gate_record(ins: GateOp | CondGateOp) -> dict:
    if ins.record:
        rec = dict(ins.record.get("gate", ins.record)) if isinstance(ins, CondGateOp) else dict(ins.record)
        rec.setdefault("op", "gate")
        return rec
    return {"op": "gate", "S": [list(r) for r in ins.element.S], "b": list(ins.element.b)}


def circuit_to_json(c: Circuit) -> dict:
    instrs = []
    for ins in c.instructions:
        if isinstance(ins, MeasureOp):
            instrs.append({"op": "measure", "a": list(ins.a), "var": ins.var})
        elif isinstance(ins, CondGateOp):
            instrs.append({
                "op": "cond-gate",
                "if": {"vars": dict(ins.coefficients), "const": ins.const},
                "gate": _gate_record(ins),
            })
        else:
            instrs.append(_gate_record(ins))
    return {"format": "cnc/1", "d": c.space.d, "n": c.space.n, "instructions": instrs}


def make_circuit(space: SymplecticSpace, ops: Sequence[Instruction]) -> Circuit:
    return Circuit(space, tuple(ops))


def random_circuit(space: SymplecticSpace, rng, length: int = 6, max_measurements: int = 4,
                   adaptive: bool = True) -> Circuit:
    """Random gates, measurements and (optionally) feed-forward gates."""
    from .clifford import GATE_NAMES

    d = space.d
    ops: list[Instruction] = []
    nmeas = 0

    def random_gate() -> tuple[CliffordElement, dict]:
        name = GATE_NAMES[rng.integers(len(GATE_NAMES))]
        if name == "SUM" and space.n < 2:
            name = "F"
        if name == "SUM":
            qs = [int(x) for x in rng.choice(space.n, size=2, replace=False)]
        else:
            qs = [int(rng.integers(space.n))]
        param = int(rng.integers(1, d))
        rec = {"op": "gate", "name": name, "qudits": qs, "param": param}
        return gate(space, name, qs, param), rec

    for _ in range(length):
        vars_ = [ins.var for ins in ops if isinstance(ins, MeasureOp)]
        kind = rng.random()
        if nmeas < max_measurements and kind < 0.5:
            a = tuple(int(x) for x in rng.integers(0, d, space.dim))
            while not any(a):
                a = tuple(int(x) for x in rng.integers(0, d, space.dim))
            ops.append(MeasureOp(a, f"m{nmeas}"))
            nmeas += 1
        elif adaptive and vars_ and kind < 0.75:
            g, rec = random_gate()
            var = vars_[rng.integers(len(vars_))]
            coef = int(rng.integers(1, d))
            const = int(rng.integers(d))
            cond = {"vars": {var: coef}, "const": const}
            ops.append(CondGateOp(g, ((var, coef),), const, {"op": "cond-gate", "if": cond, "gate": rec}))
        else:
            g, rec = random_gate()
            ops.append(GateOp(g, rec))
    return Circuit(space, tuple(ops))
