"""Command-line entry point: simulate, decompose, enumerate, lambda, verify.

Exit codes: 0 success, 2 validation error, 3 cap exceeded, 4 verification
failure.  Every JSON report carries ``"format": "cnc/1"`` and the caps in
force.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .analysis import (
    DictionarySpanError,
    cnc_decompose,
    default_dictionary,
    lambda_membership,
    maximal_isotropic_subspaces,
    wigner_dictionary,
    wigner_function,
)
from .circuit import Circuit
from .cnc import enumerate_phase_points, phase_point_operator, point_to_json, wigner_point
from .field import CapExceeded, SymplecticSpace, is_prime
from .oracle import BRANCH_CAP, joint_distribution, tv_distance
from .pauli import DENSE_CAP
from .simulate import NegativeWeightError, empirical_distribution, run_cnc, run_wigner

EXIT_OK, EXIT_VALIDATION, EXIT_CAP, EXIT_VERIFY = 0, 2, 3, 4
COMMANDS = ("simulate", "decompose", "enumerate", "lambda", "verify")
TV_THRESHOLD = 0.02


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    d: int | None = None
    n: int | None = None
    circuit: str | None = None
    input: str | None = None
    state: str | None = None
    operator: str | None = None
    dictionary: str = "full"
    mode: str = "feasibility"
    exact: bool = False
    algorithm: str = "cnc"
    shots: int = 1000
    seed: int | None = None
    out: str | None = None
    output_format: str = "json"
    verify: bool = False
    tv_threshold: float = TV_THRESHOLD
    record_final: bool = False
    caps: dict = field(default_factory=dict)
    start: int = 0
    points: str | None = None


def _odd_prime(text: str) -> int:
    try:
        d = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if d == 2 or not is_prime(d):
        raise argparse.ArgumentTypeError(f"d must be an odd prime, got {d}")
    return d


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _nonnegative(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qudit-cnc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--d", type=_odd_prime, help="qudit dimension (odd prime)")
        p.add_argument("--n", type=_positive, help="number of qudits")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--dense-cap", type=_positive, default=DENSE_CAP, help="largest d^n for dense operators")

    p = sub.add_parser("simulate", help="sample measurement outcomes")
    common(p)
    p.add_argument("--circuit", required=True)
    p.add_argument("--input", required=True, help="ensemble or state file")
    p.add_argument("--shots", type=_positive, default=1000)
    p.add_argument("--seed", type=_nonnegative, required=True)
    p.add_argument("--algorithm", choices=("cnc", "wigner"), default="cnc")
    p.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
    p.add_argument("--verify", action="store_true", help="compare against the exact distribution")
    p.add_argument("--tv-threshold", type=float, default=TV_THRESHOLD)
    p.add_argument("--record-final", action="store_true", help="store final phase points per shot")
    p.add_argument("--branch-cap", type=_positive, default=BRANCH_CAP)
    p.add_argument("--max-points", type=_positive, default=5000, help="dictionary cap for state inputs")

    p = sub.add_parser("decompose", help="expand a state over phase-point operators")
    common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--dictionary", default="full", help="full | wigner | PATH")
    p.add_argument("--mode", choices=("feasibility", "min-negativity"), default="feasibility")
    p.add_argument("--exact", action="store_true", help="rational arithmetic (d = 3)")
    p.add_argument("--max-points", type=_positive, default=5000)
    p.add_argument("--max-xi", type=_positive)

    p = sub.add_parser("enumerate", help="count (and optionally list) phase points")
    common(p)
    p.add_argument("--max-xi", type=_positive)
    p.add_argument("--max-points", type=_positive)
    p.add_argument("--start", type=_nonnegative, default=0, help="resume index")
    p.add_argument("--points", help="also write points as JSON lines")

    p = sub.add_parser("lambda", help="Lambda-polytope membership of an operator")
    common(p)
    p.add_argument("--operator", required=True)

    p = sub.add_parser("verify", help="simulator vs exact oracle on a circuit")
    common(p)
    p.add_argument("--circuit", help="circuit file (default: bundled example)")
    p.add_argument("--input", help="ensemble file (default: bundled example)")
    p.add_argument("--shots", type=_positive, default=100_000)
    p.add_argument("--seed", type=_nonnegative, default=2024)
    p.add_argument("--tv-threshold", type=float, default=TV_THRESHOLD)
    p.add_argument("--branch-cap", type=_positive, default=BRANCH_CAP)
    return parser


def parse_and_validate(argv: Sequence[str]) -> RunConfig:
    """Parse argv into a RunConfig; usage errors exit with status 2."""
    ns = build_parser().parse_args(list(argv))
    args = vars(ns)
    caps = {"dense": args.pop("dense_cap")}
    for key in ("branch_cap", "max_points", "max_xi"):
        if key in args:
            caps[key.replace("_cap", "")] = args.pop(key)
    if ns.command == "enumerate":
        args.setdefault("n", None)
        args["n"] = args["n"] or 1
        args["d"] = args["d"] or 3
        caps.setdefault("max_xi", None)
        if caps["max_xi"] is None:
            caps["max_xi"] = 2 * args["n"] * args["d"]
    cfg = RunConfig(command=args.pop("command"), caps=caps)
    for key, val in args.items():
        setattr(cfg, key, val)
    return cfg


def _check_space(cfg: RunConfig, space: SymplecticSpace) -> None:
    if cfg.d is not None and cfg.d != space.d:
        raise ValidationError(f"--d {cfg.d} does not match the input (d = {space.d})")
    if cfg.n is not None and cfg.n != space.n:
        raise ValidationError(f"--n {cfg.n} does not match the input (n = {space.n})")


def _check_dense(cfg: RunConfig, space: SymplecticSpace) -> None:
    if space.d**space.n > cfg.caps["dense"]:
        raise CapExceeded(f"d^n = {space.d ** space.n} exceeds dense cap {cfg.caps['dense']}")


def _report(cfg: RunConfig, space: SymplecticSpace | None, **body) -> dict:
    rep = {"format": io.FORMAT, "command": cfg.command, "caps": cfg.caps}
    if space is not None:
        rep.update(d=space.d, n=space.n)
    rep.update(body)
    io.validate(rep, "report")
    return rep


def _emit(cfg: RunConfig, rep: dict) -> None:
    text = json.dumps(rep, sort_keys=True, indent=2) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _bundled(name: str) -> str:
    return str(resources.files(__package__).joinpath("data", name))


def _ensemble_operator(space: SymplecticSpace, kind: str, items: list) -> np.ndarray:
    if kind == "points":
        return sum(w * phase_point_operator(p) for p, w in items)
    return sum(w * wigner_point(space, u).operator() for u, w in items)


def _load_input(cfg: RunConfig, circuit: Circuit):
    """(space, kind, items, operator or None) from an ensemble or state file."""
    data = json.loads(Path(cfg.input).read_text())
    space = circuit.space
    if "points" in data or "wigner" in data:
        io.validate(data, "ensemble", cfg.input)
        kind, items = io.load_ensemble(data)
        in_space = SymplecticSpace(int(data["n"]), int(data["d"]))
        if in_space != space:
            raise ValidationError(f"{cfg.input}: ensemble space does not match the circuit")
        return kind, items, None
    io.validate(data, "state", cfg.input)
    in_space, rho = io.load_state(data)
    if in_space != space:
        raise ValidationError(f"{cfg.input}: state space does not match the circuit")
    _check_dense(cfg, space)
    if cfg.algorithm == "wigner":
        w = wigner_function(rho, space)
        return "wigner", [(u, v) for u, v in w.items()], rho
    dictionary = default_dictionary(space, max_points=cfg.caps.get("max_points") or 5000)
    dec = cnc_decompose(rho, dictionary)
    if not dec.feasible:
        raise ValidationError(f"{cfg.input}: no nonnegative representation over the dictionary")
    items = [(dictionary[i], c) for i, c in dec.sparse().items()]
    total = sum(c for _, c in items)
    return "points", [(p, c / total) for p, c in items], rho


def _run(cfg: RunConfig, circuit: Circuit, kind: str, items: list, seed: int, shots: int,
         algorithm: str):
    space = circuit.space
    if algorithm == "cnc":
        ens = items if kind == "points" else [(wigner_point(space, u), w) for u, w in items]
        return run_cnc(ens, circuit, seed, shots)
    if kind == "wigner":
        dist = {}
        for u, w in items:
            dist[u] = dist.get(u, 0.0) + w
        return run_wigner(dist, circuit, seed, shots)
    _check_dense(cfg, space)
    w = wigner_function(_ensemble_operator(space, kind, items), space)
    return run_wigner(w, circuit, seed, shots)


def _marginals(records, variables) -> dict:
    out = {}
    for v in variables:
        c = Counter(r.outcomes[v] for r in records)
        out[v] = {str(k): c[k] / len(records) for k in sorted(c)}
    return out


def cmd_simulate(cfg: RunConfig) -> int:
    circuit = io.load_circuit(cfg.circuit)
    _check_space(cfg, circuit.space)
    kind, items, rho = _load_input(cfg, circuit)
    records = _run(cfg, circuit, kind, items, cfg.seed, cfg.shots, cfg.algorithm)
    variables = circuit.measure_vars
    summary = dict(shots=cfg.shots, seed=cfg.seed, algorithm=cfg.algorithm,
                   marginals=_marginals(records, variables))
    status = EXIT_OK
    if cfg.verify:
        _check_dense(cfg, circuit.space)
        op = rho if rho is not None else _ensemble_operator(circuit.space, kind, items)
        exact = joint_distribution(op, circuit, branch_cap=cfg.caps["branch"])
        tv = tv_distance(empirical_distribution(records, variables), exact)
        summary.update(tv=tv, tv_threshold=cfg.tv_threshold, passed=tv <= cfg.tv_threshold)
        if tv > cfg.tv_threshold:
            status = EXIT_VERIFY
    rep = _report(cfg, circuit.space, **summary)
    lines = []
    if cfg.output_format == "csv":
        lines.append(",".join(["shot", *variables]))
        for i, r in enumerate(records):
            lines.append(",".join([str(i)] + [str(r.outcomes[v]) for v in variables]))
    else:
        for i, r in enumerate(records):
            rec = {"shot": i, "outcomes": r.outcomes}
            if cfg.record_final:
                rec["final"] = point_to_json(r.final) if cfg.algorithm == "cnc" else list(r.final)
            lines.append(io.dumps(rec))
        lines.append(io.dumps({"summary": rep}))
    text = "\n".join(lines) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
        if cfg.output_format == "csv":
            Path(cfg.out + ".summary.json").write_text(json.dumps(rep, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(text)
    return status


def cmd_decompose(cfg: RunConfig) -> int:
    data = io.read_json(cfg.state, "state")
    space, rho = io.load_state(data)
    _check_space(cfg, space)
    _check_dense(cfg, space)
    if cfg.dictionary == "wigner":
        dictionary = wigner_dictionary(space)
    elif cfg.dictionary == "full":
        dictionary = default_dictionary(space, max_points=cfg.caps["max_points"], max_xi=cfg.caps.get("max_xi"))
    else:
        dictionary = io.load_dictionary(io.read_json(cfg.dictionary, "dictionary"))
        if dictionary[0].space != space:
            raise ValidationError(f"{cfg.dictionary}: dictionary space does not match the state")
    if cfg.exact and space.d != 3:
        raise ValidationError("--exact is implemented for d = 3 only")
    dec = cnc_decompose(rho, dictionary, mode=cfg.mode, exact=cfg.exact)
    coeffs = [{"index": i, "coefficient": c, "point": point_to_json(dictionary[i])}
              for i, c in sorted(dec.sparse().items())]
    cert = None if dec.certificate is None else [float(y) for y in dec.certificate]
    rep = _report(cfg, space, feasible=dec.feasible, objective=dec.objective, coefficients=coeffs,
                  certificate=cert, exact=cfg.exact, mode=cfg.mode, dictionary_size=len(dictionary),
                  status=dec.status, residual=dec.residual)
    _emit(cfg, rep)
    return EXIT_OK


def cmd_enumerate(cfg: RunConfig) -> int:
    space = SymplecticSpace(cfg.n, cfg.d)
    counts: Counter = Counter()
    count = 0
    complete = True
    resume = None
    sink = open(cfg.points, "w") if getattr(cfg, "points", None) else None
    try:
        for p in enumerate_phase_points(space, max_xi=cfg.caps["max_xi"], max_points=cfg.caps.get("max_points"),
                                        start=cfg.start):
            counts[f"{p.cnc.form}/dimI={p.cnc.core.dim}/xi={p.cnc.xi}"] += 1
            count += 1
            if sink:
                sink.write(io.dumps(point_to_json(p)) + "\n")
    except CapExceeded as exc:
        complete = False
        resume = getattr(exc, "resume_from", None)
    finally:
        if sink:
            sink.close()
    rep = _report(cfg, space, count=count, complete=complete, resume_from=resume, start=cfg.start,
                  by_type=dict(sorted(counts.items())))
    _emit(cfg, rep)
    return EXIT_OK if complete else EXIT_CAP


def cmd_lambda(cfg: RunConfig) -> int:
    data = io.read_json(cfg.operator, "state")
    space, op = io.load_state(data, require_psd=False)
    _check_space(cfg, space)
    _check_dense(cfg, space)
    res = lambda_membership(op, space)
    viol = None
    if res.violating_index is not None:
        subs = maximal_isotropic_subspaces(space)
        sub = subs[res.violating_index // space.d**space.n]
        vals = np.unravel_index(res.violating_index % space.d**space.n, (space.d,) * space.n)
        viol = {"I": sub.to_json(), "r": [int(v) for v in vals]}
    rep = _report(cfg, space, member=res.member, min_overlap=res.min_overlap, violating_stabilizer=viol)
    _emit(cfg, rep)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    circuit_path = cfg.circuit or _bundled("example_circuit.json")
    input_path = cfg.input or _bundled("example_ensemble.json")
    circuit = io.load_circuit(circuit_path)
    _check_space(cfg, circuit.space)
    _check_dense(cfg, circuit.space)
    cfg.input = input_path
    kind, items, rho = _load_input(cfg, circuit)
    op = rho if rho is not None else _ensemble_operator(circuit.space, kind, items)
    exact = joint_distribution(op, circuit, branch_cap=cfg.caps["branch"])
    variables = circuit.measure_vars
    checks = []
    algorithms = ["cnc"]
    w = wigner_function(op, circuit.space)
    if min(w.values()) >= -1e-9:
        algorithms.append("wigner")
    for alg in algorithms:
        recs = _run(cfg, circuit, kind, items, cfg.seed, cfg.shots, alg)
        tv = tv_distance(empirical_distribution(recs, variables), exact)
        checks.append({"name": f"{alg}-vs-oracle", "tv": tv, "threshold": cfg.tv_threshold,
                       "passed": tv <= cfg.tv_threshold})
    total = sum(exact.values())
    checks.append({"name": "oracle-normalized", "total": total, "passed": abs(total - 1) <= 1e-9})
    passed = all(c["passed"] for c in checks)
    rep = _report(cfg, circuit.space, passed=passed, checks=checks, shots=cfg.shots, seed=cfg.seed,
                  circuit=str(circuit_path), input=str(input_path),
                  wigner_nonnegative="wigner" in algorithms)
    _emit(cfg, rep)
    return EXIT_OK if passed else EXIT_VERIFY


HANDLERS = {"simulate": cmd_simulate, "decompose": cmd_decompose, "enumerate": cmd_enumerate,
            "lambda": cmd_lambda, "verify": cmd_verify}


def execute(cfg: RunConfig) -> int:
    try:
        return HANDLERS[cfg.command](cfg)
    except CapExceeded as exc:
        print(f"error: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (io.SchemaError, ValidationError, NegativeWeightError, DictionarySpanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main(argv: Sequence[str] | None = None) -> int:
    cfg = parse_and_validate(sys.argv[1:] if argv is None else argv)
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
