"""JSON interchange: schema validation, loaders and deterministic writers."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .circuit import Circuit, circuit_from_json
from .cnc import PhasePoint, point_from_json, point_to_json
from .field import SymplecticSpace
from .oracle import DensityState, named_state
from .pauli import dense_from_json

FORMAT = "cnc/1"


class SchemaError(ValueError):
    """Input does not match its schema; message carries a JSON pointer."""

    def __init__(self, path: str | Path | None, pointer: str, message: str):
        where = f"{path}: " if path else ""
        super().__init__(f"{where}{pointer or '/'}: {message}")
        self.path = path
        self.pointer = pointer


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    text = resources.files(__package__).joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(data: Any, name: str, path: str | Path | None = None) -> None:
    validator = jsonschema.Draft202012Validator(schema(name))
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise SchemaError(path, pointer if err.absolute_path else "", err.message)


def read_json(path: str | Path, name: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise FileNotFoundError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(path, "", f"invalid JSON ({exc})") from exc
    validate(data, name, path)
    return data


def dumps(data: Any) -> str:
    """Canonical serialization: sorted keys, fixed separators."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def write_json(path: str | Path, data: Any, name: str | None = None) -> None:
    if name:
        validate(data, name, path)
    Path(path).write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")


def load_circuit(path: str | Path) -> Circuit:
    return circuit_from_json(read_json(path, "circuit"))


def load_ensemble(data: dict) -> tuple[str, list]:
    """("points", [(PhasePoint, weight)]) or ("wigner", [(u, weight)])."""
    space = SymplecticSpace(int(data["n"]), int(data["d"]))
    if "points" in data:
        out = []
        for rec in data["points"]:
            rec = {**rec, "d": space.d, "n": space.n}
            out.append((point_from_json(rec), float(rec["weight"])))
        return "points", out
    return "wigner", [(space.vector(r["u"]), float(r["weight"])) for r in data["wigner"]]


def ensemble_to_json(space: SymplecticSpace, items: list[tuple[PhasePoint, float]]) -> dict:
    points = []
    for p, w in items:
        rec = point_to_json(p)
        del rec["d"], rec["n"]
        rec["weight"] = float(w)
        points.append(rec)
    return {"format": FORMAT, "d": space.d, "n": space.n, "points": points}


def load_state(data: dict, require_psd: bool = True) -> tuple[SymplecticSpace, np.ndarray]:
    space = SymplecticSpace(int(data["n"]), int(data["d"]))
    if "state" in data:
        return space, np.array(named_state(space, data["state"]).matrix)
    m = dense_from_json(data.get("rho", data.get("operator")))
    if require_psd and "rho" in data:
        m = np.array(DensityState(space, m).matrix)
    return space, m


def load_dictionary(data: dict) -> list[PhasePoint]:
    return [point_from_json({**rec, "d": data["d"], "n": data["n"]}) for rec in data["points"]]
