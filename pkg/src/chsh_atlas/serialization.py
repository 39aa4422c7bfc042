"""JSON interchange for graphs, beliefs, models and verdicts.

Input numbers are parsed as :class:`decimal.Decimal` and turned into exact
fractions, so a belief file written with decimals is read without rounding.
Output floats are rounded to 12 significant digits and keys are sorted,
which makes identical runs byte-identical.
"""

from __future__ import annotations

import json
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .beliefs import PAIR_KEYS, BeliefCollection
from .errors import ChshAtlasError, MalformedInput
from .factor_graphs import JointPmf, Snfg, build_cycle_graph, build_markov_chain, build_single_node
from .quantum import QnfgModel

DIGITS = 12
MODEL_REPAIR_TOL = 1e-8


def load_document(source) -> Any:
    """Parse JSON from a path or a string, keeping decimals exact."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(("{", "["))):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise MalformedInput(f"cannot read {source}: {exc}") from exc
    else:
        text = source
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc}") from exc


def _exact(v) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (int, Decimal, float, Fraction, str)):
        raise MalformedInput(f"expected a number, got {v!r}")
    try:
        return Fraction(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"bad number {v!r}") from exc


def _exact_array(v, shape) -> np.ndarray:
    arr = np.array(v, dtype=object)
    if arr.shape != shape:
        raise MalformedInput(f"expected an array of shape {shape}, got {arr.shape}")
    return np.vectorize(_exact, otypes=[object])(arr)


def round_sig(x: float, digits: int = DIGITS) -> float:
    x = float(x)
    if x == 0 or not np.isfinite(x):
        return 0.0 if x == 0 else x
    return float(f"{x:.{digits}g}")


def to_jsonable(obj, digits: int | None = DIGITS):
    """Recursively convert numpy/Fraction-bearing structures to plain JSON."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist(), digits)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating, Decimal)):
        return round_sig(obj, digits) if digits else float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real, digits), to_jsonable(obj.imag, digits)]
    return obj


def dumps(obj, digits: int | None = DIGITS) -> str:
    return json.dumps(to_jsonable(obj, digits), sort_keys=True, indent=2)


# -- beliefs -------------------------------------------------------------------

def _decimal_value(v: Fraction, digits: int | None):
    """Number for a belief entry: exact when it has a short decimal expansion."""
    f = float(v)
    if Fraction(f) == v or digits is None:
        return f if digits is None else round_sig(f, digits)
    return round_sig(f, digits)


def beliefs_to_dict(b: BeliefCollection, digits: int | None = DIGITS) -> dict:
    def num(v):
        if isinstance(v, Fraction):
            return _decimal_value(v, digits)
        return round_sig(v, digits) if digits else float(v)

    return {
        "pairs": {k: [[num(v) for v in row] for row in b.pairs[i]] for i, k in enumerate(PAIR_KEYS)},
        "singles": {str(i + 1): [num(v) for v in b.singles[i]] for i in range(4)},
    }


def beliefs_from_dict(d) -> BeliefCollection:
    try:
        pairs = d["pairs"]
        if set(pairs) != set(PAIR_KEYS):
            raise MalformedInput(f"pairs must have keys {list(PAIR_KEYS)}, got {sorted(pairs)}")
        p = [_exact_array(pairs[k], (2, 2)) for k in PAIR_KEYS]
        if "singles" in d:
            s = d["singles"]
            if set(s) != {"1", "2", "3", "4"}:
                raise MalformedInput("singles must have keys 1..4")
            singles = [_exact_array(s[str(i)], (2,)) for i in range(1, 5)]
            return BeliefCollection(p, singles)
        return BeliefCollection.from_pairs(p)
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"beliefs document is missing {exc}") from exc


# -- quantum models ------------------------------------------------------------

def _complex_array(v, shape) -> np.ndarray:
    arr = np.array(v, dtype=object)
    if arr.shape != shape + (2,):
        raise MalformedInput(f"expected complex array of shape {shape} as [re, im] pairs")
    f = np.vectorize(float, otypes=[float])(arr)
    return f[..., 0] + 1j * f[..., 1]


def _polar_unitary(u: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def model_from_dict(d, repair_tol: float = MODEL_REPAIR_TOL) -> QnfgModel:
    """Load a model; deviations up to ``repair_tol`` (e.g. from rounded
    decimals) are projected back onto density matrices and unitaries."""
    try:
        rho = _complex_array(d["rho"], (4, 4))
        u1 = _complex_array(d["u1"], (2, 2))
        u2 = _complex_array(d["u2"], (2, 2))
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"model document is missing {exc}") from exc
    herm = np.max(np.abs(rho - rho.conj().T))
    tr = np.trace(rho)
    udev = max(np.max(np.abs(u @ u.conj().T - np.eye(2))) for u in (u1, u2))
    if max(herm, abs(tr - 1), udev) <= repair_tol:
        rho = (rho + rho.conj().T) / 2
        rho = rho / np.trace(rho).real
        u1, u2 = _polar_unitary(u1), _polar_unitary(u2)
    return QnfgModel(rho, u1, u2)


def model_to_dict(m: QnfgModel, digits: int | None = None) -> dict:
    def cx(a):
        return [[[to_jsonable(z.real, digits), to_jsonable(z.imag, digits)] for z in row] for row in a]

    return {"rho": cx(m.rho), "u1": cx(m.u1), "u2": cx(m.u2)}


# -- graphs --------------------------------------------------------------------

_GRAPH_TABLES = {
    "cycle": (("f12", "f14", "f32", "f34"), build_cycle_graph, (2, 2)),
    "markov": (("m12", "m4given1", "m3given2"), build_markov_chain, (2, 2)),
    "single": (("f",), build_single_node, (2, 2, 2, 2)),
}


def graph_from_dict(d) -> Snfg:
    try:
        kind = d["type"]
        tables = d["tables"]
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"graph document is missing {exc}") from exc
    if kind not in _GRAPH_TABLES:
        raise MalformedInput(f"unknown graph type {kind!r}")
    names, builder, shape = _GRAPH_TABLES[kind]
    missing = [n for n in names if n not in tables]
    if missing:
        raise MalformedInput(f"graph of type {kind} is missing tables {missing}")
    arrays = []
    for n in names:
        arr = np.vectorize(float, otypes=[float])(np.array(tables[n], dtype=object))
        if arr.shape != shape:
            raise MalformedInput(f"table {n} has shape {arr.shape}, expected {shape}")
        bad = np.argwhere(arr < 0)
        if bad.size:
            idx = [int(v) for v in bad[0]]
            raise MalformedInput(f"table {n} has negative entry {float(arr[tuple(idx)])!r} at {idx}")
        arrays.append(arr)
    return builder(*arrays)


def graph_to_dict(g: Snfg) -> dict:
    if g.kind == "markov":
        names = {"M12": "m12", "M4|1": "m4given1", "M3|2": "m3given2"}
        return {"type": "markov", "tables": {names[n.name]: n.table.tolist() for n in g.nodes}}
    return {"type": g.kind, "tables": {n.name: n.table.tolist() for n in g.nodes}}


def detect_kind(d) -> str:
    """'graph', 'model' or 'beliefs' for a parsed document."""
    if isinstance(d, dict):
        if "type" in d and "tables" in d:
            return "graph"
        if "rho" in d:
            return "model"
        if "pairs" in d:
            return "beliefs"
    raise MalformedInput("document is not a graph, model or beliefs file")


# -- verdicts ------------------------------------------------------------------

def witness_to_dict(w, digits: int | None = DIGITS):
    if w is None:
        return None
    if isinstance(w, JointPmf):
        return {"type": "joint_pmf", "table": to_jsonable(w.table, digits)}
    if isinstance(w, Snfg):
        return graph_to_dict(w) | {"type": w.kind}
    if isinstance(w, QnfgModel):
        return {"type": "qnfg_model"} | model_to_dict(w, digits)
    return to_jsonable(w, digits)


def verdict_to_dict(v, digits: int | None = DIGITS) -> dict:
    return {
        "status": v.status,
        "witness": to_jsonable(witness_to_dict(v.witness, digits), digits),
        "certificate": to_jsonable(v.certificate, digits),
        "residual": None if v.residual is None else to_jsonable(v.residual, digits),
    }


__all__ = [
    "ChshAtlasError", "load_document", "dumps", "to_jsonable", "round_sig",
    "beliefs_to_dict", "beliefs_from_dict", "model_to_dict", "model_from_dict",
    "graph_from_dict", "graph_to_dict", "detect_kind", "verdict_to_dict",
]
