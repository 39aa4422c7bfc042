"""Command-line interface: ``chsh-atlas <command> ...``.

Exit codes: 0 on success, 1 when a verification suite fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from .beliefs import PAIR_KEYS, BeliefCollection, corr_chsh, pcc
from .errors import ChshAtlasError
from .factor_graphs import beliefs_of, induced_pmf
from .realizability import SETS, decide
from .search import SearchConfig
from .serialization import (beliefs_from_dict, beliefs_to_dict, detect_kind, dumps, graph_from_dict,
                            load_document, model_from_dict, round_sig, verdict_to_dict)

FORMATS = ("json", "csv", "text")
SUITE_NAMES = ("classical", "quantum", "markov", "venn", "oracles", "all")
TARGETS = ("classical", "classical-min", "classical-product", "quantum", "quantum-mixed",
           "quantum-product", "monotonicity", "markov-variant")


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


def _config(args) -> SearchConfig:
    cfg = SearchConfig(seed=args.seed)
    return cfg.with_(restarts=args.restarts) if args.restarts else cfg


def _beliefs_from_file(path: str) -> tuple[BeliefCollection, str]:
    doc = load_document(Path(path))
    kind = detect_kind(doc)
    if kind == "graph":
        return beliefs_of(induced_pmf(graph_from_dict(doc))), kind
    if kind == "model":
        from .quantum import quantum_beliefs
        return quantum_beliefs(model_from_dict(doc)), kind
    return beliefs_from_dict(doc), kind


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _num(x) -> str:
    return f"{round_sig(x):.12g}"


# -- commands ------------------------------------------------------------------------

def cmd_marginals(args) -> tuple[str, int]:
    b, kind = _beliefs_from_file(args.input)
    fb = b.as_float()
    chsh = corr_chsh(fb)
    corr = {k: pcc(fb, k) for k in PAIR_KEYS}
    if args.format == "json":
        return dumps({"source": kind, "beliefs": beliefs_to_dict(b), "pcc": corr, "corr_chsh": chsh}), 0
    rows = [(k, x, y, _num(fb.pair(k)[x, y])) for k in PAIR_KEYS for x in (0, 1) for y in (0, 1)]
    if args.format == "csv":
        return _csv(rows, ("pair", "x_i", "x_j", "value")), 0
    lines = [f"source: {kind}"]
    for k in PAIR_KEYS:
        t = fb.pair(k)
        lines.append(f"beta_{k}: [[{_num(t[0, 0])}, {_num(t[0, 1])}], [{_num(t[1, 0])}, {_num(t[1, 1])}]]"
                     f"  Corr = {_num(corr[k])}")
    lines.append(f"CorrCHSH = {_num(chsh)}")
    return "\n".join(lines), 0


def _parse_sets(text: str) -> tuple[str, ...]:
    sets = tuple(s.strip().lower() for s in text.split(",") if s.strip())
    bad = [s for s in sets if s not in SETS]
    if bad or not sets:
        raise InputError(f"unknown set(s) {bad or text!r}; choose from {','.join(SETS)}")
    return sets


def cmd_check(args) -> tuple[str, int]:
    sets = _parse_sets(args.sets)
    b, kind = _beliefs_from_file(args.input)
    claims = decide(b, sets, _config(args), tol=args.tol)
    try:
        chsh = corr_chsh(b.as_float())
    except ChshAtlasError:
        chsh = None
    result = {}
    for s in sets:
        c = claims[s]
        entry = {"status": c.status, "evidence": c.evidence, "note": c.note}
        if c.verdict is not None:
            entry |= {k: v for k, v in verdict_to_dict(c.verdict).items() if k != "status"}
        result[s] = entry
    if args.format == "json":
        return dumps({"source": kind, "corr_chsh": chsh, "sets": result}), 0
    rows = [(s, result[s]["status"], result[s]["evidence"], result[s]["note"]) for s in sets]
    if args.format == "csv":
        return _csv(rows, ("set", "status", "evidence", "note")), 0
    lines = [f"{s:<7} {st:<8} {ev:<10} {note}".rstrip() for s, st, ev, note in rows]
    if chsh is not None:
        lines.append(f"CorrCHSH = {_num(chsh)}")
    return "\n".join(lines), 0


def cmd_verify(args) -> tuple[str, int]:
    from .suites import run_suite

    checks = run_suite(args.suite, seed=args.seed, restarts=args.restarts)
    ok = all(c.ok for c in checks)
    code = 0 if ok else 1
    if args.format == "json":
        return dumps({"suite": args.suite, "seed": args.seed, "ok": ok,
                      "checks": [c.to_dict() for c in checks]}), code
    if args.format == "csv":
        rows = [(c.name, "PASS" if c.ok else "FAIL", "" if c.value is None else _num(c.value), c.detail)
                for c in checks]
        return _csv(rows, ("check", "result", "value", "detail")), code
    lines = [c.line() for c in checks]
    lines.append(f"{args.suite}: {sum(c.ok for c in checks)}/{len(checks)} checks passed")
    return "\n".join(lines), code


def _optimize(target: str, cfg: SearchConfig):
    from . import extremal as ex

    if target.startswith("classical"):
        sense = "min" if target == "classical-min" else "max"
        family = "product" if target == "classical-product" else "joint"
        return ex.maximize_classical_chsh(cfg, sense, family=family)
    if target.startswith("quantum"):
        mode = {"quantum": "pure", "quantum-mixed": "mixed", "quantum-product": "product"}[target]
        return ex.maximize_quantum_chsh(cfg, mode)
    if target == "monotonicity":
        return ex.find_quantum_monotonicity_violation(cfg)
    return ex.maximize_markov_variant(cfg)


def _argument_dict(arg):
    from .factor_graphs import JointPmf
    from .quantum import QnfgModel
    from .serialization import model_to_dict

    if isinstance(arg, QnfgModel):
        return {"type": "qnfg_model"} | model_to_dict(arg, digits=12)
    if isinstance(arg, JointPmf):
        return {"type": "joint_pmf", "table": arg.table}
    if isinstance(arg, (list, tuple)):
        return [_argument_dict(a) for a in arg]
    return arg


def cmd_optimize(args) -> tuple[str, int]:
    cfg = _config(args)
    res = _optimize(args.target, cfg)
    rows = [(r, i, _num(v)) for r, i, v in res.trace_rows()]
    if args.trace:
        Path(args.trace).write_text(_csv(rows, ("restart", "iteration", "objective")) + "\n")
    if args.format == "csv":
        return _csv(rows, ("restart", "iteration", "objective")), 0
    summary = {
        "target": args.target, "value": res.value, "seed": cfg.seed, "restarts": cfg.restarts,
        "iterations": cfg.iterations, "restart_values": res.trace,
        "argument": _argument_dict(res.argument),
        "extra": {k: v for k, v in res.extra.items() if isinstance(v, (int, float, bool, str))},
    }
    if args.format == "json":
        return dumps(summary), 0
    return (f"{args.target}: {_num(res.value)} (best of {cfg.restarts} restarts, seed {cfg.seed})\n"
            f"restart range [{_num(min(res.trace))}, {_num(max(res.trace))}]"), 0


def cmd_witnesses(args) -> tuple[str, int]:
    from .scenarios import regenerate_witnesses

    out = regenerate_witnesses(args.out, _config(args))
    if args.format == "json":
        return dumps({"written": str(out)}), 0
    return f"witnesses written to {out}", 0


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--tol", type=float, default=None, help="override membership tolerances")
    common.add_argument("--format", choices=FORMATS, default="text", help="output format")
    common.add_argument("--restarts", type=int, default=None, help="optimizer restarts")

    p = argparse.ArgumentParser(prog="chsh-atlas", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("marginals", parents=[common], help="pair beliefs of a graph or quantum model")
    m.add_argument("input")
    m.set_defaults(func=cmd_marginals)

    c = sub.add_parser("check", parents=[common], help="membership of beliefs in the realizable sets")
    c.add_argument("input")
    c.add_argument("--sets", default=",".join(SETS), help=f"comma list from {','.join(SETS)}")
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", choices=SUITE_NAMES, default="all")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("optimize", parents=[common], help="run an extremal search")
    o.add_argument("target", choices=TARGETS)
    o.add_argument("--trace", help="also write the per-iteration CSV trace to this file")
    o.set_defaults(func=cmd_optimize)

    w = sub.add_parser("witnesses", help="manage stored witness files")
    wsub = w.add_subparsers(dest="action", required=True)
    r = wsub.add_parser("regenerate", parents=[common], help="recompute all stored witnesses")
    r.add_argument("--out", default=None, help="output directory (default: package data)")
    r.set_defaults(func=cmd_witnesses)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.restarts is not None and args.restarts < 1:
        parser.error("--restarts must be positive")
    if args.tol is not None and not args.tol >= 0:
        parser.error("--tol must be non-negative")
    try:
        text, code = args.func(args)
    except (InputError, ChshAtlasError) as exc:
        print(f"chsh-atlas: error: {exc}", file=sys.stderr)
        return 2
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "build_parser"]
