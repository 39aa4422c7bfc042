"""Acceptance criteria, one test each.

Every test prints a ``PASS/FAIL criterion N: ...`` line straight to the
terminal.  Run directly (``python3 tests/test_acceptance.py``) for just
the summary lines.
"""

from __future__ import annotations

import sys
import time
from functools import cache

import pytest

from chsh_atlas.suites import classical_suite, markov_suite, oracle_suite, quantum_suite, venn_suite

SEED = 0
RUNTIME = {"classical": 60.0, "quantum": 120.0}


@cache
def suite(name: str):
    fn = {"classical": classical_suite, "quantum": quantum_suite, "markov": markov_suite,
          "venn": venn_suite, "oracles": oracle_suite}[name]
    t = time.perf_counter()
    checks = fn(seed=SEED)
    return {c.name: c for c in checks}, time.perf_counter() - t


def _evaluate(number: int, title: str, suite_name: str, names, runtime: bool = False):
    checks, elapsed = suite(suite_name)
    picked = [checks[n] for n in names] if names else list(checks.values())
    ok = all(c.ok for c in picked)
    detail = "; ".join(f"[{c.name}] {c.detail}" if number == 9 else c.detail for c in picked)
    if runtime:
        limit = RUNTIME[suite_name]
        ok &= elapsed < limit
        detail += f"; suite runtime {elapsed:.1f} s (target < {limit:.0f} s)"
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"


CRITERIA = [
    (1, "classical maximum", "classical",
     ["classical maximum", "classical minimum", "classical bound over restarts", "classical bound over samples"],
     True),
    (2, "quantum maximum", "quantum",
     ["quantum maximum", "quantum bound over restarts", "mixed-state chart", "Bell game model"], True),
    (3, "strictness", "classical", ["strictness below 2 sqrt 2"], False),
    (4, "Markov product identity", "markov", ["Markov product identity", "Markov monotonicity"], False),
    (5, "Markov CHSH variant", "markov", ["Markov variant maximum", "Markov variant bound"], False),
    (6, "quantum monotonicity violation", "quantum", ["monotonicity violation"], False),
    (7, "classicability", "quantum",
     ["K-pairs classicable", "non-K pairs not classicable", "SQMF marginals match trace formula"], False),
    (8, "membership certificates", "oracles", ["PR box certificate", "random PMFs feasible"], False),
    (9, "Venn suite", "venn", None, False),
    (10, "Hardy demo", "venn", ["Hardy paradox"], False),
    (11, "oracle equivalence", "oracles", ["PCC determinant formula", "LM vertices exact"], False),
]


def _venn_names():
    checks, _ = suite("venn")
    return [n for n in checks if n != "Hardy paradox"]


@pytest.mark.parametrize("number,title,suite_name,names,runtime", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, suite_name, names, runtime, capsys):
    if number == 9:
        names = _venn_names()
    ok, line = _evaluate(number, title, suite_name, names, runtime)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for number, title, suite_name, names, runtime in CRITERIA:
        if number == 9:
            names = _venn_names()
        ok, line = _evaluate(number, title, suite_name, names, runtime)
        failed += not ok
        print(line, flush=True)
    sys.exit(1 if failed else 0)
