"""Verification suites behind ``chsh-atlas verify``.

Each suite returns a list of :class:`Check` records; a suite passes when
every check does.  Checks carry plain numbers only, so their JSON is
reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beliefs import PAIRS, corr_chsh, lm_vertices, pcc, pcc_direct, pr_box, validate_lm
from .extremal import (TSIRELSON, classical_sample_extremes, find_quantum_monotonicity_violation,
                       maximize_classical_chsh, maximize_markov_variant, maximize_quantum_chsh,
                       verify_markov_monotonicity, verify_markov_product)
from .factor_graphs import CONFIGS, JointPmf, beliefs_of
from .quantum import (IDENTITY2, QnfgModel, build_sqmf, classicable, density, phi_plus, quantum_beliefs,
                      random_model, sqmf_beliefs)
from .realizability import OUT, IN, check_snfg_certificate, member_snfg
from .search import SearchConfig, rng_for


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    value: float | None = None
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.detail}"

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "value": self.value, "detail": self.detail}


# -- classical ------------------------------------------------------------------------

def classical_suite(seed: int = 0, restarts: int = 128, samples: int = 100_000) -> list[Check]:
    cfg = SearchConfig(seed=seed, restarts=restarts)
    hi = maximize_classical_chsh(cfg, "max")
    lo = maximize_classical_chsh(cfg, "min")
    s_hi, s_lo = classical_sample_extremes(cfg, samples)
    opt_top = max(float(hi.trace.max()), float(-lo.trace.min()))
    sample_top = max(abs(s_hi), abs(s_lo))
    prod = maximize_classical_chsh(SearchConfig(seed=seed, restarts=8, iterations=300, polish_iterations=50),
                                   family="product")
    top = max(opt_top, sample_top, abs(hi.value), abs(lo.value))
    return [
        Check("classical maximum", abs(hi.value - 2.5) <= 1e-6, hi.value,
              f"max CorrCHSH {hi.value:.12g} over {restarts} restarts"),
        Check("classical minimum", abs(lo.value + 2.5) <= 1e-6, lo.value,
              f"min CorrCHSH {lo.value:.12g} over {restarts} restarts"),
        Check("classical bound over restarts", opt_top <= 2.5 + 1e-6, opt_top,
              f"largest |CorrCHSH| among {2 * restarts} restarts {opt_top:.12g}"),
        Check("classical bound over samples", sample_top <= 2.5 + 1e-6, sample_top,
              f"largest |CorrCHSH| among {samples} samples {sample_top:.12g}"),
        Check("strictness below 2 sqrt 2", top < TSIRELSON - 1e-3, TSIRELSON - top,
              f"margin to 2 sqrt 2 is {TSIRELSON - top:.6f}"),
        Check("product PMFs", abs(prod.value) <= 1e-9, prod.value, f"CorrCHSH {prod.value:.3g}"),
    ]


# -- quantum -----------------------------------------------------------------------------

def classicability_checks(seed: int = 0, models: int = 1000) -> list[Check]:
    k_ok, worst, off13, off24 = True, 0.0, 0, 0
    for n in range(models):
        m = random_model(rng_for(seed, "classicability", n))
        q = build_sqmf(m)
        k_ok &= all(classicable(q, p, 1e-10) for p in PAIRS)
        worst = max(worst, float(np.max(np.abs(sqmf_beliefs(q).flat() - quantum_beliefs(m).flat()))))
        off13 += not classicable(q, (1, 3), 1e-10)
        off24 += not classicable(q, (2, 4), 1e-10)
    return [
        Check("K-pairs classicable", bool(k_ok), None, f"{models} random models"),
        Check("SQMF marginals match trace formula", worst <= 1e-12, worst, f"max deviation {worst:.3g}"),
        Check("non-K pairs not classicable", off13 > 0 and off24 > 0, None,
              f"{{1,3}} fails on {off13}, {{2,4}} fails on {off24} of {models}"),
    ]


def quantum_suite(seed: int = 0, restarts: int = 64) -> list[Check]:
    from .scenarios import bell_game_model

    cfg = SearchConfig(seed=seed, restarts=restarts)
    pure = maximize_quantum_chsh(cfg, "pure")
    mixed = maximize_quantum_chsh(cfg.with_(restarts=16, iterations=1000), "mixed")
    prod = maximize_quantum_chsh(cfg.with_(restarts=8, iterations=500), "product")
    top = max(float(pure.trace.max()), float(mixed.trace.max()))
    phi = corr_chsh(quantum_beliefs(QnfgModel(density(phi_plus()), IDENTITY2, IDENTITY2)))
    gap = find_quantum_monotonicity_violation(cfg.with_(restarts=16, iterations=1000))
    bell, bell_b = bell_game_model()
    bell_v = member_snfg(bell_b)
    checks = [
        Check("quantum maximum", abs(pure.value - TSIRELSON) <= 1e-5, pure.value,
              f"max CorrCHSH {pure.value:.12g} (2 sqrt 2 = {TSIRELSON:.12g})"),
        Check("quantum bound over restarts", top <= TSIRELSON + 1e-6, top,
              f"largest value among pure and mixed restarts {top:.12g}"),
        Check("mixed-state chart", abs(mixed.value - TSIRELSON) <= 1e-5, mixed.value,
              f"mixed search reaches {mixed.value:.12g}"),
        Check("product states", abs(prod.value) <= 1e-9, prod.value, f"CorrCHSH {prod.value:.3g}"),
        Check("Phi+ with identity unitaries", abs(phi - 2) <= 1e-12, phi, f"CorrCHSH {phi:.12g}"),
        Check("monotonicity violation", gap.value > 1e-3 and abs(gap.extra["gap_sqmf"] - gap.value) <= 1e-10,
              gap.value, f"|Corr34| - |Corr12| = {gap.value:.12g}"),
        Check("Bell game model", abs(corr_chsh(bell_b) - TSIRELSON) <= 1e-6 and bell_v.status == OUT
              and check_snfg_certificate(bell_b, bell_v.certificate), corr_chsh(bell_b),
              f"stored model gives {corr_chsh(bell_b):.12g}, M(SNFG) {bell_v.status}"),
    ]
    return checks + classicability_checks(seed)


# -- Markov ---------------------------------------------------------------------------------

def markov_suite(seed: int = 0, restarts: int = 64) -> list[Check]:
    cfg = SearchConfig(seed=seed, restarts=restarts)
    prod = verify_markov_product(cfg)
    mono = verify_markov_monotonicity(cfg)
    var = maximize_markov_variant(cfg)
    top = float(var.trace.max())
    return [
        Check("Markov product identity", prod.ok, prod.max_deviation,
              f"max deviation {prod.max_deviation:.3g} over {prod.chains} chains"),
        Check("Markov monotonicity", mono.ok, mono.max_excess,
              f"{mono.violations} violations over {mono.chains} chains"),
        Check("Markov variant maximum", abs(var.value - 2) <= 1e-6, var.value, f"max {var.value:.12g}"),
        Check("Markov variant bound", top <= 2 + 1e-6, top, f"largest restart value {top:.12g}"),
    ]


# -- Venn and Hardy --------------------------------------------------------------------------

def venn_suite(seed: int = 0) -> list[Check]:
    from .scenarios import HARDY_TARGET, hardy_model, verify_venn

    base = SearchConfig(seed=seed, restarts=4, iterations=1000)
    reports = verify_venn(base)
    checks = []
    for r in reports:
        parts = ", ".join(f"{k}={v[1]}({v[2]}{', ' + v[3] if v[2] == 'numerical' else ''})"
                          for k, v in r.checks.items())
        checks.append(Check(f"region {r.region}", r.ok, None, parts))
    n_ok = sum(r.ok for r in reports)
    checks.append(Check("Venn regions", n_ok == 8, n_ok, f"{n_ok}/8 witnesses verified"))
    _, hr = hardy_model()
    checks.append(Check("Hardy paradox", hr.ok, hr.p00,
                        f"zeros <= {max(abs(z) for z in hr.zeros.values()):.3g}, beta12(0,0) = {hr.p00:.10f} "
                        f"(target {HARDY_TARGET:.10f}), M(SNFG) {hr.snfg_status}"))
    return checks


# -- oracle equivalences and certificates ------------------------------------------------------

def oracle_suite(seed: int = 0, trials: int = 1000) -> list[Check]:
    from .beliefs import BeliefCollection

    rng = rng_for(seed, "pcc-oracle")
    worst = 0.0
    for _ in range(trials):
        t = rng.dirichlet(np.ones(4)).reshape(2, 2)
        b = BeliefCollection.from_pairs([t, t, t, t])
        worst = max(worst, abs(pcc(b, "12") - pcc_direct(t)))
    verts = lm_vertices()
    exact_ok = all(validate_lm(v, 0).member for v in verts)
    integral = {tuple(int(e) for e in cfg) for cfg in CONFIGS}
    found = set()
    for v in verts:
        if all(e in (0, 1) for e in v.pairs.ravel()):
            found.add(tuple(int(v.singles[i][1]) for i in range(4)))
    pr = pr_box()
    pv = member_snfg(pr)
    feas_ok, feas_worst = True, 0.0
    rng = rng_for(seed, "snfg-feasible")
    for _ in range(trials):
        p = JointPmf.from_weights(rng.dirichlet(np.ones(16)))
        b = beliefs_of(p)
        v = member_snfg(b)
        if v.status != IN:
            feas_ok = False
            continue
        feas_worst = max(feas_worst, float(np.max(np.abs(beliefs_of(v.witness).flat() - b.flat()))))
    return [
        Check("PCC determinant formula", worst <= 1e-12, worst, f"max deviation {worst:.3g} on {trials} PMFs"),
        Check("LM vertices exact", exact_ok and found == integral, len(verts),
              f"{len(verts)} vertices, {len(found)} integral"),
        Check("PR box certificate", pv.status == OUT and check_snfg_certificate(pr, pv.certificate), None,
              f"M(SNFG) {pv.status}, Farkas gap {pv.certificate['gap'] if pv.certificate else None}"),
        Check("random PMFs feasible", feas_ok and feas_worst <= 1e-12, feas_worst,
              f"{trials} PMFs, witness deviation {feas_worst:.3g}"),
    ]


SUITES = {
    "classical": classical_suite,
    "quantum": quantum_suite,
    "markov": markov_suite,
    "venn": venn_suite,
    "oracles": oracle_suite,
}


def run_suite(name: str, seed: int = 0, restarts: int | None = None) -> list[Check]:
    if name == "all":
        out = []
        for key in SUITES:
            out += run_suite(key, seed, restarts)
        return out
    fn = SUITES[name]
    if restarts is not None and name in ("classical", "quantum", "markov"):
        return fn(seed=seed, restarts=restarts)
    return fn(seed=seed)


__all__ = ["Check", "SUITES", "run_suite"]
