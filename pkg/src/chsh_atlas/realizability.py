"""Membership tests for the realizable-marginal sets M(N).

``member_snfg`` and ``member_markov`` always decide.  ``member_fcyc`` and
``member_qnfg`` are searches: they return IN with a re-verified witness
or UNKNOWN with the best residual, never OUT.  When an exact argument
shows that no cycle witness exists, ``member_fcyc`` attaches it to the
UNKNOWN verdict; :func:`decide` is the set-logic layer that turns such
certificates, the inclusions and the known CHSH bounds into OUT verdicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from scipy.optimize import least_squares

from . import kernels
from .beliefs import PAIRS, PAIR_KEYS, BeliefCollection, corr_chsh, validate_lm
from .errors import DegenerateMarginal
from .exact_lp import LpProblem, as_fraction, solve_lp, solve_lp_feasibility, verify_farkas
from .factor_graphs import (CONFIGS, JointPmf, beliefs_of, build_cycle_graph, build_markov_chain,
                            induced_pmf)
from .quantum import (CHART_SIZE, QnfgModel, model_from_params, quantum_beliefs,
                      state_factor_from_params, unitaries_from_params)
from .search import SearchConfig, adam_minimize, initial_points, pick_best

IN, OUT, UNKNOWN = "IN", "OUT", "UNKNOWN"
LM_TOL = 1e-9
SNFG_TOL = 1e-12
MARKOV_TOL = 1e-10
WITNESS_TOL = 1e-9


@dataclass(frozen=True)
class MembershipVerdict:
    status: str
    witness: Any = None
    certificate: Any = None
    residual: float | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (IN, OUT, UNKNOWN):
            raise ValueError(f"bad status {self.status!r}")
        if self.status == IN and self.witness is None:
            raise ValueError("IN verdicts need a witness")
        if self.status == OUT and self.certificate is None:
            raise ValueError("OUT verdicts need a certificate")
        if self.status == UNKNOWN and self.residual is None:
            raise ValueError("UNKNOWN verdicts need a residual")


def _lm_out(b: BeliefCollection):
    rep = validate_lm(b, LM_TOL)
    if rep.member:
        return None
    cert = {"kind": "lm", "violations": [[d, float(m)] for d, m in rep.violations]}
    return MembershipVerdict(OUT, certificate=cert, details={"set": "LM"})


def _entries(b: BeliefCollection) -> list[Fraction]:
    exact = b if b.exact else b.as_fraction()
    return [exact.pairs[k][a, c] for k in range(4) for a in range(2) for c in range(2)]


def _pair_rows(support=None) -> list[list[int]]:
    """0/1 rows mapping a joint PMF (over ``support``) to the 16 pair entries."""
    support = range(16) if support is None else support
    rows = []
    for i, j in PAIRS:
        for a in range(2):
            for c in range(2):
                rows.append([int(CONFIGS[x][i - 1] == a and CONFIGS[x][j - 1] == c) for x in support])
    return rows


def snfg_problem(b: BeliefCollection) -> LpProblem:
    """{p >= 0 : pair marginals of p equal b, sum p = 1} as an exact LP."""
    return LpProblem.build(16, _pair_rows() + [[1] * 16], _entries(b) + [Fraction(1)])


# -- M(SNFG) ---------------------------------------------------------------------

def member_snfg(b: BeliefCollection, tol: float = SNFG_TOL) -> MembershipVerdict:
    """Decide b in M(SNFG) by the exact L1-deviation LP.

    Minimises ||A p - b||_1 over p >= 0 in rationals.  A zero optimum gives an
    exact witness; a positive optimum delta gives a Farkas vector ``y`` for
    {A p = b, p >= 0} with y @ b = -delta.  Float inputs whose optimum lies in
    (0, tol] are accepted as IN (rounding noise).
    """
    lm = _lm_out(b)
    if lm is not None:
        return lm
    base = snfg_problem(b)
    m = base.m_eq
    a = [list(r) + [Fraction(int(i == k)) for k in range(m)] + [Fraction(-int(i == k)) for k in range(m)]
         for i, r in enumerate(base.a_eq)]
    dev = LpProblem.build(16 + 2 * m, a, base.b_eq)
    sol = solve_lp(dev, [0] * 16 + [1] * (2 * m))
    delta = sol.objective
    p = sol.x[:16]
    exact = np.array(p, dtype=object).reshape(2, 2, 2, 2)
    if delta <= as_fraction(tol):
        pmf = JointPmf(np.array([float(v) for v in p]).reshape(2, 2, 2, 2))
        details = {"exact_witness": exact, "deviation": delta}
        return MembershipVerdict(IN, witness=pmf, residual=float(delta), details=details)
    y = tuple(-v for v in sol.dual)
    assert verify_farkas(base, y)
    cert = {"kind": "farkas", "y": y, "gap": delta}
    return MembershipVerdict(OUT, certificate=cert, details={"nearest": exact, "deviation": delta})


def check_snfg_certificate(b: BeliefCollection, cert) -> bool:
    return cert.get("kind") == "farkas" and verify_farkas(snfg_problem(b), cert["y"])


# -- M(NMkov) --------------------------------------------------------------------

def _conditional(joint: np.ndarray) -> np.ndarray:
    """Row-normalise; an all-zero row becomes (1, 0)."""
    out = np.empty((2, 2))
    for r in range(2):
        s = joint[r].sum()
        out[r] = joint[r] / s if s > 0 else (1.0, 0.0)
    return out


def markov_chain_for(b: BeliefCollection):
    """The only chain candidate: M12 = b12, M4|1 from b14, M3|2 from b32."""
    bf = b.as_float()
    m12 = bf.pair("12").astype(float)
    m12 = m12 / m12.sum()
    m41 = _conditional(bf.pair("14").astype(float))
    m32 = _conditional(bf.pair("32").astype(float).T)  # rows indexed by x2
    return build_markov_chain(m12, m41, m32)


def member_markov(b: BeliefCollection, tol: float = MARKOV_TOL) -> MembershipVerdict:
    lm = _lm_out(b)
    if lm is not None:
        return lm
    chain = markov_chain_for(b)
    composed = beliefs_of(induced_pmf(chain))
    target = b.as_float()
    mismatches = []
    for k, key in enumerate(PAIR_KEYS):
        for a in range(2):
            for c in range(2):
                want, got = float(target.pairs[k][a, c]), float(composed.pairs[k][a, c])
                if abs(want - got) > tol:
                    mismatches.append({"pair": key, "entry": [a, c], "given": want, "chain": got})
    worst = float(np.max(np.abs(composed.pairs.astype(float) - target.pairs.astype(float))))
    if not mismatches:
        return MembershipVerdict(IN, witness=chain, residual=worst)
    cert = {"kind": "markov", "mismatches": mismatches, "max_deviation": worst}
    return MembershipVerdict(OUT, certificate=cert, details={"chain": chain})


# -- M(Nfcyc) --------------------------------------------------------------------

def _float_pairs(b: BeliefCollection) -> np.ndarray:
    return np.asarray(b.pairs, dtype=float)


def _cycle_tables(factors: np.ndarray) -> np.ndarray:
    f12, f14, f32, f34 = factors
    return np.einsum("ab,ad,cb,cd->abcd", f12, f14, f32, f34)


def _marginals_of_table(p: np.ndarray) -> np.ndarray:
    return np.array([p.sum(axis=(2, 3)), p.sum(axis=(1, 2)), p.sum(axis=(0, 3)).T, p.sum(axis=(0, 1))])


def ipf_cycle(target: np.ndarray, sweeps: int, stop: float = 1e-30):
    """Iterative proportional fitting of the four cycle factors.

    Starts from the indicator of the pair supports, so the iterates stay in
    cycle form and converge to the I-projection onto the belief fiber.
    Returns ``(factors (4, 2, 2), squared residual)``.
    """
    factors = (target > 0).astype(float)
    if _cycle_tables(factors).sum() == 0:
        # no configuration has four positive pair entries
        return factors, float(np.sum(target ** 2))
    resid = np.inf
    for _ in range(sweeps):
        for k in range(4):
            p = _cycle_tables(factors)
            marg = _marginals_of_table(p / p.sum())[k]
            ratio = np.divide(target[k], marg, out=np.zeros((2, 2)), where=marg > 0)
            factors[k] = factors[k] * ratio
            factors[k] /= factors[k].max()
        p = _cycle_tables(factors)
        resid = float(np.sum((_marginals_of_table(p / p.sum()) - target) ** 2))
        if resid < stop:
            break
    return factors, resid


def fcyc_support_test(b: BeliefCollection):
    """Exact test for a strictly positive cycle witness.

    b lies in M(Nfcyc) iff some joint PMF with marginals b is positive on
    every configuration whose four pair entries are positive (the maximum
    entropy element of the fiber then factorises over the cycle).  Decided by
    the LP {q >= 1 on that set, q = 0 elsewhere, marginals(q) = s b, s >= 0},
    run on the exact marginals of an M(SNFG) witness.

    Returns ``(None, None)`` when b is already outside M(SNFG), otherwise
    ``(feasible, certificate)``.
    """
    snfg = member_snfg(b)
    if snfg.status != IN:
        return None, None
    exact_p = snfg.details["exact_witness"]
    tb = beliefs_of(exact_p)
    entries = _entries(tb)
    support = [x for x, cfg in enumerate(CONFIGS)
               if all(tb.pairs[k][cfg[i - 1], cfg[j - 1]] > 0 for k, (i, j) in enumerate(PAIRS))]
    rows = _pair_rows(support)
    # q_x = 1 + r_x on the support, variables (r, s)
    a_eq = [row + [-e] for row, e in zip(rows, entries)]
    b_eq = [-sum(row) for row in rows]
    prob = LpProblem.build(len(support) + 1, a_eq, b_eq)
    feas = solve_lp_feasibility(prob)
    cert = None
    if not feas.feasible:
        cert = {"kind": "fcyc-support", "support": support, "targets": entries, "y": feas.certificate}
    return feas.feasible, cert


def check_fcyc_certificate(cert) -> bool:
    rows = _pair_rows(cert["support"])
    a_eq = [row + [-e] for row, e in zip(rows, cert["targets"])]
    prob = LpProblem.build(len(cert["support"]) + 1, a_eq, [-sum(r) for r in rows])
    return verify_farkas(prob, cert["y"])


def member_fcyc(b: BeliefCollection, cfg: SearchConfig | None = None) -> MembershipVerdict:
    cfg = cfg or SearchConfig()
    lm = _lm_out(b)
    if lm is not None:
        return MembershipVerdict(UNKNOWN, residual=math.inf, certificate=lm.certificate)
    target = _float_pairs(b)
    factors, resid = ipf_cycle(target, sweeps=10 * cfg.iterations)
    feasible, cert = fcyc_support_test(b)
    if feasible is None:
        cert = {"kind": "snfg", "detail": member_snfg(b).certificate}
    if feasible and resid < cfg.accept:
        g = build_cycle_graph(*factors)
        wb = beliefs_of(induced_pmf(g))
        err = float(np.sum((_float_pairs(wb) - target) ** 2))
        if err < cfg.accept:
            return MembershipVerdict(IN, witness=g, residual=err)
    return MembershipVerdict(UNKNOWN, residual=resid, certificate=cert)


# -- M(NQFG) ---------------------------------------------------------------------

def quantum_residual(w: np.ndarray, target: np.ndarray, kind: str) -> np.ndarray:
    """Squared mismatch of the K-pair tables of a batch of chart points."""
    k = CHART_SIZE[kind]
    L = state_factor_from_params(w[:, :k], kind)
    u = unitaries_from_params(w[:, k:k + 8].reshape(-1, 4)).reshape(-1, 2, 2, 2)
    tabs = kernels.quantum_tables(L, np.ascontiguousarray(u[:, 0]), np.ascontiguousarray(u[:, 1]))
    return np.sum((tabs - target[None]) ** 2, axis=(1, 2, 3))


POLISH_CANDIDATES = 4


def _table_residuals(w: np.ndarray, target: np.ndarray, kind: str) -> np.ndarray:
    """(m, d) chart points -> (m, 16) differences between model tables and target."""
    k = CHART_SIZE[kind]
    L = state_factor_from_params(w[:, :k], kind)
    u = unitaries_from_params(w[:, k:k + 8].reshape(-1, 4)).reshape(-1, 2, 2, 2)
    tabs = kernels.quantum_tables(L, np.ascontiguousarray(u[:, 0]), np.ascontiguousarray(u[:, 1]))
    return (tabs - target[None]).reshape(w.shape[0], 16)


def _lm_polish(w0: np.ndarray, target: np.ndarray, kind: str, h: float = 1e-7):
    """Trust-region least squares on the 16 table residuals, from an Adam end point."""
    d = w0.size
    eye = np.eye(d) * h

    def fun(w):
        return _table_residuals(w[None], target, kind)[0]

    def jac(w):
        r = _table_residuals(np.concatenate([w + eye, w - eye]), target, kind)
        return ((r[:d] - r[d:]) / (2 * h)).T

    res = least_squares(fun, w0, jac=jac, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=500)
    val = float(np.sum(fun(res.x) ** 2))
    start = float(np.sum(fun(w0) ** 2))
    return (res.x, val) if val <= start else (w0, start)


def _sample_chart(kind: str):
    k = CHART_SIZE[kind]

    def sample(rng):
        return np.concatenate([rng.standard_normal(k), rng.uniform(-math.pi, math.pi, 8)])

    return sample


def member_qnfg(b: BeliefCollection, cfg: SearchConfig | None = None, kind: str = "mixed") -> MembershipVerdict:
    cfg = cfg or SearchConfig()
    lm = _lm_out(b)
    if lm is not None:
        return MembershipVerdict(UNKNOWN, residual=math.inf, certificate=lm.certificate)
    target = _float_pairs(b)
    x0 = initial_points(cfg, f"qnfg-{kind}", _sample_chart(kind))
    run = adam_minimize(lambda w: quantum_residual(w, target, kind), x0, cfg.iterations,
                        0.05, 1e-5, cfg.fd_step)
    values = run.value.copy()
    points = run.x.copy()
    for r in np.argsort(values, kind="stable")[:POLISH_CANDIDATES]:
        points[r], values[r] = _lm_polish(points[r], target, kind)
    best = pick_best(values)
    model = model_from_params(points[best], kind)
    err = float(np.sum((_float_pairs(quantum_beliefs(model)) - target) ** 2))
    details = {"restart_residuals": values.tolist(), "best_restart": best}
    if err < cfg.accept:
        return MembershipVerdict(IN, witness=model, residual=err, details=details)
    return MembershipVerdict(UNKNOWN, residual=err, details=details)


# -- set logic --------------------------------------------------------------------

SETS = ("lm", "snfg", "fcyc", "markov", "qnfg")
CLASSICAL_BOUND = 2.5
QUANTUM_BOUND = 2 * math.sqrt(2)
BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class Claim:
    status: str
    evidence: str  # "certified" | "numerical" | "inclusion" | "bound"
    note: str = ""
    verdict: MembershipVerdict | None = None


def _chsh_or_none(b: BeliefCollection):
    try:
        return corr_chsh(b.as_float())
    except DegenerateMarginal:
        return None


def decide(b: BeliefCollection, sets=SETS, cfg: SearchConfig | None = None,
           tol: float | None = None) -> dict[str, Claim]:
    """Run the requested tests and combine them with the inclusions
    M(NMkov) <= M(Nfcyc) <= M(SNFG) <= LM(K) and the CHSH bounds.

    ``tol`` overrides the LM and M(SNFG) acceptance tolerances."""
    cfg = cfg or SearchConfig()
    sets = tuple(sets)
    out: dict[str, Claim] = {}
    lm = validate_lm(b, LM_TOL if tol is None else tol)
    if "lm" in sets:
        out["lm"] = Claim(IN if lm.member else OUT, "certified")
    if not lm.member:
        for s in sets:
            if s != "lm":
                out[s] = Claim(OUT, "inclusion", "not in LM(K)")
        return out
    chsh = _chsh_or_none(b)
    need_snfg = any(s in sets for s in ("snfg", "fcyc", "markov"))
    snfg = (member_snfg(b, SNFG_TOL if tol is None else tol)) if need_snfg else None
    if "snfg" in sets:
        note = "exact LP witness" if snfg.status == IN else "Farkas certificate"
        out["snfg"] = Claim(snfg.status, "certified", note, snfg)
    if "fcyc" in sets:
        if snfg.status == OUT:
            out["fcyc"] = Claim(OUT, "inclusion", "outside M(SNFG)")
        else:
            v = member_fcyc(b, cfg)
            if v.status == IN:
                out["fcyc"] = Claim(IN, "certified", "cycle factors reproduce b", v)
            elif v.certificate is not None and v.certificate.get("kind") == "fcyc-support" \
                    and check_fcyc_certificate(v.certificate):
                out["fcyc"] = Claim(OUT, "certified", "no fiber element positive on the pair support", v)
            else:
                out["fcyc"] = Claim(UNKNOWN, "numerical", f"residual {v.residual:.3g}", v)
    if "markov" in sets:
        if snfg.status == OUT:
            out["markov"] = Claim(OUT, "inclusion", "outside M(SNFG)")
        else:
            v = member_markov(b)
            out["markov"] = Claim(v.status, "certified", "closed-form chain", v)
    if "qnfg" in sets:
        if chsh is not None and abs(chsh) > QUANTUM_BOUND + BOUND_SLACK:
            out["qnfg"] = Claim(OUT, "bound", f"|CorrCHSH| = {abs(chsh):.12g} > 2 sqrt 2")
        else:
            v = member_qnfg(b, cfg)
            if v.status == IN:
                out["qnfg"] = Claim(IN, "certified", "quantum model reproduces b", v)
            else:
                out["qnfg"] = Claim(UNKNOWN, "numerical", f"residual {v.residual:.3g}", v)
    return out
