"""Bell's game, Hardy's paradox and witnesses for the eight Venn regions.

Witnesses are stored under ``chsh_atlas/witnesses`` and re-verified from
scratch on every call to :func:`verify_region`; :func:`regenerate_witnesses`
rebuilds the files from the constructions in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .beliefs import BeliefCollection, corr_chsh, pr_box, uniform_beliefs, validate_lm
from .exact_lp import LpProblem, solve_lp
from .extremal import TSIRELSON, maximize_quantum_chsh
from .factor_graphs import CONFIGS, beliefs_of, build_cycle_graph, induced_pmf
from .quantum import HADAMARD, IDENTITY2, QnfgModel, build_sqmf, classicable, density, ket, phi_plus, quantum_beliefs
from .realizability import (IN, OUT, UNKNOWN, check_fcyc_certificate, check_snfg_certificate,
                            member_fcyc, member_markov, member_qnfg, member_snfg)
from .search import SearchConfig
from .serialization import (beliefs_from_dict, beliefs_to_dict, dumps, load_document, model_from_dict,
                            model_to_dict)

REGIONS: tuple[str, ...] = (
    "NMkov∩NQFG",
    "NMkov\\NQFG",
    "(Nfcyc\\NMkov)∩NQFG",
    "Nfcyc\\(NMkov∪NQFG)",
    "(SNFG\\Nfcyc)∩NQFG",
    "SNFG\\(Nfcyc∪NQFG)",
    "NQFG\\SNFG",
    "LM\\(SNFG∪NQFG)",
)
SETS = ("lm", "snfg", "fcyc", "markov", "qnfg")
# inclusion chain, innermost first
CHAIN = ("markov", "fcyc", "snfg", "lm")

QNFG_EVIDENCE_SEEDS = 16
QNFG_EVIDENCE_RESIDUAL = 1e-4
HARDY_TARGET = (5 * math.sqrt(5) - 11) / 2


def witness_dir() -> Path:
    return Path(str(resources.files("chsh_atlas") / "witnesses"))


# -- constructions ----------------------------------------------------------------

def _rot(a: float) -> np.ndarray:
    return np.array([[math.cos(a), math.sin(a)], [-math.sin(a), math.cos(a)]], dtype=complex)


def search_bell_model(cfg: SearchConfig | None = None) -> QnfgModel:
    return maximize_quantum_chsh(cfg or SearchConfig()).argument


def _hardy_state(a: float, b: float):
    """State killing beta14(0,0), beta32(0,0) and beta34(1,1) for rotations a, b."""
    u1, u2 = _rot(a).real, _rot(b).real
    e0 = np.array([1.0, 0.0])
    rows = np.array([np.kron(e0, u2[0]), np.kron(u1[0], e0), np.kron(u1[1], u2[1])])
    psi = np.linalg.svd(rows)[2][-1]
    return psi, u1, u2


def search_hardy_model(starts: int = 30, seed: int = 0) -> QnfgModel:
    """Maximise beta12(0,0) over the Hardy-compatible family (Nelder-Mead)."""
    rng = np.random.default_rng(seed)

    def neg(t):
        return -_hardy_state(*t)[0][0] ** 2

    runs = [minimize(neg, rng.uniform(0, math.pi, 2), method="Nelder-Mead",
                     options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000}) for _ in range(starts)]
    best = min(runs, key=lambda r: r.fun)
    psi, u1, u2 = _hardy_state(*best.x)
    return QnfgModel.pure(psi, u1, u2)


def _table_beliefs(weights: dict[tuple[int, int, int, int], Fraction]) -> BeliefCollection:
    p = np.array([weights.get(c, Fraction(0)) for c in CONFIGS], dtype=object).reshape(2, 2, 2, 2)
    return beliefs_of(p)


def markov_not_quantum_beliefs() -> BeliefCollection:
    """x1 ~ (9/10, 1/10), x2 uniform and independent, x3 = x2, x4 = x1."""
    w1 = (Fraction(9, 10), Fraction(1, 10))
    return _table_beliefs({(a, c, c, a): w1[a] * Fraction(1, 2) for a in (0, 1) for c in (0, 1)})


def cycle_quantum_model() -> QnfgModel:
    """(|0+> + |1->)/sqrt 2 with U1 = I and U2 = H: x1 = x3 = x4, x2 independent."""
    return QnfgModel.pure((ket("0+") + ket("1-")) / math.sqrt(2), IDENTITY2, HADAMARD)


def cycle_not_markov_not_quantum_beliefs() -> BeliefCollection:
    """p proportional to w(x1) [x3 = x2] g(x3, x4)."""
    w = (Fraction(9, 10), Fraction(1, 10))
    g = ((Fraction(4, 5), Fraction(1, 5)), (Fraction(1, 5), Fraction(4, 5)))
    return _table_beliefs({(a, c, c, d): w[a] * g[c][d] / 2 for a in (0, 1) for c in (0, 1) for d in (0, 1)})


def werner_model() -> QnfgModel:
    """Werner state of visibility 1/sqrt 2 at optimal CHSH settings (linear CHSH = 2)."""
    v = 1 / math.sqrt(2)
    psi = np.kron(np.eye(2), _rot(math.pi / 8)) @ phi_plus()
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    rho = v * density(psi) + (1 - v) * np.eye(4) / 4
    return QnfgModel(rho, HADAMARD, x @ HADAMARD)


def snfg_only_beliefs() -> BeliefCollection:
    """p = w(x1, x2, x4) [x3 = x2] with w(000) = .3, w(011) = .5, w(101) = .2."""
    w = {(0, 0, 0): Fraction(3, 10), (0, 1, 1): Fraction(1, 2), (1, 0, 1): Fraction(1, 5)}
    return _table_beliefs({(a, c, c, d): v for (a, c, d), v in w.items()})


def _exact_decimal_beliefs(b: BeliefCollection) -> BeliefCollection:
    """Snap float beliefs to the nearest multiples of 1/8 if they are that close."""
    snapped = np.vectorize(lambda v: Fraction(round(float(v) * 8), 8), otypes=[object])
    pairs = snapped(b.pairs)
    assert np.max(np.abs(pairs.astype(float) - b.pairs.astype(float))) < 1e-12
    return BeliefCollection.from_pairs(pairs)


# -- stored data ----------------------------------------------------------------------

def _load_model(name: str) -> QnfgModel:
    return model_from_dict(load_document(witness_dir() / name), repair_tol=1e-12)


def bell_game_model() -> tuple[QnfgModel, BeliefCollection]:
    m = _load_model("bell_game_model.json")
    return m, quantum_beliefs(m)


@dataclass(frozen=True)
class HardyReport:
    zeros: dict
    p00: float
    snfg_status: str
    certificate: dict | None
    certificate_ok: bool
    classical_max_p00: Fraction
    target: float = HARDY_TARGET

    @property
    def ok(self) -> bool:
        return (max(abs(z) for z in self.zeros.values()) <= 1e-9 and self.p00 >= 0.05 and self.snfg_status == OUT
                and self.certificate_ok and self.classical_max_p00 == 0)


def hardy_classical_max() -> Fraction:
    """max P(x1 = 0, x2 = 0) over joint PMFs with the three Hardy zeros (exact LP)."""
    zero_rows = []
    for cfg in CONFIGS:
        x1, x2, x3, x4 = cfg
        zero_rows.append(int((x1, x4) == (0, 0) or (x3, x2) == (0, 0) or (x3, x4) == (1, 1)))
    a_eq = [[1] * 16, zero_rows]
    prob = LpProblem.build(16, a_eq, [1, 0])
    c = [int(cfg[0] == 0 and cfg[1] == 0) for cfg in CONFIGS]
    return solve_lp(prob, c, maximize=True).objective


def hardy_model() -> tuple[QnfgModel, HardyReport]:
    m = _load_model("hardy_model.json")
    b = quantum_beliefs(m)
    zeros = {"14(0,0)": float(b.pair("14")[0, 0]), "32(0,0)": float(b.pair("32")[0, 0]),
             "34(1,1)": float(b.pair("34")[1, 1])}
    v = member_snfg(b)
    ok = v.status == OUT and check_snfg_certificate(b, v.certificate)
    rep = HardyReport(zeros, float(b.pair("12")[0, 0]), v.status, v.certificate, ok, hardy_classical_max())
    return m, rep


@dataclass(frozen=True)
class VennWitness:
    region: str
    beliefs: BeliefCollection
    claims: dict                         # set -> (status, evidence)
    model: QnfgModel | None = None


def _manifest() -> dict:
    return load_document(witness_dir() / "manifest.json")


def venn_witnesses() -> dict[str, VennWitness]:
    out = {}
    for entry in _manifest()["regions"]:
        b = beliefs_from_dict(load_document(witness_dir() / entry["beliefs"]))
        model = _load_model(entry["model"]) if entry.get("model") else None
        claims = {k: tuple(v) for k, v in entry["claims"].items()}
        out[entry["region"]] = VennWitness(entry["region"], b, claims, model)
    return out


# -- verification ------------------------------------------------------------------------

@dataclass
class RegionReport:
    region: str
    checks: dict = field(default_factory=dict)   # set -> (ok, status, evidence, note)

    @property
    def ok(self) -> bool:
        return all(c[0] for c in self.checks.values())


def claims_consistent(claims: dict) -> bool:
    """IN for a set implies IN for all its supersets along the inclusion chain."""
    for i, inner in enumerate(CHAIN):
        for outer in CHAIN[i + 1:]:
            if claims[inner][0] == IN and claims[outer][0] == OUT:
                return False
    return True


def qnfg_evidence(b: BeliefCollection, seeds: int = QNFG_EVIDENCE_SEEDS,
                  base: SearchConfig | None = None) -> list[float]:
    """Best search residual for each seed."""
    base = base or SearchConfig(restarts=4, iterations=1000)
    return [member_qnfg(b, base.with_(seed=s)).residual for s in range(seeds)]


def verify_region(w: VennWitness, evidence_cfg: SearchConfig | None = None) -> RegionReport:
    b = w.beliefs
    rep = RegionReport(w.region)
    claims = w.claims
    if not claims_consistent(claims):
        rep.checks["inclusions"] = (False, "", "", "claims contradict the inclusion chain")
        return rep
    lm = validate_lm(b, 1e-12)
    want, ev = claims["lm"]
    rep.checks["lm"] = (lm.member == (want == IN), IN if lm.member else OUT, ev, "")

    snfg = member_snfg(b)
    want, ev = claims["snfg"]
    if snfg.status == IN:
        ok = beliefs_of(snfg.witness).allclose(b, 1e-12)
    else:
        ok = check_snfg_certificate(b, snfg.certificate)
    rep.checks["snfg"] = (ok and snfg.status == want, snfg.status, ev, "")

    want, ev = claims["markov"]
    if ev == "inclusion":
        ok = snfg.status == OUT and want == OUT
        rep.checks["markov"] = (ok, OUT, ev, "outside M(SNFG)")
    else:
        mk = member_markov(b)
        if mk.status == IN:
            ok = beliefs_of(induced_pmf(mk.witness)).allclose(b, 1e-10)
        else:
            ok = bool(mk.certificate["mismatches"])
        rep.checks["markov"] = (ok and mk.status == want, mk.status, ev, "")

    want, ev = claims["fcyc"]
    if ev == "inclusion":
        rep.checks["fcyc"] = (snfg.status == OUT and want == OUT, OUT, ev, "outside M(SNFG)")
    else:
        fc = member_fcyc(b)
        if want == IN:
            ok = fc.status == IN and beliefs_of(induced_pmf(fc.witness)).allclose(b, 1e-6)
            rep.checks["fcyc"] = (ok, fc.status, ev, f"residual {fc.residual:.3g}")
        else:
            cert = fc.certificate
            ok = (fc.status != IN and cert is not None and cert.get("kind") == "fcyc-support"
                  and check_fcyc_certificate(cert))
            rep.checks["fcyc"] = (ok, OUT if ok else fc.status, ev, "support certificate")

    want, ev = claims["qnfg"]
    if want == IN:
        ok = w.model is not None and quantum_beliefs(w.model).allclose(b, 1e-9)
        rep.checks["qnfg"] = (ok, IN if ok else UNKNOWN, ev, "stored model reproduces beliefs")
    elif ev == "bound":
        val = abs(corr_chsh(b.as_float()))
        rep.checks["qnfg"] = (val > TSIRELSON + 1e-9, OUT, ev, f"|CorrCHSH| = {val:.12g}")
    else:
        res = qnfg_evidence(b, base=evidence_cfg)
        ok = min(res) > QNFG_EVIDENCE_RESIDUAL
        rep.checks["qnfg"] = (ok, UNKNOWN, ev, f"min residual {min(res):.3g} over {len(res)} seeds")
    return rep


def verify_venn(evidence_cfg: SearchConfig | None = None) -> list[RegionReport]:
    ws = venn_witnesses()
    return [verify_region(ws[r], evidence_cfg) for r in REGIONS]


# -- regeneration ---------------------------------------------------------------------------

def _claims(lm, snfg, fcyc, markov, qnfg) -> dict:
    return {"lm": lm, "snfg": snfg, "fcyc": fcyc, "markov": markov, "qnfg": qnfg}


_C_IN = (IN, "certified")
_C_OUT = (OUT, "certified")
_INCL = (OUT, "inclusion")
_NUM = (OUT, "numerical")


def build_witnesses(bell: QnfgModel) -> list[dict]:
    uniform_model = QnfgModel(np.eye(4) / 4, IDENTITY2, IDENTITY2)
    cyc_model = cycle_quantum_model()
    werner = werner_model()
    rows = [
        (REGIONS[0], uniform_beliefs(), uniform_model, _claims(_C_IN, _C_IN, _C_IN, _C_IN, _C_IN)),
        (REGIONS[1], markov_not_quantum_beliefs(), None, _claims(_C_IN, _C_IN, _C_IN, _C_IN, _NUM)),
        (REGIONS[2], _exact_decimal_beliefs(quantum_beliefs(cyc_model)), cyc_model,
         _claims(_C_IN, _C_IN, _C_IN, _C_OUT, _C_IN)),
        (REGIONS[3], cycle_not_markov_not_quantum_beliefs(), None, _claims(_C_IN, _C_IN, _C_IN, _C_OUT, _NUM)),
        (REGIONS[4], _exact_decimal_beliefs(quantum_beliefs(werner)), werner,
         _claims(_C_IN, _C_IN, _C_OUT, _C_OUT, _C_IN)),
        (REGIONS[5], snfg_only_beliefs(), None, _claims(_C_IN, _C_IN, _C_OUT, _C_OUT, _NUM)),
        (REGIONS[6], quantum_beliefs(bell), bell, _claims(_C_IN, _C_OUT, _INCL, _INCL, _C_IN)),
        (REGIONS[7], pr_box(), None, _claims(_C_IN, _C_OUT, _INCL, _INCL, (OUT, "bound"))),
    ]
    return [{"region": r, "beliefs": b, "model": m, "claims": c} for r, b, m, c in rows]


def regenerate_witnesses(out_dir: Path | None = None, cfg: SearchConfig | None = None) -> Path:
    """Recompute every stored witness and write the JSON files plus manifest."""
    out = Path(out_dir) if out_dir else witness_dir()
    out.mkdir(parents=True, exist_ok=True)
    bell = search_bell_model(cfg)
    hardy = search_hardy_model()
    (out / "bell_game_model.json").write_text(dumps(model_to_dict(bell), digits=None) + "\n")
    (out / "hardy_model.json").write_text(dumps(model_to_dict(hardy), digits=None) + "\n")
    regions = []
    for n, row in enumerate(build_witnesses(bell), start=1):
        entry = {"region": row["region"], "beliefs": f"venn_{n}.json", "model": None,
                 "claims": {k: list(v) for k, v in row["claims"].items()}}
        (out / entry["beliefs"]).write_text(dumps(beliefs_to_dict(row["beliefs"], digits=None), digits=None) + "\n")
        if row["model"] is not None:
            entry["model"] = f"venn_{n}_model.json"
            (out / entry["model"]).write_text(dumps(model_to_dict(row["model"]), digits=None) + "\n")
        regions.append(entry)
    manifest = {"regions": regions, "bell_game": "bell_game_model.json", "hardy": "hardy_model.json"}
    (out / "manifest.json").write_text(dumps(manifest, digits=None) + "\n")
    return out


def bell_game_classicable(m: QnfgModel) -> bool:
    q = build_sqmf(m)
    return all(classicable(q, p) for p in ((1, 2), (1, 4), (3, 2), (3, 4)))
