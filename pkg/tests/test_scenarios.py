import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import minimize

from chsh_atlas.beliefs import PAIRS, corr_chsh, linear_chsh, pr_box, uniform_beliefs, validate_lm
from chsh_atlas.exact_lp import verify_farkas
from chsh_atlas.quantum import QnfgModel, build_sqmf, classicable, quantum_beliefs
from chsh_atlas.realizability import IN, OUT, member_markov, member_snfg, snfg_problem
from chsh_atlas.scenarios import (CHAIN, REGIONS, bell_game_classicable, bell_game_model, claims_consistent,
                                  cycle_quantum_model, hardy_classical_max, hardy_model,
                                  markov_not_quantum_beliefs, regenerate_witnesses, venn_witnesses,
                                  verify_region, werner_model, witness_dir)

TSIRELSON = 2 * math.sqrt(2)


def _rot(a):
    return np.array([[math.cos(a), math.sin(a)], [-math.sin(a), math.cos(a)]])


def hardy_oracle(starts=12):
    """Independent derivation of the Hardy optimum: maximise beta12(0,0) over
    real pure states and real rotations with the three zeros as equality
    constraints (SLSQP), instead of the null-space family used in the library."""
    def tables(t):
        psi = t[:4] / np.linalg.norm(t[:4])
        u1, u2 = _rot(t[4]), _rot(t[5])
        amp = psi.reshape(2, 2)
        p12 = amp ** 2
        p14 = (amp @ u2.T) ** 2
        p32 = (u1 @ amp) ** 2
        p34 = (u1 @ amp @ u2.T) ** 2
        return p12, p14, p32, p34

    cons = {"type": "eq", "fun": lambda t: [tables(t)[1][0, 0], tables(t)[2][0, 0], tables(t)[3][1, 1]]}
    rng = np.random.default_rng(1)
    best = 0.0
    for _ in range(starts):
        r = minimize(lambda t: -tables(t)[0][0, 0], rng.normal(size=6), constraints=[cons], method="SLSQP",
                     options={"ftol": 1e-14, "maxiter": 500})
        if r.success and max(abs(v) for v in cons["fun"](r.x)) < 1e-10:
            best = max(best, -r.fun)
    return best


# -- Bell's game ---------------------------------------------------------------------------

def test_bell_game():
    m, b = bell_game_model()
    assert corr_chsh(b) == pytest.approx(TSIRELSON, abs=1e-6)
    v = member_snfg(b)
    assert v.status == OUT and verify_farkas(snfg_problem(b), v.certificate["y"])
    q = build_sqmf(m)
    assert all(classicable(q, p) for p in PAIRS) and bell_game_classicable(m)


# -- Hardy -------------------------------------------------------------------------------------

def test_hardy_model():
    _, rep = hardy_model()
    assert rep.ok
    assert all(abs(z) <= 1e-9 for z in rep.zeros.values())
    assert rep.p00 >= 0.05
    assert rep.certificate["gap"] > 0
    assert rep.p00 == pytest.approx(hardy_oracle(), abs=1e-7)
    assert rep.p00 == pytest.approx(rep.target, abs=1e-9)


def test_hardy_classically_impossible():
    assert hardy_classical_max() == 0


def test_hardy_separable_diagonal(rng):
    """Diagonal states with the Hardy settings cannot satisfy the zeros with
    beta12(0,0) > 0."""
    m, _ = hardy_model()
    for _ in range(200):
        rho = np.diag(rng.dirichlet(np.ones(4)))
        b = quantum_beliefs(QnfgModel(rho, m.u1, m.u2))
        zeros = max(abs(b.pair("14")[0, 0]), abs(b.pair("32")[0, 0]), abs(b.pair("34")[1, 1]))
        assert zeros > 1e-9 or b.pair("12")[0, 0] <= 1e-12


# -- constructions -----------------------------------------------------------------------------

def test_werner_model():
    b = quantum_beliefs(werner_model())
    assert linear_chsh(b) == pytest.approx(2, abs=1e-12)
    vals = np.sort(np.unique(np.round(b.pairs.astype(float), 12)))
    np.testing.assert_allclose(vals, [1 / 8, 3 / 8])


def test_markov_not_quantum_candidate_is_markov():
    b = markov_not_quantum_beliefs()
    assert b.exact and member_markov(b).status == IN


def test_cycle_quantum_model_correlations():
    b = quantum_beliefs(cycle_quantum_model())
    assert validate_lm(b, 1e-12).member and member_markov(b).status == OUT


# -- Venn witnesses ----------------------------------------------------------------------------

def test_regions_and_claims():
    ws = venn_witnesses()
    assert tuple(ws) == REGIONS and len(ws) == 8
    for w in ws.values():
        assert claims_consistent(w.claims)
        assert set(w.claims) == set(CHAIN) | {"qnfg"}
    assert ws[REGIONS[0]].beliefs == uniform_beliefs()
    assert ws[REGIONS[7]].beliefs == pr_box()
    assert ws[REGIONS[6]].beliefs.allclose(bell_game_model()[1], 1e-9)


def test_claims_consistent_rejects_contradictions():
    bad = {"markov": (IN, "certified"), "fcyc": (IN, "certified"), "snfg": (OUT, "certified"),
           "lm": (IN, "certified"), "qnfg": (IN, "certified")}
    assert not claims_consistent(bad)


@pytest.mark.parametrize("index", [0, 2, 4, 6, 7])
def test_certified_regions_reverify(index):
    w = venn_witnesses()[REGIONS[index]]
    rep = verify_region(w)
    assert rep.ok, rep.checks


def test_pr_region_bound():
    rep = verify_region(venn_witnesses()[REGIONS[7]])
    status, evidence = rep.checks["qnfg"][1:3]
    assert (status, evidence) == (OUT, "bound")


@pytest.mark.slow
def test_regeneration_reproduces_stored_files(tmp_path):
    out = regenerate_witnesses(tmp_path)
    stored = witness_dir()
    names = sorted(p.name for p in stored.glob("*.json"))
    assert names == sorted(p.name for p in out.glob("*.json"))
    for n in names:
        assert (out / n).read_text() == (stored / n).read_text(), n


def test_manifest_exact_fractions():
    ws = venn_witnesses()
    for r in (REGIONS[1], REGIONS[3], REGIONS[5], REGIONS[7]):
        assert all(isinstance(v, Fraction) for v in ws[r].beliefs.pairs.ravel())
