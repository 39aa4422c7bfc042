import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chsh_atlas.beliefs import (PAIRS, SIGN_PATTERNS, BeliefCollection, convex_combination, coordinates_of,
                                corr_chsh, in_lm_chsh, linear_chsh, lm_vertices, pairwise_consistency, pcc,
                                pcc_direct, pr_box, uniform_beliefs, validate_lm)
from chsh_atlas.errors import BadSigns, BadWeights, DegenerateMarginal, DisjointPairs
from chsh_atlas.factor_graphs import CONFIGS, JointPmf, beliefs_of

F = Fraction


def two_point_beliefs():
    t = np.zeros((2, 2, 2, 2))
    t[0, 0, 0, 0] = t[1, 1, 1, 1] = 0.5
    return beliefs_of(JointPmf(t))


def deterministic(x):
    t = np.zeros((2, 2, 2, 2), dtype=object)
    t[...] = F(0)
    t[tuple(x)] = F(1)
    return beliefs_of(t)


# -- LM(K) ------------------------------------------------------------------------------

def test_validate_lm_examples():
    assert validate_lm(uniform_beliefs(), 0).member
    assert validate_lm(pr_box(), 0).member
    p = [[[0.25, 0.25], [0.25, 0.15]]] + [[[0.25, 0.25], [0.25, 0.25]]] * 3
    rep = validate_lm(BeliefCollection(p, [[0.5, 0.5]] * 4), 1e-12)
    norm = [v for v in rep.violations if v[0] == "normalization beta_12"]
    assert not rep.member and len(norm) == 1 and norm[0][1] == pytest.approx(0.1)


def test_pairwise_consistency():
    b = beliefs_of(JointPmf.from_weights(np.arange(1, 17)))
    assert pairwise_consistency(b, "12", "14")
    assert pairwise_consistency(pr_box(), "32", "34")
    p = [[[0.3, 0.3], [0.2, 0.2]], [[0.25, 0.25], [0.25, 0.25]]] + [[[0.25, 0.25], [0.25, 0.25]]] * 2
    assert not pairwise_consistency(BeliefCollection(p, [[0.5, 0.5]] * 4), "12", "14")
    with pytest.raises(DisjointPairs):
        pairwise_consistency(b, "12", "34")


# -- PCC and CHSH ---------------------------------------------------------------------------

def test_pcc_examples():
    b = BeliefCollection.from_pairs([[[0.5, 0], [0, 0.5]]] * 4)
    assert pcc(b, "12") == 1
    assert pcc(uniform_beliefs(False), "14") == 0
    t = [[0.4, 0.1], [0.2, 0.3]]
    b = BeliefCollection.from_pairs([t] * 4)
    assert pcc(b, "12") == pytest.approx(0.408248, abs=1e-6)
    assert pcc(b, "12") == pytest.approx(pcc_direct(t), abs=1e-15)


def test_pcc_guard():
    t = [[0.0, 0.0], [0.5, 0.5]]
    with pytest.raises(DegenerateMarginal):
        pcc(BeliefCollection.from_pairs([t] * 4), "12")


def test_chsh_examples():
    assert corr_chsh(uniform_beliefs()) == 0
    assert corr_chsh(pr_box()) == 4
    assert corr_chsh(two_point_beliefs()) == pytest.approx(2, abs=1e-15)
    assert linear_chsh(pr_box()) == 4
    assert linear_chsh(uniform_beliefs()) == 0
    assert linear_chsh(two_point_beliefs()) == pytest.approx(2)
    with pytest.raises(BadSigns):
        linear_chsh(pr_box(), (1, 1, 1, 1))


def test_lm_chsh_membership():
    assert in_lm_chsh(uniform_beliefs())
    assert not in_lm_chsh(pr_box())
    # linear value 2 on the default pattern, 0 elsewhere: inside under both readings
    assert in_lm_chsh(two_point_beliefs().as_fraction(), all_patterns=False)
    assert in_lm_chsh(two_point_beliefs().as_fraction())
    # minus sign on 12 instead: fails only the all-pattern reading
    flip = BeliefCollection.from_pairs([[[F(0), F(1, 2)], [F(1, 2), F(0)]]] + [[[F(1, 2), F(0)], [F(0), F(1, 2)]]] * 3)
    assert in_lm_chsh(flip, all_patterns=False)
    assert not in_lm_chsh(flip)


def test_pcc_matches_direct_covariance(rng):
    for _ in range(1000):
        t = rng.dirichlet(np.ones(4)).reshape(2, 2)
        assert abs(pcc(BeliefCollection.from_pairs([t] * 4), "12") - pcc_direct(t)) <= 1e-12


def test_classical_linear_chsh(rng):
    for _ in range(1000):
        b = beliefs_of(JointPmf.from_weights(rng.dirichlet(np.ones(16))))
        for s in SIGN_PATTERNS:
            assert linear_chsh(b, s) <= 2 + 1e-9


@given(st.lists(st.floats(0.01, 1), min_size=16, max_size=16))
def test_pcc_bounded_and_relabel_invariant(w):
    p = JointPmf.from_weights(np.array(w))
    b = beliefs_of(p)
    for k in range(4):
        assert abs(pcc(b, PAIRS[k])) <= 1 + 1e-12
    flipped = beliefs_of(JointPmf(p.table[::-1, ::-1, ::-1, ::-1].copy()))
    assert corr_chsh(flipped) == pytest.approx(corr_chsh(b), abs=1e-12)


# -- vertices -----------------------------------------------------------------------------

def _oracle_vertices():
    """Brute force: each of the 16 nonnegativity constraints on pair-table
    entries is written out by hand; every 8-subset with a unique solution
    that satisfies all others is a vertex."""
    # y = (m1, m2, m3, m4, c12, c14, c32, c34), entry = coef @ y + const
    rows = []
    for k, (i, j) in enumerate(PAIRS):
        e = np.zeros((4, 9))
        e[0, 4 + k] = 1                                            # c
        e[1, i - 1], e[1, 4 + k] = 1, -1                           # m_i - c
        e[2, j - 1], e[2, 4 + k] = 1, -1                           # m_j - c
        e[3, i - 1], e[3, j - 1], e[3, 4 + k], e[3, 8] = -1, -1, 1, 1
        rows.extend(e)
    rows = np.array(rows)
    found = set()
    for sub in itertools.combinations(range(16), 8):
        a = rows[list(sub), :8]
        if abs(np.linalg.det(a)) < 1e-9:
            continue
        y = np.linalg.solve(a, -rows[list(sub), 8])
        if np.all(rows[:, :8] @ y + rows[:, 8] >= -1e-9):
            found.add(tuple(F(v).limit_denominator(64) for v in y))
    return found


@pytest.mark.slow
def test_vertices_match_brute_force():
    got = {coordinates_of(v) for v in lm_vertices()}
    assert got == _oracle_vertices()


def test_vertex_properties():
    verts = lm_vertices()
    assert len(verts) == len(set(verts))
    allowed = {F(0), F(1, 2), F(1)}
    for v in verts:
        assert validate_lm(v, 0).member
        assert set(v.pairs.ravel()) | set(v.singles.ravel()) <= allowed
    for x in CONFIGS:
        assert deterministic(x) in verts
    assert pr_box() in verts
    zero = deterministic((0, 0, 0, 0))
    assert all(np.all(zero.pair(k) == [[1, 0], [0, 0]]) for k in ("12", "14", "32", "34"))


def test_convex_combination_examples():
    verts = lm_vertices()
    assert convex_combination([verts[3]], [1]) == verts[3]
    integral = [deterministic(x) for x in CONFIGS]
    assert convex_combination(integral, [F(1, 16)] * 16) == uniform_beliefs()
    w = [F(1, 2)] + [0] * 14 + [F(1, 2)]
    assert convex_combination(integral, w) == two_point_beliefs().as_fraction()
    with pytest.raises(BadWeights):
        convex_combination(integral[:2], [0.5, 0.6])
    with pytest.raises(BadWeights):
        convex_combination(integral[:2], [1.5, -0.5])


@given(st.lists(st.integers(0, 50), min_size=24, max_size=24).filter(lambda w: sum(w) > 0))
def test_convex_combinations_stay_in_lm(w):
    total = sum(w)
    b = convex_combination(lm_vertices(), [F(v, total) for v in w])
    assert validate_lm(b, 0).member


def test_mapping_and_diagonal_input():
    pairs = {"34": [[0, .5], [.5, 0]], "12": [[.5, 0], [0, .5]], "14": [[.5, 0], [0, .5]], "32": [[.5, 0], [0, .5]]}
    diag = [np.diag([0.5, 0.5])] * 4
    assert BeliefCollection(pairs, diag).allclose(pr_box(), 0)
    with pytest.raises(ValueError):
        pr_box().pairs[0, 0, 0] = 1
