import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chsh_atlas.beliefs import PAIRS, corr_chsh, pcc, validate_lm
from chsh_atlas.errors import BadIndex, DegenerateMarginal, InvalidModel, NotClassicable
from chsh_atlas.quantum import (HADAMARD, IDENTITY2, QnfgModel, Sqmf, build_sqmf, classical_marginal,
                                classicable, density, haar_unitary, ket, measurement_ops,
                                off_diagonal_magnitude, phi_plus, quantum_beliefs, random_model,
                                sqmf_beliefs, validate_sqmf)
from chsh_atlas.search import rng_for

MIXED = QnfgModel(np.eye(4) / 4, IDENTITY2, IDENTITY2)
PHI = QnfgModel(density(phi_plus()), IDENTITY2, IDENTITY2)


def born_tables(m: QnfgModel) -> np.ndarray:
    """Oracle: rotate each eigenvector of rho, then read computational-basis
    probabilities.  Variables 3 and 4 see U1 and U2 applied before readout."""
    lam, vecs = np.linalg.eigh(m.rho)
    out = np.zeros((4, 2, 2))
    for k, (i, j) in enumerate(PAIRS):
        ua = m.u1 if i == 3 else np.eye(2)
        ub = m.u2 if j == 4 else np.eye(2)
        for w, v in zip(lam, vecs.T):
            amp = (ua @ v.reshape(2, 2) @ ub.T)  # amp[xa, xb]
            out[k] += w * np.abs(amp) ** 2
    return out


def models(n=200, seed=0):
    return [random_model(rng_for(seed, "test-models", k)) for k in range(n)]


# -- model validation ----------------------------------------------------------------

def test_invalid_models():
    with pytest.raises(InvalidModel):
        QnfgModel(np.eye(4) / 2, IDENTITY2, IDENTITY2)
    with pytest.raises(InvalidModel):
        QnfgModel(np.diag([1.1, -0.1, 0, 0]), IDENTITY2, IDENTITY2)
    with pytest.raises(InvalidModel):
        QnfgModel(np.eye(4) / 4, 2 * IDENTITY2, IDENTITY2)
    r = np.eye(4, dtype=complex) / 4
    r[0, 1] = 0.1j
    with pytest.raises(InvalidModel):
        QnfgModel(r, IDENTITY2, IDENTITY2)


# -- measurement operators -------------------------------------------------------------------

def test_measurement_ops():
    e0, e1 = np.diag([1, 0]), np.diag([0, 1])
    for i in (1, 2):
        a = measurement_ops(PHI, i)
        assert np.array_equal(a[0], e0) and np.array_equal(a[1], e1)
    assert all(np.array_equal(x, y) for x, y in zip(measurement_ops(PHI, 3), measurement_ops(PHI, 1)))
    h = QnfgModel(np.eye(4) / 4, HADAMARD, HADAMARD)
    a0, a1 = measurement_ops(h, 3)
    np.testing.assert_allclose(a0, np.vstack([HADAMARD[0], [0, 0]]), atol=1e-15)
    np.testing.assert_allclose(a0.conj().T @ a0 + a1.conj().T @ a1, np.eye(2), atol=1e-15)
    with pytest.raises(BadIndex):
        measurement_ops(h, 5)


def test_completeness_random():
    for m in models(100):
        for i in range(1, 5):
            o = measurement_ops(m, i)
            assert np.max(np.abs(sum(x.conj().T @ x for x in o) - np.eye(2))) <= 1e-14


# -- beliefs -----------------------------------------------------------------------------------

def test_phi_plus_beliefs():
    b = quantum_beliefs(PHI)
    for k in ("12", "14", "32", "34"):
        np.testing.assert_allclose(b.pair(k), [[0.5, 0], [0, 0.5]], atol=1e-15)
    assert corr_chsh(b) == pytest.approx(2, abs=1e-12)


def test_maximally_mixed_beliefs(rng):
    m = QnfgModel(np.eye(4) / 4, haar_unitary(rng), haar_unitary(rng))
    np.testing.assert_allclose(quantum_beliefs(m).pairs.astype(float), 0.25, atol=1e-15)


def test_product_hadamard_degenerate():
    m = QnfgModel(density(ket("00")), HADAMARD, HADAMARD)
    b = quantum_beliefs(m)
    np.testing.assert_allclose(b.pair("12"), [[1, 0], [0, 0]], atol=1e-15)
    np.testing.assert_allclose(b.pair("34"), np.full((2, 2), 0.25), atol=1e-15)
    with pytest.raises(DegenerateMarginal):
        pcc(b, "12")


def test_beliefs_match_born_oracle():
    for m in models():
        np.testing.assert_allclose(quantum_beliefs(m).pairs.astype(float), born_tables(m), atol=1e-13)
        assert validate_lm(quantum_beliefs(m), 1e-10).member


@given(st.integers(0, 10_000))
def test_product_states_uncorrelated(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=2) + 1j * rng.normal(size=2)
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    m = QnfgModel.pure(np.kron(a, c), haar_unitary(rng), haar_unitary(rng))
    b = quantum_beliefs(m)
    for p in PAIRS:
        try:
            assert abs(pcc(b, p)) <= 1e-9
        except DegenerateMarginal:
            pass


# -- SQMF ---------------------------------------------------------------------------------------

def test_sqmf_examples():
    q = build_sqmf(MIXED)
    assert validate_sqmf(q).ok and abs(q.kernel.sum() - 1) <= 1e-15
    for p in PAIRS:
        np.testing.assert_allclose(classical_marginal(q, p), np.full((2, 2), 0.25), atol=1e-15)
    np.testing.assert_allclose(classical_marginal(build_sqmf(PHI), (1, 2)), [[0.5, 0], [0, 0.5]], atol=1e-15)


def test_sqmf_diagonal_state_fully_classicable():
    rho = np.diag([0.1, 0.2, 0.3, 0.4])
    q = build_sqmf(QnfgModel(rho, IDENTITY2, IDENTITY2))
    p = classical_marginal(q, (1, 2, 3, 4))
    expect = np.zeros((2, 2, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            expect[x1, x2, x1, x2] = rho[2 * x1 + x2, 2 * x1 + x2]
    np.testing.assert_allclose(p, expect, atol=1e-15)


def test_validate_sqmf_defects():
    q = build_sqmf(PHI)
    rep = validate_sqmf(Sqmf(2 * q.kernel))
    assert not rep.ok and ("normalization", pytest.approx(1.0)) in [(n, v) for n, v in rep.violations]
    k = q.kernel.copy()
    k[0, 5] += 0.1
    names = {n for n, _ in validate_sqmf(Sqmf(k)).violations}
    assert names & {"hermitian", "psd"}


def naive_marginal(q: Sqmf, I):
    """Oracle: explicit loop over the 256 kernel entries."""
    I = sorted(I)
    n = len(I)
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for x in range(16):
        for y in range(16):
            xb = [(x >> (3 - v)) & 1 for v in range(4)]
            yb = [(y >> (3 - v)) & 1 for v in range(4)]
            if any(xb[v] != yb[v] for v in range(4) if v + 1 not in I):
                continue
            a = sum(xb[i - 1] << (n - 1 - t) for t, i in enumerate(I))
            c = sum(yb[i - 1] << (n - 1 - t) for t, i in enumerate(I))
            out[a, c] += q.kernel[x, y]
    return out


def test_hadamard_non_classicable_example():
    m = QnfgModel(density(np.kron(ket("+"), ket("0"))), HADAMARD, IDENTITY2)
    q = build_sqmf(m)
    assert not classicable(q, (1, 3))
    oracle = naive_marginal(q, (1, 3))
    off = np.max(np.abs(oracle - np.diag(np.diag(oracle))))
    assert off == pytest.approx(0.25, abs=1e-15)
    assert off_diagonal_magnitude(q, (1, 3)) == pytest.approx(off, abs=1e-15)
    with pytest.raises(NotClassicable):
        classical_marginal(q, (1, 3))


def test_sqmf_against_oracles():
    off13 = off24 = 0
    for m in models():
        q = build_sqmf(m)
        assert validate_sqmf(q, 1e-10).ok
        assert abs(q.kernel.sum() - 1) <= 1e-12
        for p in PAIRS:
            assert classicable(q, p, 1e-10)
        for I in [(1, 3), (2, 4), (1, 2, 3), (1, 2, 3, 4)]:
            ours = q.tensor().sum(axis=tuple(v - 1 for v in range(1, 5) if v not in I)
                                  + tuple(v + 3 for v in range(1, 5) if v not in I))
            np.testing.assert_allclose(ours.reshape(naive_marginal(q, I).shape), naive_marginal(q, I), atol=1e-15)
        assert sqmf_beliefs(q).allclose(quantum_beliefs(m), 1e-12)
        off13 += not classicable(q, (1, 3))
        off24 += not classicable(q, (2, 4))
    assert off13 > 0 and off24 > 0
