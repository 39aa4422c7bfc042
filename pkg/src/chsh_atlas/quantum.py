"""Two-qubit quantum factor graph: state, measurements and the SQMF kernel.

Qubit A carries x1 (computational-basis measurement) and x3 (measurement
after ``U1``); qubit B carries x2 and x4 (after ``U2``).  A model is a
density matrix on A (x) B plus the two unitaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .beliefs import PAIRS, BeliefCollection
from .errors import BadIndex, InvalidModel, NotClassicable

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-12
UNITARY_TOL = 1e-12

E = (np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex))
IDENTITY2 = np.eye(2, dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QnfgModel:
    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        rho, u1, u2 = (_frozen(v) for v in (self.rho, self.u1, self.u2))
        if rho.shape != (4, 4) or u1.shape != (2, 2) or u2.shape != (2, 2):
            raise InvalidModel("rho must be 4x4 and the unitaries 2x2")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(u1)) and np.all(np.isfinite(u2))):
            raise InvalidModel("non-finite entry")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > HERMITIAN_TOL:
            raise InvalidModel(f"rho is not Hermitian (deviation {herm:.3g})")
        tr = np.trace(rho)
        if abs(tr - 1) > TRACE_TOL:
            raise InvalidModel(f"trace of rho is {tr.real:.15g}")
        lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
        if lam < -PSD_TOL:
            raise InvalidModel(f"rho has eigenvalue {lam:.3g}")
        for name, u in (("u1", u1), ("u2", u2)):
            dev = np.max(np.abs(u @ u.conj().T - IDENTITY2))
            if dev > UNITARY_TOL:
                raise InvalidModel(f"{name} is not unitary (deviation {dev:.3g})")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "u1", u1)
        object.__setattr__(self, "u2", u2)

    @classmethod
    def pure(cls, psi, u1=IDENTITY2, u2=IDENTITY2) -> "QnfgModel":
        psi = np.asarray(psi, dtype=complex).reshape(4)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), u1, u2)

    @classmethod
    def from_factor(cls, L, u1, u2) -> "QnfgModel":
        """Model with rho = L L^H / tr(L L^H); exactly Hermitian by construction."""
        L = np.asarray(L, dtype=complex).reshape(4, -1)
        rho = L @ L.conj().T
        rho = (rho + rho.conj().T) / 2
        return cls(rho / np.trace(rho).real, u1, u2)


# -- constructors for common states -------------------------------------------

def ket(bits: str) -> np.ndarray:
    """Computational-basis ket, e.g. ``ket("01")``; "+" and "-" are also accepted."""
    one = {"0": np.array([1, 0], complex), "1": np.array([0, 1], complex),
           "+": np.array([1, 1], complex) / np.sqrt(2), "-": np.array([1, -1], complex) / np.sqrt(2)}
    out = np.array([1], dtype=complex)
    for ch in bits:
        out = np.kron(out, one[ch])
    return out


def phi_plus() -> np.ndarray:
    return (ket("00") + ket("11")) / np.sqrt(2)


def density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def unitary_chart(theta, phi, alpha, beta) -> np.ndarray:
    """exp(i phi) [[cos t e^{i a}, sin t e^{i b}], [-sin t e^{-i b}, cos t e^{-i a}]]."""
    c, s = np.cos(theta), np.sin(theta)
    u = np.array([[c * np.exp(1j * alpha), s * np.exp(1j * beta)],
                  [-s * np.exp(-1j * beta), c * np.exp(-1j * alpha)]])
    return np.exp(1j * phi) * u


def haar_unitary(rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_model(rng: np.random.Generator, rank: int | None = None) -> QnfgModel:
    """Ginibre-distributed state of the given rank (1..4) and Haar unitaries."""
    if rank is None:
        rank = int(rng.integers(1, 5))
    L = rng.standard_normal((4, rank)) + 1j * rng.standard_normal((4, rank))
    return QnfgModel.from_factor(L, haar_unitary(rng), haar_unitary(rng))


# -- measurements and beliefs -------------------------------------------------

def measurement_ops(m: QnfgModel, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Measurement matrices {O_{i,0}, O_{i,1}} for variable ``i``."""
    if i in (1, 2):
        return E[0].copy(), E[1].copy()
    if i == 3:
        return E[0] @ m.u1, E[1] @ m.u1
    if i == 4:
        return E[0] @ m.u2, E[1] @ m.u2
    raise BadIndex(f"variable index must be 1..4, got {i!r}")


def pair_belief(m: QnfgModel, i: int, j: int) -> np.ndarray:
    """beta_ij(xi, xj) = Tr((A_{i,xi} (x) B_{j,xj}) rho (A (x) B)^H); i on qubit A."""
    A, B = measurement_ops(m, i), measurement_ops(m, j)
    out = np.empty((2, 2))
    for xi, xj in product((0, 1), repeat=2):
        op = np.kron(A[xi], B[xj])
        out[xi, xj] = np.trace(op @ m.rho @ op.conj().T).real
    return out


def quantum_beliefs(m: QnfgModel) -> BeliefCollection:
    return BeliefCollection.from_pairs([pair_belief(m, i, j) for i, j in PAIRS])


# -- SQMF ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Sqmf:
    """Kernel q[x, x'] over x, x' in {0,1}^4, flat index 8 x1 + 4 x2 + 2 x3 + x4."""

    kernel: np.ndarray

    def __post_init__(self):
        k = _frozen(self.kernel)
        if k.shape != (16, 16):
            raise InvalidModel(f"SQMF kernel must be 16x16, got {k.shape}")
        object.__setattr__(self, "kernel", k)

    def tensor(self) -> np.ndarray:
        """View as q[x1, x2, x3, x4, x1', x2', x3', x4']."""
        return self.kernel.reshape((2,) * 8)


def build_sqmf(m: QnfgModel) -> Sqmf:
    """q = rho[x1x2, x1'x2'] U1[x3,x1] U1*[x3',x1'] U2[x4,x2] U2*[x4',x2'] [x3=x3'] [x4=x4']."""
    r = m.rho.reshape(2, 2, 2, 2)
    d = np.eye(2)
    q = np.einsum("abAB,ca,CA,db,DB,cC,dD->abcdABCD",
                  r, m.u1, m.u1.conj(), m.u2, m.u2.conj(), d, d)
    return Sqmf(q.reshape(16, 16))


@dataclass(frozen=True)
class SqmfReport:
    ok: bool
    violations: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def __bool__(self):
        return self.ok


def validate_sqmf(q: Sqmf, tol: float = PSD_TOL) -> SqmfReport:
    k = q.kernel
    out = []
    herm = float(np.max(np.abs(k - k.conj().T)))
    if herm > tol:
        out.append(("hermitian", herm))
    lam = float(np.linalg.eigvalsh((k + k.conj().T) / 2)[0])
    if lam < -tol:
        out.append(("psd", -lam))
    total = k.sum()
    dev = float(abs(total - 1))
    if dev > tol:
        out.append(("normalization", dev))
    return SqmfReport(not out, tuple(out))


def _subset(I) -> tuple[int, ...]:
    I = tuple(sorted(set(int(i) for i in I)))
    if not I or any(i not in (1, 2, 3, 4) for i in I):
        raise BadIndex(f"subset must be a nonempty subset of {{1, 2, 3, 4}}, got {I}")
    return I


def kernel_marginal(q: Sqmf, I) -> np.ndarray:
    """q_I[x_I, x_I'] with complement variables summed (unprimed and primed alike).

    Returned with shape (2^|I|, 2^|I|); variables in increasing order.
    """
    I = _subset(I)
    drop = tuple(v - 1 for v in range(1, 5) if v not in I)
    drop = drop + tuple(d + 4 for d in drop)
    m = q.tensor().sum(axis=drop) if drop else q.tensor()
    n = 2 ** len(I)
    return m.reshape(n, n)


def classicable(q: Sqmf, I, tol: float = 1e-10) -> bool:
    m = kernel_marginal(q, I)
    off = m - np.diag(np.diag(m))
    return bool(np.max(np.abs(off)) <= tol)


def off_diagonal_magnitude(q: Sqmf, I) -> float:
    m = kernel_marginal(q, I)
    return float(np.max(np.abs(m - np.diag(np.diag(m)))))


def classical_marginal(q: Sqmf, I, tol: float = 1e-10) -> np.ndarray:
    """PMF p(x_I) = q_I(x_I, x_I), shaped (2,) * |I| in increasing variable order."""
    I = _subset(I)
    if not classicable(q, I, tol):
        raise NotClassicable(f"variables {I} are not jointly classicable")
    diag = np.diag(kernel_marginal(q, I))
    if np.max(np.abs(diag.imag)) > 1e-12:
        raise NotClassicable("marginal diagonal has a non-negligible imaginary part")
    return diag.real.reshape((2,) * len(I))


def sqmf_beliefs(q: Sqmf) -> BeliefCollection:
    """K-pair beliefs read off the SQMF (oriented like :data:`PAIRS`)."""
    pairs = []
    for i, j in PAIRS:
        t = classical_marginal(q, (i, j))
        pairs.append(t if i < j else t.T)
    return BeliefCollection.from_pairs(pairs)


# -- parameter charts used by the searches ------------------------------------
#
# unitary: 4 reals (theta, phi, alpha, beta) via :func:`unitary_chart`
# pure state: 8 reals, psi = w[:4] + i w[4:]
# mixed state: 16 reals filling a lower-triangular L (4 diagonal, 6 real and
# 6 imaginary strictly-lower entries); rho = L L^H / tr

_TRIL = np.tril_indices(4, -1)
CHART_SIZE = {"pure": 8, "mixed": 16}


def unitaries_from_params(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float).reshape(-1, 4)
    theta, phi, alpha, beta = t.T
    c, s = np.cos(theta), np.sin(theta)
    u = np.empty((t.shape[0], 2, 2), dtype=complex)
    u[:, 0, 0] = c * np.exp(1j * alpha)
    u[:, 0, 1] = s * np.exp(1j * beta)
    u[:, 1, 0] = -s * np.exp(-1j * beta)
    u[:, 1, 1] = c * np.exp(-1j * alpha)
    return u * np.exp(1j * phi)[:, None, None]


def state_factor_from_params(w: np.ndarray, kind: str) -> np.ndarray:
    """(n, 4, r) factor L with rho proportional to L L^H (r = 1 pure, 4 mixed)."""
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    if kind == "pure":
        return (w[:, :4] + 1j * w[:, 4:8])[:, :, None]
    if kind == "mixed":
        L = np.zeros((n, 4, 4), dtype=complex)
        L[:, np.arange(4), np.arange(4)] = w[:, :4]
        L[:, _TRIL[0], _TRIL[1]] = w[:, 4:10] + 1j * w[:, 10:16]
        return L
    raise ValueError(f"unknown state chart {kind!r}")


def model_from_params(w: np.ndarray, kind: str) -> QnfgModel:
    """Single model from a flat parameter vector (state chart then U1 then U2)."""
    w = np.asarray(w, dtype=float).reshape(1, -1)
    k = CHART_SIZE[kind]
    L = state_factor_from_params(w[:, :k], kind)[0]
    u = unitaries_from_params(w[:, k:k + 8].reshape(2, 4))
    return QnfgModel.from_factor(L, u[0], u[1])
