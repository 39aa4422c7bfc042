"""Batched evaluation kernels used by the optimizers.

Each kernel has a numpy implementation (``*_np``) and a numba one
(``*_nb``); the public name is bound to whichever backend
:mod:`chsh_atlas._accel` selected.  Both return identical results up to
floating-point summation order.
"""

from __future__ import annotations

import numpy as np

from ._accel import HAVE_NUMBA, njit, prange

# bit masks: configuration index x has x_i = (x >> (4 - i)) & 1
_ZERO_MASK = np.array([[((x >> (3 - v)) & 1) == 0 for v in range(4)] for x in range(16)], dtype=float)

K_PAIRS = np.array([[0, 1], [0, 3], [2, 1], [2, 3]], dtype=np.int64)
MARKOV_VARIANT_PAIRS = np.array([[0, 1], [1, 3], [0, 2], [2, 3]], dtype=np.int64)


def pair_corr_np(p: np.ndarray, pairs: np.ndarray):
    """PCCs of rows of ``p`` (n, 16) on ``pairs`` (k, 2) of 0-based variables.

    Returns ``(corr (n, k), m0 (n, 4))`` with ``m0[:, i] = P(x_{i+1} = 0)``.
    A vanishing variance yields correlation 0.
    """
    m0 = p @ _ZERO_MASK
    joint = p @ (_ZERO_MASK[:, pairs[:, 0]] * _ZERO_MASK[:, pairs[:, 1]])
    mi, mj = m0[:, pairs[:, 0]], m0[:, pairs[:, 1]]
    var = mi * (1.0 - mi) * mj * (1.0 - mj)
    det = joint - mi * mj
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.where(var > 0, det / np.sqrt(np.where(var > 0, var, 1.0)), 0.0)
    return corr, m0


@njit(cache=True, parallel=True)
def pair_corr_nb(p, pairs):
    n = p.shape[0]
    k = pairs.shape[0]
    corr = np.zeros((n, k))
    m0 = np.zeros((n, 4))
    for r in prange(n):
        for x in range(16):
            for v in range(4):
                if ((x >> (3 - v)) & 1) == 0:
                    m0[r, v] += p[r, x]
        for q in range(k):
            a = pairs[q, 0]
            b = pairs[q, 1]
            c = 0.0
            for x in range(16):
                if ((x >> (3 - a)) & 1) == 0 and ((x >> (3 - b)) & 1) == 0:
                    c += p[r, x]
            mi = m0[r, a]
            mj = m0[r, b]
            var = mi * (1.0 - mi) * mj * (1.0 - mj)
            if var > 0.0:
                corr[r, q] = (c - mi * mj) / np.sqrt(var)
    return corr, m0


def quantum_tables_np(L: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """K-pair tables of rho = L L^H / tr for a batch of models.

    ``L`` is (n, 4, r) complex, ``u1``/``u2`` are (n, 2, 2).  Output is
    (n, 4, 2, 2) in pair order 12, 14, 32, 34.
    """
    n, _, r = L.shape
    t = L.reshape(n, 2, 2, r)
    norm = np.sum(np.abs(L) ** 2, axis=(1, 2))
    ta = np.einsum("npa,nabc->npbc", u1, t)  # U1 on qubit A
    out = np.empty((n, 4, 2, 2))
    out[:, 0] = np.sum(np.abs(t) ** 2, axis=3)
    out[:, 1] = np.sum(np.abs(np.einsum("nqb,nabc->naqc", u2, t)) ** 2, axis=3)
    out[:, 2] = np.sum(np.abs(ta) ** 2, axis=3)
    out[:, 3] = np.sum(np.abs(np.einsum("nqb,npbc->npqc", u2, ta)) ** 2, axis=3)
    return out / norm[:, None, None, None]


@njit(cache=True, parallel=True)
def quantum_tables_nb(L, u1, u2):
    n = L.shape[0]
    r = L.shape[2]
    out = np.zeros((n, 4, 2, 2))
    for m in prange(n):
        norm = 0.0
        for i in range(4):
            for c in range(r):
                norm += L[m, i, c].real ** 2 + L[m, i, c].imag ** 2
        for k in range(4):
            use1 = k >= 2
            use2 = k == 1 or k == 3
            for p in range(2):
                for q in range(2):
                    acc = 0.0
                    for c in range(r):
                        s = 0j
                        for a in range(2):
                            wa = u1[m, p, a] if use1 else (1.0 + 0j if a == p else 0j)
                            if wa == 0:
                                continue
                            for b in range(2):
                                wb = u2[m, q, b] if use2 else (1.0 + 0j if b == q else 0j)
                                if wb == 0:
                                    continue
                                s += wa * wb * L[m, 2 * a + b, c]
                        acc += s.real ** 2 + s.imag ** 2
                    out[m, k, p, q] = acc / norm
    return out


if HAVE_NUMBA:
    pair_corr = pair_corr_nb
    quantum_tables = quantum_tables_nb
else:
    pair_corr = pair_corr_np
    quantum_tables = quantum_tables_np
