"""Optimizers and verifiers for the CHSH-type bounds.

Classical searches live on products of probability simplices.  They run
Adam on softmax logits first and then polish on the sphere chart
``p = w**2 / |w|**2``, which reaches faces of the simplex exactly (the
classical optimum has zeros).  Quantum searches use the state/unitary
charts from :mod:`chsh_atlas.quantum`.  Gradients are central differences
throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .beliefs import corr_chsh, pcc
from .factor_graphs import (JointPmf, beliefs_of, build_markov_chain, induced_pmf, marginal,
                            pair_marginal)
from .quantum import (CHART_SIZE, QnfgModel, build_sqmf, model_from_params, quantum_beliefs,
                      sqmf_beliefs, state_factor_from_params, unitaries_from_params)
from .search import SearchConfig, adam_minimize, initial_points, pick_best, rng_for

__all__ = [
    "SearchConfig", "OptResult", "maximize_classical_chsh", "verify_strictness",
    "maximize_quantum_chsh", "verify_markov_product", "verify_markov_monotonicity",
    "find_quantum_monotonicity_violation", "maximize_markov_variant", "random_chain",
    "TSIRELSON",
]

TSIRELSON = 2 * math.sqrt(2)
CHSH_SIGNS = np.array([1.0, 1.0, 1.0, -1.0])


@dataclass
class OptResult:
    value: float
    argument: object
    trace: np.ndarray                  # best value reached by each restart
    history: np.ndarray = field(repr=False, default=None)  # (iterations, restarts)
    config: SearchConfig | None = None
    extra: dict = field(default_factory=dict)

    def trace_rows(self):
        """(restart, iteration, objective) rows for CSV export."""
        if self.history is None:
            return []
        it, rs = self.history.shape
        return [(r, i, float(self.history[i, r])) for r in range(rs) for i in range(it)]


def _interior_penalty(m0: np.ndarray, cfg: SearchConfig) -> np.ndarray:
    lo = np.maximum(cfg.eps - m0, 0.0)
    hi = np.maximum(m0 - (1.0 - cfg.eps), 0.0)
    return cfg.penalty * np.sum(lo * lo + hi * hi, axis=1)


# -- simplex-block machinery ----------------------------------------------------

def _softmax_blocks(z: np.ndarray, sizes: Sequence[int]) -> list[np.ndarray]:
    out, s = [], 0
    for k in sizes:
        blk = z[:, s:s + k]
        e = np.exp(blk - blk.max(axis=1, keepdims=True))
        out.append(e / e.sum(axis=1, keepdims=True))
        s += k
    return out


def _sphere_blocks(w: np.ndarray, sizes: Sequence[int]) -> list[np.ndarray]:
    out, s = [], 0
    for k in sizes:
        blk = w[:, s:s + k] ** 2
        out.append(blk / blk.sum(axis=1, keepdims=True))
        s += k
    return out


def _simplex_search(objective: Callable[[list[np.ndarray]], tuple[np.ndarray, np.ndarray]],
                    sizes: Sequence[int], cfg: SearchConfig, purpose: str):
    """Maximise ``objective(blocks) -> (value, m0)`` over products of simplices.

    Returns ``(blocks of the best restart, per-restart best values, history)``.
    """
    d = int(sum(sizes))

    def loss(blocks):
        val, m0 = objective(blocks)
        return -val + _interior_penalty(m0, cfg)

    z0 = initial_points(cfg, purpose, lambda rng: rng.standard_normal(d))
    stage1 = adam_minimize(lambda z: loss(_softmax_blocks(z, sizes)), z0, cfg.iterations,
                           cfg.lr_start, cfg.lr_end, cfg.fd_step)
    blocks = _softmax_blocks(stage1.x, sizes)
    if cfg.polish_iterations <= 0:
        return blocks, -stage1.value, -stage1.history
    w0 = np.concatenate([np.sqrt(b) for b in blocks], axis=1)
    stage2 = adam_minimize(lambda w: loss(_sphere_blocks(w, sizes)), w0, cfg.polish_iterations,
                           cfg.polish_lr_start, cfg.polish_lr_end, cfg.fd_step)
    keep = stage2.value <= stage1.value
    polished = _sphere_blocks(stage2.x, sizes)
    blocks = [np.where(keep[:, None], b2, b1) for b1, b2 in zip(blocks, polished)]
    best = np.minimum(stage1.value, stage2.value)
    history = np.concatenate([stage1.history, np.minimum(stage2.history, stage1.value[None, :])])
    return blocks, -best, -history


def _chsh_from_pmfs(P: np.ndarray, signs=CHSH_SIGNS):
    corr, m0 = kernels.pair_corr(np.ascontiguousarray(P), kernels.K_PAIRS)
    return corr @ signs, m0


# -- classical maximum ----------------------------------------------------------

def maximize_classical_chsh(cfg: SearchConfig | None = None, sense: str = "max",
                            family: str = "joint") -> OptResult:
    """Extremise CorrCHSH over joint PMFs (``family="joint"``) or product PMFs."""
    cfg = cfg or SearchConfig()
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    sgn = 1.0 if sense == "max" else -1.0
    if family == "joint":
        sizes = [16]

        def to_pmf(blocks):
            return blocks[0]
    elif family == "product":
        sizes = [2, 2, 2, 2]

        def to_pmf(blocks):
            a, b, c, d = blocks
            return np.einsum("na,nb,nc,nd->nabcd", a, b, c, d).reshape(-1, 16)
    else:
        raise ValueError("family must be 'joint' or 'product'")

    def objective(blocks):
        val, m0 = _chsh_from_pmfs(to_pmf(blocks))
        return sgn * val, m0

    blocks, values, history = _simplex_search(objective, sizes, cfg, f"classical-{sense}-{family}")
    P = to_pmf(blocks)
    k = pick_best(-values)
    pmf = JointPmf.from_weights(P[k])
    value = corr_chsh(beliefs_of(pmf))
    trace = sgn * values
    return OptResult(value, pmf, trace, sgn * history, cfg, {"sense": sense, "family": family})


@dataclass(frozen=True)
class StrictnessReport:
    ok: bool
    samples: int
    max_sample: float
    max_optimized: float | None
    bound: float = TSIRELSON

    @property
    def margin(self) -> float:
        top = max(self.max_sample, self.max_optimized or 0.0)
        return self.bound - top


def sample_pmfs(rng: np.random.Generator, n: int) -> np.ndarray:
    """Mix of flat and sparse Dirichlet draws (sparse ones probe the faces)."""
    alphas = np.where(rng.random(n) < 0.5, 1.0, 0.1)
    g = rng.gamma(alphas[:, None], size=(n, 16))
    g = np.maximum(g, 1e-300)
    return g / g.sum(axis=1, keepdims=True)


def classical_sample_extremes(cfg: SearchConfig, samples: int = 100_000) -> tuple[float, float]:
    """max and min CorrCHSH over seeded random joint PMFs with interior singles."""
    P = sample_pmfs(rng_for(cfg.seed, "strictness"), samples)
    val, m0 = _chsh_from_pmfs(P)
    ok = np.all((m0 >= 1e-9) & (m0 <= 1 - 1e-9), axis=1)
    return float(val[ok].max()), float(val[ok].min())


def verify_strictness(cfg: SearchConfig | None = None, samples: int = 100_000,
                      optimized: Sequence[float] = (), margin: float = 1e-6) -> StrictnessReport:
    """No sampled or supplied optimised |CorrCHSH| reaches 2 sqrt 2 - margin."""
    cfg = cfg or SearchConfig()
    hi, lo = classical_sample_extremes(cfg, samples)
    top = max(abs(hi), abs(lo))
    opt = max((abs(v) for v in optimized), default=None)
    worst = max(top, opt or 0.0)
    return StrictnessReport(worst < TSIRELSON - margin, samples, top, opt)


# -- quantum maximum --------------------------------------------------------------

def _corr_from_tables(t: np.ndarray):
    """PCCs and x=0 single marginals of K-pair tables (n, 4, 2, 2)."""
    m0 = np.stack([t[:, 0, 0].sum(-1), t[:, 0, :, 0].sum(-1), t[:, 2, 0].sum(-1), t[:, 1, :, 0].sum(-1)], axis=1)
    rows = t.sum(axis=3)
    cols = t.sum(axis=2)
    det = t[:, :, 0, 0] * t[:, :, 1, 1] - t[:, :, 0, 1] * t[:, :, 1, 0]
    var = rows[..., 0] * rows[..., 1] * cols[..., 0] * cols[..., 1]
    corr = np.where(var > 0, det / np.sqrt(np.where(var > 0, var, 1.0)), 0.0)
    return corr, m0


def _quantum_tables(w: np.ndarray, mode: str, fixed_unitaries: bool = False) -> np.ndarray:
    if mode == "product":
        a = w[:, 0:2] + 1j * w[:, 2:4]
        b = w[:, 4:6] + 1j * w[:, 6:8]
        L = np.einsum("na,nb->nab", a, b).reshape(-1, 4, 1)
        k = 8
    else:
        k = CHART_SIZE[mode]
        L = state_factor_from_params(w[:, :k], mode)
    if fixed_unitaries:
        u = np.broadcast_to(np.eye(2, dtype=complex), (w.shape[0], 2, 2, 2))
    else:
        u = unitaries_from_params(w[:, k:k + 8].reshape(-1, 4)).reshape(-1, 2, 2, 2)
    return kernels.quantum_tables(np.ascontiguousarray(L), np.ascontiguousarray(u[:, 0]),
                                  np.ascontiguousarray(u[:, 1]))


def _model_from(w: np.ndarray, mode: str, fixed_unitaries: bool = False) -> QnfgModel:
    if mode == "product":
        a = w[0:2] + 1j * w[2:4]
        b = w[4:6] + 1j * w[6:8]
        L = np.kron(a, b).reshape(4, 1)
        u = unitaries_from_params(w[8:16].reshape(2, 4))
        model = QnfgModel.from_factor(L, u[0], u[1])
    else:
        model = model_from_params(w, mode)
    if fixed_unitaries:
        model = QnfgModel(model.rho, np.eye(2), np.eye(2))
    return model


def _quantum_search(score: Callable[[np.ndarray, np.ndarray], np.ndarray], mode: str, cfg: SearchConfig,
                    purpose: str, fixed_unitaries: bool = False):
    k = 8 if mode == "product" else CHART_SIZE[mode]
    d = k + 8

    def loss(w):
        corr, m0 = _corr_from_tables(_quantum_tables(w, mode, fixed_unitaries))
        return -score(corr, m0) + _interior_penalty(m0, cfg)

    def sample(rng):
        return np.concatenate([rng.standard_normal(k), rng.uniform(-math.pi, math.pi, 8)])

    x0 = initial_points(cfg, purpose, sample)
    run = adam_minimize(loss, x0, cfg.iterations, 0.05, 1e-5, cfg.fd_step)
    best = pick_best(run.value)
    return run, _model_from(run.x[best], mode, fixed_unitaries)


def maximize_quantum_chsh(cfg: SearchConfig | None = None, mode: str = "pure") -> OptResult:
    """Maximise CorrCHSH over models; ``mode`` is "pure", "mixed" or "product"."""
    cfg = cfg or SearchConfig()
    if mode not in ("pure", "mixed", "product"):
        raise ValueError("mode must be 'pure', 'mixed' or 'product'")
    run, model = _quantum_search(lambda c, m0: c @ CHSH_SIGNS, mode, cfg, f"quantum-{mode}")
    value = corr_chsh(quantum_beliefs(model))
    return OptResult(value, model, -run.value, -run.history, cfg, {"mode": mode})


def monotonicity_gap(model: QnfgModel) -> float:
    b = quantum_beliefs(model)
    return abs(pcc(b, "34")) - abs(pcc(b, "12"))


def find_quantum_monotonicity_violation(cfg: SearchConfig | None = None,
                                        identity_unitaries: bool = False) -> OptResult:
    """Maximise |Corr(b34)| - |Corr(b12)| over pure-state models."""
    cfg = cfg or SearchConfig()

    def score(c, m0):
        return np.abs(c[:, 3]) - np.abs(c[:, 0])

    tag = "monotonicity-identity" if identity_unitaries else "monotonicity"
    run, model = _quantum_search(score, "pure", cfg, tag, fixed_unitaries=identity_unitaries)
    gap = monotonicity_gap(model)
    sq = sqmf_beliefs(build_sqmf(model))
    gap_sqmf = abs(pcc(sq, "34")) - abs(pcc(sq, "12"))
    return OptResult(gap, model, -run.value, -run.history, cfg,
                     {"gap_sqmf": gap_sqmf, "found": gap > 1e-6})


# -- Markov chains ------------------------------------------------------------------

def random_chain(rng: np.random.Generator, alpha: float = 1.0):
    m12 = rng.dirichlet(np.full(4, alpha)).reshape(2, 2)
    m41 = rng.dirichlet(np.full(2, alpha), size=2)
    m32 = rng.dirichlet(np.full(2, alpha), size=2)
    return build_markov_chain(m12, m41, m32)


def _chain_correlations(chain):
    b = beliefs_of(induced_pmf(chain))
    return [pcc(b, p) for p in ("12", "14", "32", "34")]


@dataclass(frozen=True)
class MarkovReport:
    ok: bool
    chains: int
    max_deviation: float = 0.0
    violations: int = 0
    max_excess: float = 0.0


def verify_markov_product(cfg: SearchConfig | None = None, chains: int = 1000,
                          tol: float = 1e-12) -> MarkovReport:
    """Corr(b34) = Corr(b32) Corr(b12) Corr(b14) on seeded random chains."""
    cfg = cfg or SearchConfig()
    worst = 0.0
    for n in range(chains):
        c12, c14, c32, c34 = _chain_correlations(random_chain(rng_for(cfg.seed, "markov-product", n)))
        worst = max(worst, abs(c34 - c32 * c12 * c14))
    return MarkovReport(worst <= tol, chains, max_deviation=worst)


def verify_markov_monotonicity(cfg: SearchConfig | None = None, chains: int = 1000,
                               tol: float = 1e-12) -> MarkovReport:
    """|Corr(b34)| <= |Corr(b12)| <= 1 on seeded random chains."""
    cfg = cfg or SearchConfig()
    count, excess = 0, 0.0
    for n in range(chains):
        c12, _, _, c34 = _chain_correlations(random_chain(rng_for(cfg.seed, "markov-monotone", n)))
        e = max(abs(c34) - abs(c12), abs(c12) - 1.0)
        if e > tol:
            count += 1
        excess = max(excess, e)
    return MarkovReport(count == 0, chains, violations=count, max_excess=excess)


def _chain_pmfs(blocks) -> np.ndarray:
    m12, a0, a1, b0, b1 = blocks
    m41 = np.stack([a0, a1], axis=1)   # [n, x1, x4]
    m32 = np.stack([b0, b1], axis=1)   # [n, x2, x3]
    p = np.einsum("nab,nad,nbc->nabcd", m12.reshape(-1, 2, 2), m41, m32)
    return p.reshape(-1, 16)


def markov_variant_value(pmf) -> float:
    """Corr(b12) + Corr(b24) + Corr(b13) - Corr(b34) from a full joint PMF."""
    def corr(i, j):
        t = pair_marginal(pmf, (i, j))
        si, sj = marginal(pmf, {i}), marginal(pmf, {j})
        return float(np.linalg.det(t)) / math.sqrt(si[0] * si[1] * sj[0] * sj[1])

    return corr(1, 2) + corr(2, 4) + corr(1, 3) - corr(3, 4)


def maximize_markov_variant(cfg: SearchConfig | None = None) -> OptResult:
    cfg = cfg or SearchConfig()

    def objective(blocks):
        corr, m0 = kernels.pair_corr(np.ascontiguousarray(_chain_pmfs(blocks)), kernels.MARKOV_VARIANT_PAIRS)
        return corr @ CHSH_SIGNS, m0

    blocks, values, history = _simplex_search(objective, [4, 2, 2, 2, 2], cfg, "markov-variant")
    k = pick_best(-values)
    m12, a0, a1, b0, b1 = (blk[k] for blk in blocks)
    chain = build_markov_chain(m12.reshape(2, 2) / m12.sum(), np.stack([a0, a1]), np.stack([b0, b1]))
    value = markov_variant_value(induced_pmf(chain))
    return OptResult(value, chain, values, history, cfg)
