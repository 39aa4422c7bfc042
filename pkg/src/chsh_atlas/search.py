"""Seeded multi-start Adam with central-difference gradients.

Every restart draws from its own counter-based stream
(``Philox(SeedSequence([seed, purpose, restart]))``), so results do not
depend on how restarts are scheduled.  The optimizer works on a whole
batch of restarts at once: one objective call evaluates every restart at
its current point and at the ``2 d`` finite-difference probes.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    restarts: int = 64
    iterations: int = 2000
    polish_iterations: int = 500
    lr_start: float = 0.1
    lr_end: float = 0.01
    polish_lr_start: float = 1e-2
    polish_lr_end: float = 1e-6
    fd_step: float = 1e-6
    penalty: float = 1e3
    eps: float = 1e-6
    accept: float = 1e-9

    def __post_init__(self):
        if self.restarts < 1 or self.iterations < 1:
            raise ValueError("restarts and iterations must be at least 1")
        if not 0 < self.eps < 0.5:
            raise ValueError("eps must lie in (0, 0.5)")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")

    def with_(self, **changes) -> "SearchConfig":
        return replace(self, **changes)


def rng_for(seed: int, purpose: str, restart: int = 0) -> np.random.Generator:
    tag = zlib.crc32(purpose.encode())
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), tag, int(restart)])))


def initial_points(cfg: SearchConfig, purpose: str, sampler: Callable[[np.random.Generator], np.ndarray]) -> np.ndarray:
    return np.stack([sampler(rng_for(cfg.seed, purpose, r)) for r in range(cfg.restarts)])


def fd_gradient(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float):
    """Values and central-difference gradients of a batched objective.

    ``f`` maps (m, d) -> (m,).  Returns ``(f(x) (n,), grad (n, d))``.
    """
    n, d = x.shape
    eye = np.eye(d) * h
    probes = np.concatenate([x[:, None, :], x[:, None, :] + eye, x[:, None, :] - eye], axis=1)
    vals = f(probes.reshape(n * (2 * d + 1), d)).reshape(n, 2 * d + 1)
    grad = (vals[:, 1:d + 1] - vals[:, d + 1:]) / (2 * h)
    return vals[:, 0], grad


@dataclass
class AdamRun:
    x: np.ndarray          # best point per restart
    value: np.ndarray      # best value per restart
    history: np.ndarray    # (iterations, restarts): best-so-far value


def adam_minimize(f: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, iterations: int,
                  lr_start: float, lr_end: float, fd_step: float,
                  project: Callable[[np.ndarray], np.ndarray] | None = None) -> AdamRun:
    """Minimise ``f`` from every row of ``x0``; the learning rate decays geometrically."""
    x = np.array(x0, dtype=float)
    n = x.shape[0]
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    b1, b2, tiny = 0.9, 0.999, 1e-12
    decay = (lr_end / lr_start) ** (1.0 / max(iterations - 1, 1))
    best_x = x.copy()
    best_v = np.full(n, np.inf)
    history = np.empty((iterations, n))
    lr = lr_start
    for t in range(1, iterations + 1):
        val, g = fd_gradient(f, x, fd_step)
        better = val < best_v
        best_v = np.where(better, val, best_v)
        best_x[better] = x[better]
        history[t - 1] = best_v
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** t)
        vh = v / (1 - b2 ** t)
        x = x - lr * mh / (np.sqrt(vh) + tiny)
        if project is not None:
            x = project(x)
        lr *= decay
    final = f(x)
    better = final < best_v
    best_v = np.where(better, final, best_v)
    best_x[better] = x[better]
    history[-1] = best_v
    return AdamRun(best_x, best_v, history)


def pick_best(values: np.ndarray) -> int:
    """Index of the smallest value; ties go to the lowest restart index."""
    return int(np.flatnonzero(values == values.min())[0])
