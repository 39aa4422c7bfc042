"""The three classical normal factor graphs on four binary edges.

Inference is exact enumeration over the 16 configurations.  A
configuration ``(x1, x2, x3, x4)`` has flat index ``8*x1 + 4*x2 + 2*x3 + x4``,
which is also the C-order index of a ``(2, 2, 2, 2)`` table.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .beliefs import PAIRS, BeliefCollection
from .errors import AllZeroGlobalFunction, InvalidTable, NotNormalized, NotStochastic

STOCHASTIC_TOL = 1e-12
CONFIGS: tuple[tuple[int, int, int, int], ...] = tuple(product((0, 1), repeat=4))


def _table(values, arity: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (2,) * arity:
        raise InvalidTable(f"table {name} has shape {arr.shape}, expected {(2,) * arity}")
    bad = np.argwhere(~np.isfinite(arr) | (arr < 0))
    if bad.size:
        idx = tuple(int(v) for v in bad[0])
        raise InvalidTable(f"table {name} has invalid entry {arr[idx]!r} at {list(idx)}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FactorNode:
    name: str
    edges: tuple[int, ...]
    table: np.ndarray


@dataclass(frozen=True)
class Snfg:
    """A normal factor graph whose edges are the variables x1..x4."""

    kind: str
    nodes: tuple[FactorNode, ...]
    edges: tuple[int, ...] = (1, 2, 3, 4)

    def __post_init__(self):
        for node in self.nodes:
            if node.table.ndim != len(node.edges):
                raise InvalidTable(f"node {node.name}: arity {node.table.ndim} != {len(node.edges)} edges")
        for e in self.edges:
            deg = self.degree(e)
            if deg not in (1, 2):
                raise InvalidTable(f"edge x{e} is incident on {deg} nodes")

    def degree(self, edge: int) -> int:
        return sum(edge in n.edges for n in self.nodes)

    def is_half_edge(self, edge: int) -> bool:
        return self.degree(edge) == 1

    def node(self, name: str) -> FactorNode:
        return next(n for n in self.nodes if n.name == name)

    def global_table(self) -> np.ndarray:
        """Global function on the whole (2, 2, 2, 2) grid."""
        letters = "abcd"
        spec = ",".join("".join(letters[e - 1] for e in n.edges) for n in self.nodes)
        return np.einsum(f"{spec}->abcd", *(n.table for n in self.nodes))


@dataclass(frozen=True)
class Configuration:
    x: tuple[int, int, int, int]

    def __post_init__(self):
        x = tuple(int(v) for v in self.x)
        if len(x) != 4 or any(v not in (0, 1) for v in x):
            raise InvalidTable(f"invalid configuration {self.x!r}")
        object.__setattr__(self, "x", x)

    @property
    def index(self) -> int:
        x1, x2, x3, x4 = self.x
        return 8 * x1 + 4 * x2 + 2 * x3 + x4


@dataclass(frozen=True, eq=False)
class JointPmf:
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float).reshape(2, 2, 2, 2)
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise InvalidTable("PMF entries must be finite and nonnegative")
        if abs(t.sum() - 1.0) > 1e-12:
            raise NotNormalized(f"PMF sums to {t.sum()!r}")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def from_weights(cls, w) -> "JointPmf":
        w = np.asarray(w, dtype=float).reshape(2, 2, 2, 2)
        return cls(w / w.sum())

    def flat(self) -> np.ndarray:
        return self.table.ravel()

    def __call__(self, x) -> float:
        return float(self.table[tuple(x)])


def _nonzero_or_raise(g: Snfg) -> Snfg:
    if partition_function(g) <= 0:
        raise AllZeroGlobalFunction("the global function vanishes on every configuration")
    return g


def build_cycle_graph(f12, f14, f32, f34) -> Snfg:
    """Cycle x1-x2-x3-x4 with factors f12[x1,x2], f14[x1,x4], f32[x3,x2], f34[x3,x4]."""
    nodes = (
        FactorNode("f12", (1, 2), _table(f12, 2, "f12")),
        FactorNode("f14", (1, 4), _table(f14, 2, "f14")),
        FactorNode("f32", (3, 2), _table(f32, 2, "f32")),
        FactorNode("f34", (3, 4), _table(f34, 2, "f34")),
    )
    return _nonzero_or_raise(Snfg("cycle", nodes))


def _check_stochastic(m: np.ndarray, name: str) -> None:
    sums = m.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > STOCHASTIC_TOL):
        raise NotStochastic(f"{name} rows sum to {sums.tolist()}")


def build_markov_chain(m12, m4given1, m3given2) -> Snfg:
    """Chain x4 - x1 - x2 - x3; conditionals are indexed [conditioning, outcome]."""
    m12 = _table(m12, 2, "m12")
    m41 = _table(m4given1, 2, "m4given1")
    m32 = _table(m3given2, 2, "m3given2")
    if abs(m12.sum() - 1.0) > STOCHASTIC_TOL:
        raise NotNormalized(f"m12 sums to {m12.sum()!r}")
    _check_stochastic(m41, "m4given1")
    _check_stochastic(m32, "m3given2")
    nodes = (
        FactorNode("M4|1", (1, 4), m41),
        FactorNode("M12", (1, 2), m12),
        FactorNode("M3|2", (2, 3), m32),
    )
    return _nonzero_or_raise(Snfg("markov", nodes))


def build_single_node(f) -> Snfg:
    node = FactorNode("f", (1, 2, 3, 4), _table(f, 4, "f"))
    return _nonzero_or_raise(Snfg("single", (node,)))


def global_value(g: Snfg, c) -> float:
    x = c.x if isinstance(c, Configuration) else Configuration(tuple(c)).x
    value = 1.0
    for n in g.nodes:
        value *= float(n.table[tuple(x[e - 1] for e in n.edges)])
    return value


def partition_function(g: Snfg) -> float:
    return float(sum(global_value(g, c) for c in CONFIGS))


def induced_pmf(g: Snfg) -> JointPmf:
    gt = g.global_table()
    z = gt.sum()
    if z <= 0:
        raise AllZeroGlobalFunction("partition function is zero")
    return JointPmf(gt / z)


def marginal(p, subset: Iterable[int]) -> np.ndarray:
    """Marginal table over ``subset``; axes follow increasing variable index."""
    t = p.table if isinstance(p, JointPmf) else np.asarray(p).reshape(2, 2, 2, 2)
    keep = sorted(set(int(i) for i in subset))
    if any(i not in (1, 2, 3, 4) for i in keep):
        raise ValueError(f"subset {keep} is not contained in {{1, 2, 3, 4}}")
    drop = tuple(i for i in range(4) if i + 1 not in keep)
    return t.sum(axis=drop)


def pair_marginal(p, pair: Sequence[int]) -> np.ndarray:
    """2x2 marginal with rows indexed by ``pair[0]``."""
    i, j = pair
    m = marginal(p, {i, j})
    return m if i < j else m.T


def beliefs_of(p) -> BeliefCollection:
    pairs = [pair_marginal(p, pr) for pr in PAIRS]
    singles = [marginal(p, {i}) for i in range(1, 5)]
    return BeliefCollection(pairs, singles)
