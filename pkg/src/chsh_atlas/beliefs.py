"""Belief collections on the four-cycle K and the functionals defined on them.

A :class:`BeliefCollection` holds four 2x2 pairwise tables, one per pair of
``K = {12, 14, 32, 34}``, and four single-variable marginals.  Row indices
of a pairwise table belong to the first variable of the pair as written
(so the pair {2, 3} is stored as ``beta_32[x3, x2]``).

Entries may be floats or :class:`fractions.Fraction`; the latter keeps
constraint checks and vertex enumeration exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BadSigns, BadWeights, DegenerateMarginal, DisjointPairs, InvalidTable

PAIRS: tuple[tuple[int, int], ...] = ((1, 2), (1, 4), (3, 2), (3, 4))
PAIR_KEYS: tuple[str, ...] = ("12", "14", "32", "34")
DEFAULT_SIGNS: tuple[int, int, int, int] = (1, 1, 1, -1)
# One representative per odd pattern up to global sign; |S| <= 2 covers the rest.
SIGN_PATTERNS: tuple[tuple[int, int, int, int], ...] = (
    (1, 1, 1, -1),
    (1, 1, -1, 1),
    (1, -1, 1, 1),
    (-1, 1, 1, 1),
)
PCC_EPS = 1e-9

_PAIR_INDEX = {frozenset(p): k for k, p in enumerate(PAIRS)}


def pair_index(pair) -> int:
    """Position of ``pair`` in :data:`PAIRS`; accepts "32", (2, 3), 32, {2, 3}."""
    if isinstance(pair, (int, np.integer)):
        pair = str(int(pair))
    if isinstance(pair, str):
        pair = tuple(int(ch) for ch in pair)
    key = frozenset(int(v) for v in pair)
    if key not in _PAIR_INDEX:
        raise KeyError(f"{pair!r} is not a pair of K")
    return _PAIR_INDEX[key]


def _as_table(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=object)
    if arr.shape != shape:
        raise InvalidTable(f"expected shape {shape}, got {arr.shape}")
    if all(isinstance(v, (Fraction, int)) and not isinstance(v, bool) for v in arr.flat):
        arr = np.vectorize(Fraction, otypes=[object])(arr)
    else:
        arr = arr.astype(float)
        if not np.all(np.isfinite(arr)):
            raise InvalidTable("non-finite belief entry")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BeliefCollection:
    """Pairwise tables ``pairs[k]`` for ``PAIRS[k]`` and singles ``singles[i-1]``."""

    pairs: np.ndarray
    singles: np.ndarray

    def __post_init__(self):
        pairs = self.pairs
        if isinstance(pairs, Mapping):
            pairs = [pairs[k] for k in _ordered_keys(pairs)]
        singles = self.singles
        if isinstance(singles, Mapping):
            singles = [singles[k] for k in sorted(singles, key=lambda s: int(s))]
        singles = np.array(singles, dtype=object)
        if singles.shape == (4, 2, 2):  # diagonal matrices
            singles = np.array([[s[0, 0], s[1, 1]] for s in singles], dtype=object)
        p = _as_table(pairs, (4, 2, 2))
        s = _as_table(singles, (4, 2))
        if (p.dtype == object) != (s.dtype == object):
            # mixed exact/float input: fall back to floats everywhere
            p = _as_table(np.asarray(p, dtype=float), (4, 2, 2))
            s = _as_table(np.asarray(s, dtype=float), (4, 2))
        object.__setattr__(self, "pairs", p)
        object.__setattr__(self, "singles", s)

    @classmethod
    def from_pairs(cls, pairs) -> "BeliefCollection":
        """Derive the singles from row/column sums of the pairwise tables."""
        if isinstance(pairs, Mapping):
            pairs = [pairs[k] for k in _ordered_keys(pairs)]
        p = np.array(pairs, dtype=object)
        singles = [p[0].sum(axis=1), p[0].sum(axis=0), p[2].sum(axis=1), p[1].sum(axis=0)]
        return cls(p, singles)

    @property
    def exact(self) -> bool:
        return self.pairs.dtype == object

    def pair(self, pair) -> np.ndarray:
        return self.pairs[pair_index(pair)]

    def single(self, i: int) -> np.ndarray:
        return self.singles[i - 1]

    def single_matrix(self, i: int) -> np.ndarray:
        s = self.singles[i - 1]
        zero = Fraction(0) if self.exact else 0.0
        return np.array([[s[0], zero], [zero, s[1]]], dtype=self.singles.dtype)

    def as_float(self) -> "BeliefCollection":
        if not self.exact:
            return self
        return BeliefCollection(self.pairs.astype(float), self.singles.astype(float))

    def as_fraction(self) -> "BeliefCollection":
        if self.exact:
            return self
        conv = np.vectorize(lambda v: Fraction(float(v)), otypes=[object])
        return BeliefCollection(conv(self.pairs), conv(self.singles))

    def flat(self) -> np.ndarray:
        """Pairwise entries followed by singles, as a length-24 float vector."""
        return np.concatenate([self.pairs.astype(float).ravel(), self.singles.astype(float).ravel()])

    def allclose(self, other: "BeliefCollection", atol: float) -> bool:
        return bool(np.max(np.abs(self.flat() - other.flat())) <= atol)

    def __eq__(self, other):
        if not isinstance(other, BeliefCollection):
            return NotImplemented
        return bool(np.all(self.pairs == other.pairs) and np.all(self.singles == other.singles))

    def __hash__(self):
        return hash((tuple(self.pairs.ravel()), tuple(self.singles.ravel())))

    def __repr__(self):
        body = ", ".join(f"{k}={self.pairs[i].tolist()}" for i, k in enumerate(PAIR_KEYS))
        return f"BeliefCollection({body}, singles={self.singles.tolist()})"


def _ordered_keys(mapping: Mapping) -> list:
    keys = list(mapping)
    return sorted(keys, key=lambda k: pair_index(k))


# -- LM(K) -------------------------------------------------------------------

@dataclass(frozen=True)
class LmReport:
    member: bool
    violations: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def __bool__(self):
        return self.member


def _excess(value, tol):
    """Absolute deviation if above tol, else None (exact when inputs are)."""
    mag = abs(value)
    return mag if mag > tol else None


def validate_lm(b: BeliefCollection, tol: float = 1e-12) -> LmReport:
    """Check nonnegativity, normalization and pair-to-single consistency."""
    if not tol >= 0:
        raise ValueError("tol must be nonnegative")
    one = Fraction(1) if b.exact else 1.0
    out: list[tuple[str, float]] = []

    def add(desc, mag):
        if mag is not None:
            out.append((desc, mag if b.exact else float(mag)))

    for k, key in enumerate(PAIR_KEYS):
        t = b.pairs[k]
        for xi in range(2):
            for xj in range(2):
                v = t[xi, xj]
                if v < -tol:
                    add(f"negative entry beta_{key}[{xi},{xj}]", -v)
                elif v > one + tol:
                    add(f"entry above one beta_{key}[{xi},{xj}]", v - one)
        add(f"normalization beta_{key}", _excess(t.sum() - one, tol))
        i, j = PAIRS[k]
        for x in range(2):
            add(f"row sum beta_{key} vs beta_{i} at {x}", _excess(t[x, :].sum() - b.singles[i - 1][x], tol))
            add(f"column sum beta_{key} vs beta_{j} at {x}", _excess(t[:, x].sum() - b.singles[j - 1][x], tol))
    for i in range(1, 5):
        s = b.singles[i - 1]
        for x in range(2):
            if s[x] < -tol:
                add(f"negative entry beta_{i}[{x}]", -s[x])
        add(f"normalization beta_{i}", _excess(s.sum() - one, tol))
    return LmReport(not out, tuple(out))


def _marginal_of(b: BeliefCollection, k: int, var: int):
    i, j = PAIRS[k]
    t = b.pairs[k]
    return t.sum(axis=1) if var == i else t.sum(axis=0)


def pairwise_consistency(b: BeliefCollection, pair_a, pair_b, tol: float = 1e-12) -> bool:
    ka, kb = pair_index(pair_a), pair_index(pair_b)
    shared = set(PAIRS[ka]) & set(PAIRS[kb])
    if len(shared) != 1:
        raise DisjointPairs(f"pairs {PAIR_KEYS[ka]} and {PAIR_KEYS[kb]} do not share exactly one variable")
    (var,) = shared
    ma, mb = _marginal_of(b, ka, var), _marginal_of(b, kb, var)
    return all(abs(x - y) <= tol for x, y in zip(ma, mb))


# -- correlation functionals ------------------------------------------------

def _pcc_table(t, si, sj, eps: float) -> float:
    for s in (si, sj):
        if not (eps <= s[0] <= 1 - eps and eps <= s[1] <= 1 - eps):
            raise DegenerateMarginal(f"single marginal {list(map(float, s))} outside [{eps}, {1 - eps}]")
    det = t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0]
    return float(det) / math.sqrt(float(si[0] * si[1]) * float(sj[0] * sj[1]))


def pcc(b: BeliefCollection, pair, eps: float = PCC_EPS) -> float:
    """Pearson correlation of the pair via det(beta_ij)/sqrt(det beta_i det beta_j)."""
    k = pair_index(pair)
    i, j = PAIRS[k]
    return _pcc_table(b.pairs[k], b.singles[i - 1], b.singles[j - 1], eps)


def pcc_direct(table) -> float:
    """Covariance over the product of standard deviations for a 2x2 PMF.

    Independent of :func:`pcc`; used as its oracle.
    """
    t = np.asarray(table, dtype=float)
    vals = np.array([0.0, 1.0])
    pi, pj = t.sum(axis=1), t.sum(axis=0)
    mi, mj = pi @ vals, pj @ vals
    cov = sum(t[a, c] * (vals[a] - mi) * (vals[c] - mj) for a in range(2) for c in range(2))
    vi = pi @ (vals - mi) ** 2
    vj = pj @ (vals - mj) ** 2
    return float(cov / math.sqrt(vi * vj))


def correlations(b: BeliefCollection, eps: float = PCC_EPS) -> tuple[float, float, float, float]:
    return tuple(pcc(b, p, eps) for p in PAIRS)


def corr_chsh(b: BeliefCollection, eps: float = PCC_EPS) -> float:
    c12, c14, c32, c34 = correlations(b, eps)
    return c12 + c14 + c32 - c34


def _check_signs(signs) -> tuple[int, ...]:
    signs = tuple(int(s) for s in signs)
    if len(signs) != 4 or any(s not in (1, -1) for s in signs) or signs.count(-1) % 2 == 0:
        raise BadSigns(f"{signs!r} is not an odd sign pattern")
    return signs


def expectation(t) -> object:
    """E = sum (-1)^(xi+xj) beta(xi, xj)."""
    return t[0, 0] - t[0, 1] - t[1, 0] + t[1, 1]


def linear_chsh(b: BeliefCollection, signs: Sequence[int] = DEFAULT_SIGNS):
    signs = _check_signs(signs)
    total = sum(s * expectation(b.pairs[k]) for k, s in enumerate(signs))
    return total if b.exact else float(total)


def in_lm_chsh(b: BeliefCollection, eps: float = PCC_EPS, all_patterns: bool = True,
               tol: float = 1e-12) -> bool:
    """Membership in LM(K), strictly interior singles and |S| <= 2.

    ``all_patterns=False`` tests only the default pattern (minus on 34).
    """
    if not validate_lm(b, tol).member:
        return False
    for s in b.singles:
        if not (eps <= s[0] <= 1 - eps):
            return False
    patterns = SIGN_PATTERNS if all_patterns else (DEFAULT_SIGNS,)
    return all(abs(linear_chsh(b, p)) <= 2 + tol for p in patterns)


# -- vertices of LM(K) --------------------------------------------------------
#
# Coordinates y = (m1, m2, m3, m4, c12, c14, c32, c34) with m_i = beta_i(0) and
# c = beta_ij(0, 0).  A pair table is [[c, m_i - c], [m_j - c, 1 - m_i - m_j + c]].

def lm_inequalities() -> tuple[list[list[Fraction]], list[Fraction]]:
    """Rows (a, b) meaning a @ y <= b, sixteen in total."""
    rows, rhs = [], []
    for k, (i, j) in enumerate(PAIRS):
        ci = 4 + k

        def row(**coef):
            r = [Fraction(0)] * 8
            for name, v in coef.items():
                idx = {"c": ci, "mi": i - 1, "mj": j - 1}[name]
                r[idx] += v
            return r

        rows += [row(c=-1), row(c=1, mi=-1), row(c=1, mj=-1), row(c=-1, mi=1, mj=1)]
        rhs += [Fraction(0), Fraction(0), Fraction(0), Fraction(1)]
    return rows, rhs


def beliefs_from_coordinates(y: Sequence) -> BeliefCollection:
    m = list(y[:4])
    pairs = []
    for k, (i, j) in enumerate(PAIRS):
        c = y[4 + k]
        mi, mj = m[i - 1], m[j - 1]
        pairs.append([[c, mi - c], [mj - c, 1 - mi - mj + c]])
    singles = [[mi, 1 - mi] for mi in m]
    return BeliefCollection(pairs, singles)


def coordinates_of(b: BeliefCollection) -> tuple:
    return tuple(b.singles[i][0] for i in range(4)) + tuple(b.pairs[k][0, 0] for k in range(4))


def _rank(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rank, ncols = 0, len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [a - f * p for a, p in zip(m[r], m[rank])]
        rank += 1
    return rank


def _inverse(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(mat)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(mat)]
    for c in range(n):
        piv = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [v * inv for v in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [a - f * p for a, p in zip(aug[r], aug[c])]
    return [r[n:] for r in aug]


def double_description(a: list[list[Fraction]], b: list[Fraction]) -> list[tuple[Fraction, ...]]:
    """Vertices of the bounded polytope {y : a @ y <= b}, exactly.

    Works on the homogenized cone {(t, y) : b t - a y >= 0, t >= 0} and adds
    constraints one at a time, combining adjacent rays across each new
    hyperplane (combinatorial adjacency test).
    """
    d = len(a[0]) + 1
    cone = [[bi] + [-v for v in ai] for ai, bi in zip(a, b)]
    cone.append([Fraction(1)] + [Fraction(0)] * (d - 1))
    # greedy choice of d independent starting rows
    start: list[int] = []
    for r in range(len(cone)):
        if _rank([cone[s] for s in start + [r]]) == len(start) + 1:
            start.append(r)
        if len(start) == d:
            break
    inv = _inverse([cone[r] for r in start])
    rays = [tuple(inv[row][col] for row in range(d)) for col in range(d)]
    processed = list(start)

    def dot(r, v):
        return sum(x * y for x, y in zip(r, v))

    def zero_set(v):
        return frozenset(i for i in processed if dot(cone[i], v) == 0)

    for r in range(len(cone)):
        if r in processed:
            continue
        vals = [dot(cone[r], v) for v in rays]
        pos = [v for v, s in zip(rays, vals) if s > 0]
        zer = [v for v, s in zip(rays, vals) if s == 0]
        neg = [(v, s) for v, s in zip(rays, vals) if s < 0]
        zsets = {v: zero_set(v) for v in rays}
        new = []
        for vp in pos:
            sp = dot(cone[r], vp)
            for vn, sn in neg:
                common = zsets[vp] & zsets[vn]
                if len(common) < d - 2:
                    continue
                if any(w != vp and w != vn and common <= zsets[w] for w in rays):
                    continue
                new.append(tuple(sp * y - sn * x for x, y in zip(vp, vn)))
        rays = pos + zer + new
        processed.append(r)
        # normalise to keep numbers small and make duplicates identical
        rays = list(dict.fromkeys(_normalize_ray(v) for v in rays))
    verts = [tuple(x / v[0] for x in v[1:]) for v in rays if v[0] > 0]
    return sorted(set(verts))


def _normalize_ray(v):
    lead = next(x for x in v if x != 0)
    scale = abs(lead)
    return tuple(x / scale for x in v)


def lm_vertices() -> list[BeliefCollection]:
    """Every vertex of LM(K) in rationals, ordered lexicographically on entries."""
    a, b = lm_inequalities()
    verts = [beliefs_from_coordinates(y) for y in double_description(a, b)]
    return sorted(verts, key=lambda v: tuple(v.pairs.ravel()) + tuple(v.singles.ravel()))


def convex_combination(vertices: Sequence[BeliefCollection], weights: Iterable) -> BeliefCollection:
    weights = list(weights)
    if len(weights) != len(vertices) or not vertices:
        raise BadWeights("need one weight per vertex")
    if any(w < 0 for w in weights):
        raise BadWeights("weights must be nonnegative")
    exact = all(isinstance(w, (Fraction, int)) for w in weights) and all(v.exact for v in vertices)
    total = sum(weights)
    if (exact and total != 1) or abs(float(total) - 1.0) > 1e-12:
        raise BadWeights(f"weights sum to {float(total)!r}, not 1")
    if exact:
        ws = [Fraction(w) for w in weights]
        pairs = sum((w * v.pairs for w, v in zip(ws, vertices)), np.zeros((4, 2, 2), dtype=object) * Fraction(0))
        singles = sum((w * v.singles for w, v in zip(ws, vertices)), np.zeros((4, 2), dtype=object) * Fraction(0))
    else:
        ws = np.array(weights, dtype=float)
        pairs = sum(w * v.pairs.astype(float) for w, v in zip(ws, vertices))
        singles = sum(w * v.singles.astype(float) for w, v in zip(ws, vertices))
    return BeliefCollection(pairs, singles)


# -- reference collections ----------------------------------------------------

def uniform_beliefs(exact: bool = True) -> BeliefCollection:
    q = Fraction(1, 4) if exact else 0.25
    h = Fraction(1, 2) if exact else 0.5
    return BeliefCollection([[[q, q], [q, q]]] * 4, [[h, h]] * 4)


def pr_box(exact: bool = True) -> BeliefCollection:
    h = Fraction(1, 2) if exact else 0.5
    z = Fraction(0) if exact else 0.0
    same, diff = [[h, z], [z, h]], [[z, h], [h, z]]
    return BeliefCollection([same, same, same, diff], [[h, h]] * 4)

