"""Exact James norm on finitely supported sequences.

Two norm variants are provided.  ``LEADING_TERM`` squares the first selected
entry and then every successive difference along an increasing index
pattern; ``DIFFERENCES_ONLY`` keeps only the successive differences.  The
supremum over patterns is computed exactly by a quadratic dynamic program,
with an exhaustive enumeration kept as an independent oracle.

Indices are 1-based throughout, matching the usual sequence notation.
Position ``len(x) + 1`` stands for "any index past the support" (value 0);
patterns never need to reach further than that.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Sequence, Union

import numpy as np

__all__ = [
    "FiniteSequence",
    "IndexPattern",
    "NormVariant",
    "JamesNormResult",
    "PatternFunctional",
    "as_sequence",
    "pattern_value",
    "james_norm",
    "james_norm_bruteforce",
    "star",
    "lemma1_gap",
    "sup_norm",
    "optimal_functional",
    "BRUTEFORCE_MAX_SUPPORT",
    "DIFF",
    "LEAD",
]

BRUTEFORCE_MAX_SUPPORT = 20


@dataclass(frozen=True)
class FiniteSequence:
    """A real sequence that is zero past its last stored entry."""

    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("sequence entries must be finite reals")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def support_length(self) -> int:
        return len(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def at(self, i: int) -> float:
        """Entry at 1-based index ``i`` (0 beyond the stored entries)."""
        if i < 1:
            raise IndexError("sequence indices start at 1")
        return self.coeffs[i - 1] if i <= len(self.coeffs) else 0.0

    def padded(self, length: int) -> np.ndarray:
        if length < len(self.coeffs) and any(self.coeffs[length:]):
            raise ValueError(f"sequence has nonzero entries past index {length}")
        out = np.zeros(length)
        m = min(length, len(self.coeffs))
        out[:m] = self.coeffs[:m]
        return out

    def scaled(self, c: float) -> FiniteSequence:
        return FiniteSequence(tuple(c * v for v in self.coeffs))

    def __add__(self, other: FiniteSequence) -> FiniteSequence:
        other = as_sequence(other)
        n = max(len(self), len(other))
        return FiniteSequence(tuple(self.at(i) + other.at(i) for i in range(1, n + 1)))

    def __sub__(self, other: FiniteSequence) -> FiniteSequence:
        return self + as_sequence(other).scaled(-1.0)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_json(self) -> list[float]:
        return list(self.coeffs)

    @classmethod
    def from_json(cls, data) -> FiniteSequence:
        if not isinstance(data, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in data
        ):
            raise ValueError("a sequence must be a JSON array of numbers")
        return cls(tuple(data))

    @classmethod
    def unit(cls, n: int) -> FiniteSequence:
        """The n-th unit vector e_n."""
        return cls((0.0,) * (n - 1) + (1.0,))

    @classmethod
    def ones(cls, n: int, start: int = 1) -> FiniteSequence:
        """Ones at indices ``start..n``, zero elsewhere."""
        return cls((0.0,) * (start - 1) + (1.0,) * (n - start + 1))


SequenceLike = Union[FiniteSequence, Sequence[float], np.ndarray]


def as_sequence(x: SequenceLike) -> FiniteSequence:
    if isinstance(x, FiniteSequence):
        return x
    return FiniteSequence(tuple(np.asarray(x, dtype=float).ravel()))


@dataclass(frozen=True)
class IndexPattern:
    """Strictly increasing tuple of positive indices p_1 < ... < p_k."""

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 1 for i in idx):
            raise ValueError("pattern indices must be >= 1")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"pattern must be strictly increasing: {idx}")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


class NormVariant(enum.Enum):
    LEADING_TERM = "LEADING_TERM"
    DIFFERENCES_ONLY = "DIFFERENCES_ONLY"

    @classmethod
    def parse(cls, text: str | NormVariant) -> NormVariant:
        if isinstance(text, cls):
            return text
        key = str(text).strip().upper().replace("-", "_")
        aliases = {"LEAD": "LEADING_TERM", "LEADING": "LEADING_TERM",
                   "DIFF": "DIFFERENCES_ONLY", "DIFF_ONLY": "DIFFERENCES_ONLY",
                   "DIFFERENCES": "DIFFERENCES_ONLY"}
        return cls(aliases.get(key, key))


DIFF = NormVariant.DIFFERENCES_ONLY
LEAD = NormVariant.LEADING_TERM


@dataclass(frozen=True)
class JamesNormResult:
    value: float
    optimal_pattern: IndexPattern
    variant: NormVariant

    def to_json(self) -> dict:
        return {"value": self.value, "pattern": list(self.optimal_pattern),
                "variant": self.variant.value}


def _as_pattern(p) -> IndexPattern:
    return p if isinstance(p, IndexPattern) else IndexPattern(tuple(p))


def _pow2_scale(vals: list[float]) -> tuple[list[float], float]:
    """Rescale by a power of two (exact) so squares neither under- nor overflow."""
    top = max((abs(v) for v in vals), default=0.0)
    if top == 0.0:
        return vals, 1.0
    _, e = math.frexp(top)
    return [math.ldexp(v, -e) for v in vals], math.ldexp(1.0, e)


def pattern_value(x: SequenceLike, p, v: NormVariant = DIFF) -> float:
    x = as_sequence(x)
    idx = _as_pattern(p).indices
    if not idx:
        return 0.0
    vals, scale = _pow2_scale([x.at(i) for i in idx])
    total = vals[0] ** 2 if v is LEAD else 0.0
    for a, b in zip(vals, vals[1:]):
        total += (b - a) ** 2
    return scale * math.sqrt(total)


def james_norm(x: SequenceLike, v: NormVariant = DIFF) -> JamesNormResult:
    """Exact James norm of ``x`` with an optimal pattern.

    ``best[j]`` is the largest squared pattern value over patterns ending at
    position j; it extends the best pattern ending at some earlier i by the
    step (x_j - x_i)^2.  Among optimal patterns the shortest one wins, then
    the lexicographically smallest; shortest optimal patterns never contain
    a zero step, so functionals built from them have no zero coefficients.
    """
    x = as_sequence(x)
    vals, scale = _pow2_scale(list(x.coeffs) + [0.0])
    m = len(vals)
    best = [0.0] * m
    pats: list[tuple[int, ...]] = [()] * m
    for j in range(m):
        xj = vals[j]
        bv = xj * xj if v is LEAD else 0.0
        bp: tuple[int, ...] = (j + 1,)
        for i in range(j):
            d = xj - vals[i]
            cand = best[i] + d * d
            if cand > bv:
                bv, bp = cand, pats[i] + (j + 1,)
            elif cand == bv:
                cp = pats[i] + (j + 1,)
                if (len(cp), cp) < (len(bp), bp):
                    bp = cp
        best[j], pats[j] = bv, bp

    top, top_pat = 0.0, ()
    for bv, bp in zip(best, pats):
        if bv > top or (bv == top and (len(bp), bp) < (len(top_pat), top_pat)):
            top, top_pat = bv, bp
    return JamesNormResult(scale * math.sqrt(top), IndexPattern(top_pat), v)


def _subset_tables(m: int, lo: int, hi: int):
    """Incidence tables for subsets ``lo..hi-1`` of ``{0..m-1}``.

    Returns (first, steps, pairs): ``first[s, i]`` marks the smallest element
    of subset s, ``steps[s, q]`` marks that ``pairs[q]`` are consecutive
    elements of s.
    """
    masks = np.arange(lo, hi, dtype=np.int64)
    sel = ((masks[:, None] >> np.arange(m)) & 1).astype(np.int64)
    csum = np.cumsum(sel, axis=1)
    first = (sel == 1) & (csum == 1)
    pairs = list(combinations(range(m), 2))
    steps = np.zeros((len(masks), len(pairs)), dtype=bool)
    for q, (i, j) in enumerate(pairs):
        between = csum[:, j - 1] - csum[:, i]
        steps[:, q] = (sel[:, i] == 1) & (sel[:, j] == 1) & (between == 0)
    return first.astype(float), steps.astype(float), pairs


_CHUNK = 1 << 14
_cached_tables = lru_cache(maxsize=None)(_subset_tables)


def james_norm_bruteforce(x: SequenceLike, v: NormVariant = DIFF) -> float:
    """Maximum of ``pattern_value`` over every subset of positions.

    Enumerates all 2**(n+1) subsets of ``{1, ..., n+1}`` as an oracle for
    :func:`james_norm`; refuses supports longer than 20.
    """
    x = as_sequence(x)
    n = x.support_length
    if n > BRUTEFORCE_MAX_SUPPORT:
        raise ValueError(
            f"brute force limited to support_length <= {BRUTEFORCE_MAX_SUPPORT}, got {n}")
    scaled, factor = _pow2_scale(list(x.coeffs) + [0.0])
    vals = np.array(scaled)
    m = n + 1
    best = 0.0
    total = 1 << m
    for lo in range(0, total, _CHUNK):
        hi = min(total, lo + _CHUNK)
        tables = _cached_tables if total <= _CHUNK else _subset_tables
        first, steps, pairs = tables(m, lo, hi)
        sq = np.array([(vals[j] - vals[i]) ** 2 for i, j in pairs]) if pairs else np.zeros(0)
        score = steps @ sq
        if v is LEAD:
            score = score + first @ (vals ** 2)
        best = max(best, float(score.max()))
    return factor * math.sqrt(best)


def star(a: SequenceLike, b: SequenceLike) -> FiniteSequence:
    a, b = as_sequence(a), as_sequence(b)
    n = min(len(a), len(b))
    return FiniteSequence(tuple(a.coeffs[i] * b.coeffs[i] for i in range(n)))


def sup_norm(x: SequenceLike) -> float:
    x = as_sequence(x)
    return max((abs(c) for c in x.coeffs), default=0.0)


def lemma1_gap(a: SequenceLike, b: SequenceLike, v: NormVariant = DIFF) -> float:
    """RHS minus LHS of the product inequality
    ``||a*b||_J <= ||a||_J ||b||_inf + ||a||_inf ||b||_J``."""
    lhs = james_norm(star(a, b), v).value
    rhs = james_norm(a, v).value * sup_norm(b) + sup_norm(a) * james_norm(b, v).value
    return rhs - lhs


@dataclass(frozen=True)
class PatternFunctional:
    """Linear functional x -> sum_i c_i (x_{p_{i+1}} - x_{p_i}) with unit c."""

    pattern: IndexPattern
    coefficients: tuple[float, ...]

    def __post_init__(self):
        pat = _as_pattern(self.pattern)
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(pat) < 2 or len(coeffs) != len(pat) - 1:
            raise ValueError("need len(pattern) >= 2 and one coefficient per step")
        if abs(math.fsum(c * c for c in coeffs) - 1.0) > 1e-12:
            raise ValueError("coefficients must have unit l2 norm")
        object.__setattr__(self, "pattern", pat)
        object.__setattr__(self, "coefficients", coeffs)

    def __call__(self, x: SequenceLike) -> float:
        x = as_sequence(x)
        idx = self.pattern.indices
        return sum(c * (x.at(b) - x.at(a))
                   for c, a, b in zip(self.coefficients, idx, idx[1:]))

    def dense(self, n: int) -> np.ndarray:
        """Representing vector on indices 1..n (later indices are dropped)."""
        row = np.zeros(n)
        idx = self.pattern.indices
        for c, a, b in zip(self.coefficients, idx, idx[1:]):
            if b <= n:
                row[b - 1] += c
            if a <= n:
                row[a - 1] -= c
        return row

    def key(self) -> tuple:
        return (self.pattern.indices, tuple(round(c, 12) + 0.0 for c in self.coefficients))

    def to_json(self) -> dict:
        return {"pattern": list(self.pattern), "coefficients": list(self.coefficients)}

    @classmethod
    def from_json(cls, data: dict) -> PatternFunctional:
        return cls(IndexPattern(tuple(data["pattern"])), tuple(data["coefficients"]))


def optimal_functional(x: SequenceLike, v: NormVariant = DIFF) -> PatternFunctional:
    """Norming functional for ``x``: unit step coefficients along the
    optimal pattern, so that evaluating it on ``x`` gives the norm."""
    if v is not DIFF:
        raise ValueError("optimal functionals exist only for DIFFERENCES_ONLY")
    x = as_sequence(x)
    if x.is_zero():
        raise ValueError("the zero sequence has no norming functional")
    res = james_norm(x, v)
    idx = res.optimal_pattern.indices
    steps = np.array([x.at(b) - x.at(a) for a, b in zip(idx, idx[1:])])
    steps /= np.abs(steps).max()
    return PatternFunctional(res.optimal_pattern, tuple(steps / np.linalg.norm(steps)))
