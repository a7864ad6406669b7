"""The functions g_n on the unit square and checks of their properties.

``g_n(a, b) = (1 - 2^n b) f_n(a)`` for ``b <= 2^-n`` and 0 above that
line, where f_n comes from an :class:`EmbeddingArtifact`.  Any combination
``sum lam_i g_i`` is piecewise linear in b with breakpoints on the lines
``b = 2^-k`` and ``b = 0``, so its sup norm is the largest exact line sup.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .embedding import EmbeddingArtifact, LineSampler, eval_line, line_lipschitz, sup_on_line
from .james import DIFF, FiniteSequence, SequenceLike, as_sequence, james_norm

TOL = 1e-9


@dataclass(frozen=True)
class SquarePoint:
    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0 and 0.0 <= self.b <= 1.0):
            raise ValueError(f"point ({self.a}, {self.b}) outside the unit square")


class RegionKind(enum.Enum):
    K = "K"
    K_n = "K_n"
    R_n = "R_n"
    L_n = "L_n"
    L = "L"
    U = "U"


@dataclass(frozen=True)
class Region:
    kind: RegionKind
    n: int | None = None

    def __post_init__(self):
        needs_n = self.kind in (RegionKind.K_n, RegionKind.R_n, RegionKind.L_n)
        if needs_n and (self.n is None or self.n < 1):
            raise ValueError(f"region {self.kind.value} needs a positive index")


def region_contains(r: Region, pt: SquarePoint) -> bool:
    # 2**-n is exact in binary64, so these comparisons are exact
    if not (0.0 <= pt.a <= 1.0 and 0.0 <= pt.b <= 1.0):
        return False
    b = pt.b
    if r.kind is RegionKind.K:
        return True
    if r.kind is RegionKind.K_n:
        return b >= 2.0 ** -r.n
    if r.kind is RegionKind.R_n:
        return b > 2.0 ** -r.n
    if r.kind is RegionKind.L_n:
        return b == 2.0 ** -r.n
    if r.kind is RegionKind.L:
        return b == 0.0
    return b > 0.0


@dataclass(frozen=True)
class CheckReport:
    check: str
    passed: bool
    values: dict = field(default_factory=dict)
    seed: int | None = None
    artifact_hash: str | None = None

    def to_json(self) -> dict:
        return {"check": self.check, "pass": self.passed, "values": self.values,
                "seed": self.seed, "artifact_hash": self.artifact_hash}


@dataclass(frozen=True)
class CounterexampleSystem:
    art: EmbeddingArtifact

    @property
    def N(self) -> int:
        return self.art.N

    @property
    def M_eff(self) -> float:
        return self.art.M

    @property
    def M_source(self) -> str:
        return self.art.M_source

    def descriptor(self) -> dict:
        return {
            "N": self.N,
            "artifact_hash": self.art.content_hash(),
            "mode": self.art.mode.value,
            "M_eff": self.M_eff,
            "M_source": self.M_source,
            "lines": [2.0 ** -k for k in range(1, self.N + 1)] + [0.0],
            "g_n": "(1 - 2**n * b) * f_n(a) for b < 2**-n, else 0",
        }


def _coeffs(sys: CounterexampleSystem, lam: SequenceLike) -> np.ndarray:
    return sys.art.coefficients(lam)


def _check_index(sys: CounterexampleSystem, n: int) -> None:
    if not 1 <= n <= sys.N:
        raise ValueError(f"index {n} outside [1, {sys.N}]")


def g_weight(n: int, b: float) -> float:
    """Vertical profile of g_n: 0 for b >= 2^-n, then linear up to 1 at b = 0."""
    return 0.0 if b >= 2.0 ** -n else 1.0 - 2.0 ** n * b


def eval_g(sys: CounterexampleSystem, n: int, pt: SquarePoint) -> float:
    _check_index(sys, n)
    w = g_weight(n, pt.b)
    if w == 0.0:
        return 0.0
    return w * float(eval_line(sys.art, FiniteSequence.unit(n), pt.a)[0])


def eval_combination(sys: CounterexampleSystem, lam: SequenceLike, pt: SquarePoint) -> float:
    c = _coeffs(sys, lam)
    weights = np.array([g_weight(n, pt.b) for n in range(1, sys.N + 1)])
    return float(eval_line(sys.art, c * weights, pt.a)[0])


def eval_combination_grid(sys: CounterexampleSystem, lam: SequenceLike,
                          a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Values on the product grid a x b, shape (len(b), len(a))."""
    c = _coeffs(sys, lam)
    sampler = LineSampler(sys.art, a)
    out = np.empty((len(b), len(a)))
    for row, bv in enumerate(b):
        weights = np.array([g_weight(n, bv) for n in range(1, sys.N + 1)])
        out[row] = sampler(c * weights)
    return out


def midline_coefficients(k: int, lam: SequenceLike, N: int | None = None) -> FiniteSequence:
    """Coefficients c with ``sum lam_i g_i(a, 2^-k) = sum c_i f_i(a)``.

    ``c_i = lam_i (2^(k-i) - 1) / 2^(k-i)`` for i < k and 0 from k on.
    """
    lam = as_sequence(lam)
    upper = N if N is not None else max(k, len(lam))
    if not 2 <= k <= upper:
        raise ValueError(f"line index {k} outside [2, {upper}]")
    out = [lam.at(i) * (2.0 ** (k - i) - 1.0) / 2.0 ** (k - i) for i in range(1, k)]
    return FiniteSequence(tuple(out) + (0.0,) * (max(len(lam), k) - len(out)))


def line_sups(sys: CounterexampleSystem, lam: SequenceLike) -> dict[str, float]:
    """Exact sup of the combination on each line L_1..L_N and on L."""
    c = _coeffs(sys, lam)
    out = {"L_1": 0.0}
    for k in range(2, sys.N + 1):
        out[f"L_{k}"] = sup_on_line(sys.art, midline_coefficients(k, c, sys.N))
    out["L"] = sup_on_line(sys.art, c)
    return out


def sup_norm_exact(sys: CounterexampleSystem, lam: SequenceLike) -> float:
    return max(line_sups(sys, lam).values())


def stabilization_index(pt: SquarePoint | float) -> int | float:
    """Least n >= 1 with 2^-n <= b; ``math.inf`` on the bottom edge."""
    b = pt.b if isinstance(pt, SquarePoint) else float(pt)
    if b <= 0.0:
        return math.inf
    _, e = math.frexp(b)  # b = m * 2**e, 0.5 <= m < 1
    return max(1, 1 - e)


def grid_lipschitz(sys: CounterexampleSystem, lam: SequenceLike) -> tuple[float, float]:
    """Lipschitz constants of the combination in a and in b."""
    c = np.abs(_coeffs(sys, lam))
    lip_a = line_lipschitz(sys.art, c)
    heights = np.abs(sys.art.matrix).max(axis=0) if sys.art.matrix.size else np.zeros(sys.N)
    lip_b = float(sum(2.0 ** n * c[n - 1] * heights[n - 1] for n in range(1, sys.N + 1)))
    return lip_a, lip_b


def grid_crosscheck(sys: CounterexampleSystem, lam: SequenceLike, resolution: int) -> CheckReport:
    """Compare the exact sup with the max over a resolution x resolution grid."""
    a = np.linspace(0.0, 1.0, resolution)
    b = np.linspace(0.0, 1.0, resolution)
    grid_max = float(np.abs(eval_combination_grid(sys, lam, a, b)).max())
    exact = sup_norm_exact(sys, lam)
    mesh = 1.0 / (resolution - 1)
    lip_a, lip_b = grid_lipschitz(sys, lam)
    slack = (lip_a + lip_b) * mesh
    ok = grid_max <= exact + TOL and exact <= grid_max + slack + TOL
    return CheckReport("grid_crosscheck", ok, {"grid_max": grid_max, "exact": exact,
                                               "slack": slack, "resolution": resolution})


def verify_sandwich(sys: CounterexampleSystem, lam: SequenceLike) -> CheckReport:
    norm = james_norm(_coeffs(sys, lam), DIFF).value
    M = sys.M_eff
    lower, upper = norm / M, 2.0 * M * norm
    s = sup_norm_exact(sys, lam)
    ok = lower - TOL <= s <= upper + TOL
    return CheckReport("sandwich", ok, {"lower": lower, "sup": s, "upper": upper,
                                        "james_norm": norm, "M_eff": M,
                                        "M_source": sys.M_source})


def partial_sum_vector(n: int, m: int = 0) -> FiniteSequence:
    """Coefficients of S_n - S_m: ones at indices m+1..n."""
    return FiniteSequence.ones(n, m + 1) if n > m else FiniteSequence()


def eval_partial_sums(sys: CounterexampleSystem, pt: SquarePoint) -> np.ndarray:
    """S_0(pt), S_1(pt), ..., S_N(pt)."""
    terms = [eval_g(sys, n, pt) for n in range(1, sys.N + 1)]
    return np.concatenate([[0.0], np.cumsum(terms)])


def check_stabilization(sys: CounterexampleSystem, pt: SquarePoint) -> CheckReport:
    idx = stabilization_index(pt)
    sums = eval_partial_sums(sys, pt)
    increments = np.diff(sums)
    nonzero = int(np.count_nonzero(increments))
    if math.isinf(idx):
        ok = True
        tail_const = None
    else:
        start = min(idx, sys.N)
        tail_const = bool(np.all(sums[start:] == sums[start]))
        ok = tail_const and nonzero <= idx
    return CheckReport("stabilization", ok, {"a": pt.a, "b": pt.b,
                                             "index": None if math.isinf(idx) else idx,
                                             "tail_constant": tail_const,
                                             "nonzero_increments": nonzero})


def verify_partial_sums(sys: CounterexampleSystem, points=(), seed: int | None = None) -> list[CheckReport]:
    """Uniform bound, stabilization, non-Cauchy witness, weak-Cauchy proxy
    for the partial sums S_n = g_1 + ... + g_n."""
    N, M = sys.N, sys.M_eff
    reports = []

    sups = [sup_norm_exact(sys, partial_sum_vector(n)) for n in range(1, N + 1)]
    bound = 2.0 * M
    reports.append(CheckReport("uniform_bound", max(sups) <= bound + TOL,
                               {"max_sup": max(sups), "bound": bound, "sups": sups,
                                "M_eff": M, "M_source": sys.M_source}, seed))

    stab = [check_stabilization(sys, pt) for pt in points]
    bad = [r.values for r in stab if not r.passed]
    reports.append(CheckReport("stabilization", not bad,
                               {"points": len(stab), "failures": bad[:10]}, seed))

    worst, failures = math.inf, []
    for m in range(N):
        for n in range(m + 1, N + 1):
            diff = partial_sum_vector(n, m)
            s = sup_norm_exact(sys, diff)
            norm = james_norm(diff.padded(N), DIFF).value
            floor_stated = 1.0 / M
            floor_sharp = norm / M
            worst = min(worst, s - floor_stated)
            if s < floor_stated - TOL or s < floor_sharp - TOL:
                failures.append({"m": m, "n": n, "sup": s, "james_norm": norm})
    reports.append(CheckReport("non_cauchy", not failures,
                               {"min_margin_over_1_over_M": worst, "failures": failures,
                                "M_eff": M}, seed))

    drifting = []
    for k, phi in enumerate(sys.art.functionals):
        top = phi.pattern.indices[-1]
        vals = [phi(FiniteSequence.ones(n)) for n in range(top, N + 3)]
        if any(abs(v - vals[0]) > 1e-12 for v in vals):
            drifting.append(k)
    reports.append(CheckReport("weak_cauchy_proxy", not drifting,
                               {"functionals": len(sys.art.functionals),
                                "drifting": drifting[:10]}, seed))
    return reports


def midline_identity_error(sys: CounterexampleSystem, k: int, lam: SequenceLike,
                           a: np.ndarray) -> float:
    """Largest deviation between the combination on L_k and its f-expansion."""
    c = _coeffs(sys, lam)
    direct = np.array([eval_combination(sys, c, SquarePoint(float(t), 2.0 ** -k)) for t in a])
    mid = midline_coefficients(k, c, sys.N).padded(sys.N)
    # f-expansion summed term by term, independent of the weighted path
    expanded = sum(mid[i - 1] * eval_line(sys.art, FiniteSequence.unit(i), a)
                   for i in range(1, sys.N + 1))
    return float(np.abs(direct - expanded).max())
