"""Seeded property suites behind the ``fuzz`` and ``verify`` commands."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .counterexample import (
    TOL,
    CheckReport,
    CounterexampleSystem,
    SquarePoint,
    g_weight,
    grid_crosscheck,
    midline_coefficients,
    verify_partial_sums,
    verify_sandwich,
)
from .embedding import (
    NET_MAX_N,
    EmbeddingArtifact,
    EmbeddingMode,
    LineSampler,
    audited_constant,
    probe_vectors,
    sup_on_line,
)
from .james import (
    DIFF,
    LEAD,
    FiniteSequence,
    NormVariant,
    james_norm,
    james_norm_bruteforce,
    lemma1_gap,
    sup_norm,
)
from .sampling import random_monotone_sequence, random_sequence, sub_rng

ORACLE_MAX_SUPPORT = 12


@dataclass(frozen=True)
class RunConfig:
    N: int = 8
    mode: str = "PROBE_EXACT"
    delta: float = 0.25
    probe_count: int = 8
    fuzz_trials: int = 1000
    seed: int = 0
    grid_resolution: int = 512
    output_dir: str = "out"

    def validate(self) -> RunConfig:
        try:
            mode = EmbeddingMode(str(self.mode).upper()).value
        except ValueError:
            raise ValueError(f"unknown mode {self.mode!r}") from None
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if mode == "NET" and self.N > NET_MAX_N:
            raise ValueError(f"NET mode requires N <= {NET_MAX_N}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.probe_count < 1 or self.fuzz_trials < 1:
            raise ValueError("probe_count and fuzz_trials must be >= 1")
        if self.grid_resolution < 2:
            raise ValueError("grid_resolution must be >= 2")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return RunConfig(**{**asdict(self), "mode": mode})

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def to_json(self) -> dict:
        """Fields that determine results; the output location is left out."""
        doc = asdict(self)
        doc.pop("output_dir")
        return doc


# -- fuzz ---------------------------------------------------------------------

def oracle_equivalence(trials: int, seed: int, n_max: int = ORACLE_MAX_SUPPORT) -> CheckReport:
    rng = sub_rng(seed, 1)
    n_max = min(n_max, ORACLE_MAX_SUPPORT)
    worst, bad = 0.0, None
    for v in NormVariant:
        for _ in range(trials):
            x = random_sequence(rng, n_max)
            dp = james_norm(x, v).value
            bf = james_norm_bruteforce(x, v)
            err = abs(dp - bf) / (1.0 + dp)
            if err > worst:
                worst = err
            if err > 1e-12 and bad is None:
                bad = {"vector": x.to_json(), "variant": v.value, "dp": dp, "bruteforce": bf}
    return CheckReport("oracle_equivalence", bad is None,
                       {"trials_per_variant": trials, "max_support": n_max,
                        "max_relative_error": worst, "counterexample": bad}, seed)


def lemma1_suite(trials: int, seed: int, n_max: int) -> CheckReport:
    rng = sub_rng(seed, 2)
    min_gap, bad = math.inf, None
    for _ in range(trials):
        a, b = random_sequence(rng, n_max), random_sequence(rng, n_max)
        for v in NormVariant:
            gap = lemma1_gap(a, b, v)
            min_gap = min(min_gap, gap)
            if gap < -1e-12 and bad is None:
                bad = {"a": a.to_json(), "b": b.to_json(), "variant": v.value, "gap": gap}
    return CheckReport("lemma1", bad is None,
                       {"pairs": trials, "min_gap": min_gap, "counterexample": bad}, seed)


def monotone_suite(trials: int, seed: int, n_max: int) -> CheckReport:
    rng = sub_rng(seed, 3)
    worst, bad = 0.0, None
    for _ in range(trials):
        x = random_monotone_sequence(rng, n_max)
        err = abs(james_norm(x, DIFF).value - abs(x.at(1)))
        worst = max(worst, err)
        if err > 1e-12 and bad is None:
            bad = {"vector": x.to_json(), "error": err}
    lead_e1 = james_norm([1.0], LEAD).value
    lead_ok = abs(lead_e1 - math.sqrt(2.0)) <= 1e-12
    return CheckReport("monotone", bad is None and lead_ok,
                       {"trials": trials, "max_error": worst, "counterexample": bad,
                        "leading_term_e1": lead_e1}, seed)


def variant_sandwich_suite(trials: int, seed: int, n_max: int) -> CheckReport:
    rng = sub_rng(seed, 4)
    worst, bad = -math.inf, None
    for _ in range(trials):
        x = random_sequence(rng, n_max)
        d, l = james_norm(x, DIFF).value, james_norm(x, LEAD).value
        viol = max(d - l, l - math.sqrt(2.0) * d)
        worst = max(worst, viol)
        if viol > 1e-12 and bad is None:
            bad = {"vector": x.to_json(), "diff": d, "lead": l}
    return CheckReport("variant_sandwich", bad is None,
                       {"trials": trials, "max_violation": worst, "counterexample": bad}, seed)


def dominates_sup_suite(trials: int, seed: int, n_max: int) -> CheckReport:
    rng = sub_rng(seed, 5)
    bad = None
    for _ in range(trials):
        x = random_sequence(rng, n_max)
        for v in NormVariant:
            if james_norm(x, v).value < sup_norm(x) - 1e-12 and bad is None:
                bad = {"vector": x.to_json(), "variant": v.value}
    return CheckReport("norm_dominates_sup", bad is None,
                       {"trials": trials, "counterexample": bad}, seed)


def run_fuzz(cfg: RunConfig) -> list[CheckReport]:
    n, t, s = cfg.N, cfg.fuzz_trials, cfg.seed
    return [
        oracle_equivalence(t, s, n),
        lemma1_suite(t, s, n),
        monotone_suite(t, s, n),
        variant_sandwich_suite(t, s, n),
        dominates_sup_suite(t, s, n),
    ]


# -- verify -------------------------------------------------------------------

def certificate_check(art: EmbeddingArtifact) -> CheckReport:
    if art.mode is EmbeddingMode.NET:
        expected = 1.0 / (1.0 - art.delta) if art.delta is not None else math.nan
    else:
        expected = audited_constant(art)
    ok = abs(art.M - expected) <= 1e-12 * max(1.0, expected)
    return CheckReport("certificate", ok, {"M": art.M, "recomputed": expected,
                                           "M_source": art.M_source})


def probe_isometry(art: EmbeddingArtifact) -> CheckReport:
    worst, bad = 0.0, None
    for p in probe_vectors(art):
        err = abs(sup_on_line(art, p) - james_norm(p, DIFF).value)
        worst = max(worst, err)
        if err > TOL and bad is None:
            bad = {"vector": p.to_json(), "error": err}
    return CheckReport("probe_isometry", bad is None,
                       {"probes": len(probe_vectors(art)), "max_error": worst,
                        "counterexample": bad})


def norming_suite(art: EmbeddingArtifact, lams) -> list[CheckReport]:
    """Upper norming for every mode; the (1 - delta) lower bound for NET."""
    up_bad, low_bad, worst_low = None, None, math.inf
    for lam in lams:
        s, norm = sup_on_line(art, lam), james_norm(lam, DIFF).value
        if s > norm + TOL and up_bad is None:
            up_bad = {"vector": lam.to_json(), "sup": s, "james_norm": norm}
        if art.mode is EmbeddingMode.NET:
            margin = s - (1.0 - art.delta) * norm
            worst_low = min(worst_low, margin)
            if margin < -TOL and low_bad is None:
                low_bad = {"vector": lam.to_json(), "sup": s, "james_norm": norm}
    out = [CheckReport("upper_norming", up_bad is None,
                       {"trials": len(lams), "counterexample": up_bad})]
    if art.mode is EmbeddingMode.NET:
        out.append(CheckReport("net_lower_bound", low_bad is None,
                               {"trials": len(lams), "delta": art.delta,
                                "min_margin": worst_low, "counterexample": low_bad}))
    return out


def sandwich_batch(sys: CounterexampleSystem, lams, name: str) -> CheckReport:
    bad, min_low, min_up = [], math.inf, math.inf
    for lam in lams:
        r = verify_sandwich(sys, lam)
        min_low = min(min_low, r.values["sup"] - r.values["lower"])
        min_up = min(min_up, r.values["upper"] - r.values["sup"])
        if not r.passed:
            bad.append({"vector": lam.to_json(), **r.values})
    return CheckReport(name, not bad, {"count": len(lams), "min_lower_margin": min_low,
                                       "min_upper_margin": min_up, "M_eff": sys.M_eff,
                                       "M_source": sys.M_source, "failures": bad[:10],
                                       "failure_count": len(bad)})


def midline_identity(sys: CounterexampleSystem, lams, a: np.ndarray) -> CheckReport:
    sampler = LineSampler(sys.art, a)
    basis = [sampler(FiniteSequence.unit(i)) for i in range(1, sys.N + 1)]
    worst = 0.0
    for lam in lams:
        c = sys.art.coefficients(lam)
        for k in range(2, sys.N + 1):
            w = np.array([g_weight(n, 2.0 ** -k) for n in range(1, sys.N + 1)])
            direct = sampler(c * w)
            mid = midline_coefficients(k, c, sys.N).padded(sys.N)
            expanded = sum(mid[i] * basis[i] for i in range(sys.N))
            worst = max(worst, float(np.abs(direct - expanded).max()))
    return CheckReport("midline_identity", worst <= 1e-12,
                       {"lines": list(range(2, sys.N + 1)), "combinations": len(lams),
                        "points": len(a), "max_error": worst})


def random_square_points(rng: np.random.Generator, count: int) -> list[SquarePoint]:
    """Points with b > 0; every fourth one sits exactly on a line b = 2^-k."""
    pts = []
    for i in range(count):
        a = float(rng.uniform(0.0, 1.0))
        if i % 4 == 3:
            b = 2.0 ** -int(rng.integers(1, 12))
        else:
            b = float(1.0 - rng.uniform(0.0, 1.0))  # in (0, 1]
        pts.append(SquarePoint(a, b))
    return pts


def run_verify(art: EmbeddingArtifact, cfg: RunConfig, grid_checks: int = 100) -> list[CheckReport]:
    sys = CounterexampleSystem(art)
    N, t, seed = art.N, cfg.fuzz_trials, cfg.seed
    rng = sub_rng(seed, 20)
    lams = [random_sequence(rng, N) for _ in range(t)]

    reports = [certificate_check(art)]
    if art.mode is EmbeddingMode.PROBE_EXACT:
        reports.append(probe_isometry(art))
        reports.append(sandwich_batch(sys, probe_vectors(art), "sandwich_probes"))
    reports += norming_suite(art, lams)
    reports.append(sandwich_batch(sys, lams, "sandwich_random"))

    pts = random_square_points(sub_rng(seed, 21), t)
    reports += verify_partial_sums(sys, pts)

    rng = sub_rng(seed, 22)
    reports.append(midline_identity(sys, lams[:100], rng.uniform(0.0, 1.0, 100)))

    grid = [grid_crosscheck(sys, lam, cfg.grid_resolution) for lam in lams[:grid_checks]]
    bad = [dict(r.values) for r in grid if not r.passed]
    reports.append(CheckReport("grid_crosscheck", not bad,
                               {"combinations": len(grid), "resolution": cfg.grid_resolution,
                                "max_grid_over_exact": max(r.values["grid_max"] - r.values["exact"]
                                                           for r in grid) if grid else None,
                                "failures": bad[:10]}))
    return reports
