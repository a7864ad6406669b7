"""Tent-function realization of the James unit vectors inside C[0,1].

Each stored norming functional phi_k gets its own peak interval
``[c_k - r_k, c_k + r_k]`` with ``c_k = 1/(2k)`` and ``r_k = 1/(8k(k+1))``.
The n-th basis function is

    f_n(t) = sum_k phi_k(e_n) * tent_k(t),

so for any coefficient vector the combination ``sum_n lam_n f_n`` peaks at
``phi_k(lam)`` over interval k and vanishes between intervals.  Its sup
norm is therefore ``max_k |phi_k(lam)|``, which never exceeds the James
norm (every phi_k has unit l2 coefficients) and is bounded below by
``||lam||_J / M`` for the constant M stored with the artifact.

Two ways of choosing the functionals:

* ``PROBE_EXACT``: the optimal functional of every probe vector plus the
  coordinate functionals.  Probes are normed exactly.  M is the largest
  ratio ``||lam||_J / ||sum lam_n f_n||_inf`` over an audit set; for
  N <= 10 the audit set is the vertex set of the polytope
  ``{lam : |phi_k(lam)| <= 1}``, which makes M exact.
* ``NET``: every pattern in ``[1, N+1]`` crossed with a delta-net of the
  unit sphere, giving ``M = 1/(1 - delta)`` by construction.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from itertools import combinations, product
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import HalfspaceIntersection, QhullError

from .james import (
    DIFF,
    FiniteSequence,
    IndexPattern,
    PatternFunctional,
    SequenceLike,
    as_sequence,
    james_norm,
    optimal_functional,
)
from .sampling import random_nonzero_sequence, sub_rng

NET_MAX_N = 12
NET_MAX_FUNCTIONALS = 2_000_000
VERTEX_MAX_N = 10
AUDIT_WITNESSES = 16


class EmbeddingMode(enum.Enum):
    PROBE_EXACT = "PROBE_EXACT"
    NET = "NET"


@dataclass(frozen=True)
class PeakInterval:
    center: float
    radius: float

    @property
    def lo(self) -> float:
        return self.center - self.radius

    @property
    def hi(self) -> float:
        return self.center + self.radius


def peak_interval(k: int) -> PeakInterval:
    """Layout for the k-th functional (1-based)."""
    return PeakInterval(1.0 / (2 * k), 1.0 / (8 * k * (k + 1)))


def check_disjoint(intervals) -> None:
    for iv in intervals:
        if not (0.0 < iv.lo and iv.hi <= 1.0 and iv.radius > 0.0):
            raise ValueError(f"interval {iv} not inside (0, 1]")
    ordered = sorted(intervals, key=lambda iv: iv.center)
    for a, b in zip(ordered, ordered[1:]):
        if a.hi >= b.lo:
            raise ValueError(f"intervals {a} and {b} overlap")


@dataclass(frozen=True)
class EmbeddingArtifact:
    N: int
    mode: EmbeddingMode
    functionals: tuple[PatternFunctional, ...]
    intervals: tuple[PeakInterval, ...]
    M: float
    delta: float | None = None
    audit: tuple[dict, ...] = ()
    certificate: dict = field(default_factory=dict)
    matrix: np.ndarray = field(init=False, repr=False, compare=False)
    centers: np.ndarray = field(init=False, repr=False, compare=False)
    radii: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.functionals) != len(self.intervals):
            raise ValueError("one interval per functional required")
        for phi in self.functionals:
            if phi.pattern.indices[-1] > self.N + 1:
                raise ValueError(f"functional pattern {phi.pattern.indices} exceeds N+1")
        mat = np.array([phi.dense(self.N) for phi in self.functionals]).reshape(-1, self.N)
        centers = np.array([iv.center for iv in self.intervals])
        radii = np.array([iv.radius for iv in self.intervals])
        for name, arr in (("matrix", mat), ("centers", centers), ("radii", radii)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def M_source(self) -> str:
        return self.certificate.get("method", "unknown")

    def coefficients(self, lam: SequenceLike) -> np.ndarray:
        return as_sequence(lam).padded(self.N)

    def peak_values(self, lam: SequenceLike) -> np.ndarray:
        """phi_k(lam) for every stored functional: the combination's peaks."""
        return self.matrix @ self.coefficients(lam)

    def to_json(self) -> dict:
        doc = {
            "N": self.N,
            "mode": self.mode.value,
            "M": self.M,
            "functionals": [phi.to_json() for phi in self.functionals],
            "intervals": [{"center": iv.center, "radius": iv.radius} for iv in self.intervals],
            "audit": list(self.audit),
            "certificate": self.certificate,
        }
        if self.delta is not None:
            doc["delta"] = self.delta
        return doc

    def content_hash(self) -> str:
        return content_hash(self.to_json())

    @classmethod
    def from_json(cls, doc: dict) -> EmbeddingArtifact:
        try:
            N = int(doc["N"])
            mode = EmbeddingMode(doc["mode"])
            functionals = tuple(PatternFunctional.from_json(f) for f in doc["functionals"])
            intervals = tuple(PeakInterval(float(iv["center"]), float(iv["radius"]))
                              for iv in doc["intervals"])
            M = float(doc["M"])
            delta = doc.get("delta")
            audit = tuple(doc.get("audit", ()))
            certificate = dict(doc.get("certificate", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed embedding artifact: {exc}") from exc
        if N < 1 or not (M > 0 and math.isfinite(M)):
            raise ValueError("malformed embedding artifact: need N >= 1 and M > 0")
        check_disjoint(intervals)
        return cls(N, mode, functionals, intervals, M,
                   None if delta is None else float(delta), audit, certificate)

    def save(self, path) -> str:
        """Write the artifact with its content hash; returns the hash."""
        doc = self.to_json()
        digest = content_hash(doc)
        doc["hash"] = digest
        Path(path).write_text(dumps(doc))
        return digest

    @classmethod
    def load(cls, path) -> EmbeddingArtifact:
        doc = json.loads(Path(path).read_text())
        stored = doc.pop("hash", None)
        if stored != content_hash(doc):
            raise ValueError(f"artifact hash mismatch in {path}")
        return cls.from_json(doc)


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def content_hash(doc: dict) -> str:
    body = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(body.encode()).hexdigest()


def eval_functional(phi: PatternFunctional, x: SequenceLike) -> float:
    return phi(x)


def single_difference(n: int, N: int) -> PatternFunctional:
    """phi(x) = -(x_{N+1} - x_n) = x_n on sequences supported in [1, N]."""
    return PatternFunctional(IndexPattern((n, N + 1)), (-1.0,))


def _dedupe(functionals) -> list[PatternFunctional]:
    seen: dict[tuple, PatternFunctional] = {}
    for phi in functionals:
        seen.setdefault(phi.key(), phi)
    return list(seen.values())


def sphere_net(dim: int, delta: float) -> np.ndarray:
    """Unit vectors u_j such that every unit u has some j with
    ``min(|u - u_j|, |u + u_j|) <= delta``.

    Points come from a grid on the faces of the cube where the leading
    coordinate is +1.  Scaling u by its max-norm lands on such a face (up
    to sign) within ``sqrt(dim-1)/n`` of a grid point; radial projection
    onto the sphere is 1-Lipschitz outside the unit ball.
    """
    if dim == 1:
        return np.ones((1, 1))
    n = math.ceil(math.sqrt(dim - 1) / delta)
    grid = -1.0 + (2.0 * np.arange(n) + 1.0) / n
    face = np.array(list(product(grid, repeat=dim - 1)))
    pts = []
    for axis in range(dim):
        block = np.insert(face, axis, 1.0, axis=1)
        pts.append(block)
    pts = np.vstack(pts)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def net_size(N: int, delta: float) -> int:
    total = 0
    for k in range(2, N + 2):
        dim = k - 1
        per = 1 if dim == 1 else dim * math.ceil(math.sqrt(dim - 1) / delta) ** (dim - 1)
        total += math.comb(N + 1, k) * per
    return total


def _net_functionals(N: int, delta: float) -> list[PatternFunctional]:
    out = []
    for k in range(2, N + 2):
        net = sphere_net(k - 1, delta)
        for pat in combinations(range(1, N + 2), k):
            p = IndexPattern(pat)
            out.extend(PatternFunctional(p, tuple(row)) for row in net)
    return out


def _ratio(mat: np.ndarray, v: np.ndarray) -> float:
    peak = float(np.abs(mat @ v).max())
    return james_norm(v, DIFF).value / peak if peak > 0 else math.inf


def polytope_vertices(mat: np.ndarray) -> np.ndarray:
    """Vertices of ``{x : |mat @ x| <= 1}`` (assumed bounded)."""
    N = mat.shape[1]
    rows = np.unique(np.round(mat, 15), axis=0)
    rows = rows[np.abs(rows).max(axis=1) > 0]
    if N == 1:
        s = 1.0 / np.abs(rows[:, 0]).max()
        return np.array([[s], [-s]])
    halfspaces = np.vstack([np.hstack([rows, -np.ones((len(rows), 1))]),
                            np.hstack([-rows, -np.ones((len(rows), 1))])])
    return HalfspaceIntersection(halfspaces, np.zeros(N)).intersections


def polytope_vertices_bruteforce(mat: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Same vertex set by solving every N-subset of active constraints."""
    N = mat.shape[1]
    rows = np.vstack([mat, -mat])
    found = []
    for idx in combinations(range(len(rows)), N):
        sub = rows[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, np.ones(N))
        if np.abs(mat @ x).max() <= 1 + tol:
            found.append(x)
    return np.unique(np.round(np.array(found), 9), axis=0)


def _vertex_audit(mat: np.ndarray) -> tuple[list[np.ndarray], dict]:
    verts = polytope_vertices(mat)
    ratios = np.array([_ratio(mat, v) for v in verts])
    order = np.argsort(-ratios, kind="stable")[:AUDIT_WITNESSES]
    return [verts[i] for i in order], {"method": "polytope_vertices",
                                       "vertex_count": int(len(verts))}


def _sampled_audit(mat: np.ndarray, N: int, seed: int,
                   samples: int = 2000, restarts: int = 8) -> tuple[list[np.ndarray], dict]:
    rng = sub_rng(seed, 1001)
    pool = [random_nonzero_sequence(rng, N).padded(N) for _ in range(samples)]
    pool.sort(key=lambda v: -_ratio(mat, v))
    witnesses = []
    for start in pool[:restarts]:
        res = minimize(lambda v: -_ratio(mat, v) if np.any(v) else 0.0, start,
                       method="Nelder-Mead", options={"maxiter": 4000, "xatol": 1e-10})
        witnesses.append(res.x)
    witnesses.extend(pool[:AUDIT_WITNESSES])
    witnesses.sort(key=lambda v: -_ratio(mat, v))
    return witnesses[:AUDIT_WITNESSES], {"method": "sampled_audit", "samples": samples,
                                         "restarts": restarts, "seed": seed}


def default_probes(N: int, count: int, seed: int) -> list[FiniteSequence]:
    """e_1..e_N, the all-ones vector, then ``count`` seeded random vectors."""
    probes = [FiniteSequence.unit(n) for n in range(1, N + 1)]
    probes.append(FiniteSequence.ones(N))
    rng = sub_rng(seed, 1000)
    probes.extend(random_nonzero_sequence(rng, N) for _ in range(count))
    return probes


def build_embedding(N: int, mode: EmbeddingMode | str = EmbeddingMode.PROBE_EXACT,
                    probe_set=None, delta: float | None = None,
                    seed: int = 0) -> EmbeddingArtifact:
    mode = EmbeddingMode(mode)
    if N < 1:
        raise ValueError("N must be >= 1")

    if mode is EmbeddingMode.NET:
        if N > NET_MAX_N:
            raise ValueError(f"NET mode requires N <= {NET_MAX_N}")
        if delta is None or not 0.0 < delta < 1.0:
            raise ValueError("NET mode requires delta in (0, 1)")
        size = net_size(N, delta)
        if size > NET_MAX_FUNCTIONALS:
            raise ValueError(f"net of {size} functionals too large; raise delta or lower N")
        functionals = _dedupe(_net_functionals(N, delta))
        intervals = tuple(peak_interval(k) for k in range(1, len(functionals) + 1))
        check_disjoint(intervals)
        return EmbeddingArtifact(N, mode, tuple(functionals), intervals, 1.0 / (1.0 - delta),
                                 delta=delta, certificate={"method": "net_certificate",
                                                           "delta": delta})

    probes = [as_sequence(p) for p in (probe_set if probe_set is not None
                                       else default_probes(N, 8, seed))]
    for p in probes:
        if p.is_zero():
            raise ValueError("probe vectors must be nonzero")
        p.padded(N)  # raises if supported past N
    functionals = _dedupe([optimal_functional(p) for p in probes]
                          + [single_difference(n, N) for n in range(1, N + 1)])
    intervals = tuple(peak_interval(k) for k in range(1, len(functionals) + 1))
    check_disjoint(intervals)
    mat = np.array([phi.dense(N) for phi in functionals])

    witnesses, certificate = None, None
    if N <= VERTEX_MAX_N:
        try:
            witnesses, certificate = _vertex_audit(mat)
        except QhullError:
            witnesses = None
    if witnesses is None:
        witnesses, certificate = _sampled_audit(mat, N, seed)

    audit = [{"kind": "probe", "vector": p.padded(N).tolist(), "ratio": _ratio(mat, p.padded(N))}
             for p in probes]
    audit += [{"kind": "witness", "vector": [float(c) for c in w], "ratio": _ratio(mat, w)}
              for w in witnesses]
    M = max(1.0, max(a["ratio"] for a in audit))
    return EmbeddingArtifact(N, mode, tuple(functionals), intervals, M,
                             audit=tuple(audit), certificate=certificate)


def probe_vectors(art: EmbeddingArtifact) -> list[FiniteSequence]:
    return [FiniteSequence(tuple(a["vector"])) for a in art.audit if a.get("kind") == "probe"]


def audited_constant(art: EmbeddingArtifact) -> float:
    """Recompute the largest audit ratio against the artifact's functionals."""
    ratios = [_ratio(art.matrix, np.asarray(a["vector"], dtype=float))
              for a in art.audit if any(a["vector"])]
    return max([1.0] + ratios)


def eval_f(art: EmbeddingArtifact, n: int, t: float) -> float:
    if not 1 <= n <= art.N:
        raise ValueError(f"basis index {n} outside [1, {art.N}]")
    return float(eval_line(art, FiniteSequence.unit(n), np.array([t]))[0])


def _tent_weights(art: EmbeddingArtifact, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For each t, the 0-based interval index it falls in and the tent weight."""
    t = np.asarray(t, dtype=float)
    if np.any((t < 0.0) | (t > 1.0)):
        raise ValueError("t must lie in [0, 1]")
    K = len(art.intervals)
    centers, radii = art.centers, art.radii
    with np.errstate(divide="ignore"):
        guess = np.where(t > 0, np.floor(0.5 / np.where(t > 0, t, 1.0)), 0).astype(np.int64)
    idx = np.full(t.shape, -1, dtype=np.int64)
    weight = np.zeros(t.shape)
    if K == 0:
        return idx, weight
    # intervals are sorted by decreasing center; a point can only sit in
    # the interval whose center 1/(2k) is nearest, i.e. k near 1/(2t)
    for shift in (-1, 0, 1, 2):
        k = np.clip(guess + shift, 1, K) - 1
        c = centers[k]
        lo, hi = c - radii[k], c + radii[k]
        # measured from the endpoints: exactly 0 there and exactly 1 at c
        w = np.where(t <= c, (t - lo) / (c - lo), (hi - t) / (hi - c))
        hit = (t > lo) & (t < hi) & (idx < 0)
        idx[hit], weight[hit] = k[hit], w[hit]
    return idx, weight


def eval_line(art: EmbeddingArtifact, lam: SequenceLike, t) -> np.ndarray:
    """Values of ``sum_n lam_n f_n`` at the points t."""
    return LineSampler(art, t)(lam)


class LineSampler:
    """Evaluates many combinations ``sum_n lam_n f_n`` at fixed points t.

    The interval lookup is done once; each call only touches the rows of
    the functional matrix whose intervals contain some t.
    """

    def __init__(self, art: EmbeddingArtifact, t):
        self.art = art
        self.t = np.atleast_1d(np.asarray(t, dtype=float))
        idx, weight = _tent_weights(art, self.t)
        self.hit = idx >= 0
        self.weight = weight[self.hit]
        self.rows = art.matrix[idx[self.hit]]

    def __call__(self, lam: SequenceLike) -> np.ndarray:
        coeffs = lam if isinstance(lam, np.ndarray) and lam.shape == (self.art.N,) \
            else self.art.coefficients(lam)
        out = np.zeros(self.t.shape)
        out[self.hit] = self.weight * (self.rows @ coeffs)
        return out


def breakpoints(art: EmbeddingArtifact) -> np.ndarray:
    pts = [0.0, 1.0]
    for iv in art.intervals:
        pts.extend((iv.lo, iv.center, iv.hi))
    return np.unique(pts)


def sup_on_line(art: EmbeddingArtifact, lam: SequenceLike) -> float:
    """Exact sup over [0,1] of ``|sum_n lam_n f_n|``.

    The combination is linear between consecutive breakpoints (interval
    ends and centers), zero at the ends and at 0, so the maximum sits at a
    center where it equals ``|phi_k(lam)|``.
    """
    peaks = art.peak_values(lam)
    return float(np.abs(peaks).max()) if peaks.size else 0.0


def line_lipschitz(art: EmbeddingArtifact, lam: SequenceLike) -> float:
    """Lipschitz constant of ``sum_n lam_n f_n`` on [0,1]."""
    coeffs = np.abs(art.coefficients(lam))
    if not art.intervals:
        return 0.0
    heights = np.abs(art.matrix).max(axis=0)
    min_radius = min(iv.radius for iv in art.intervals)
    return float(coeffs @ heights) / min_radius
