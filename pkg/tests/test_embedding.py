import json
import math

import numpy as np
import pytest

from james_counterexample.embedding import (
    EmbeddingArtifact,
    EmbeddingMode,
    LineSampler,
    audited_constant,
    build_embedding,
    check_disjoint,
    default_probes,
    eval_f,
    eval_functional,
    eval_line,
    line_lipschitz,
    net_size,
    peak_interval,
    polytope_vertices,
    polytope_vertices_bruteforce,
    probe_vectors,
    single_difference,
    sphere_net,
    sup_on_line,
)
from james_counterexample.james import (
    FiniteSequence,
    IndexPattern,
    PatternFunctional,
    james_norm,
    optimal_functional,
)
from james_counterexample.sampling import random_sequence, sub_rng


@pytest.fixture(scope="module")
def art8():
    return build_embedding(8, probe_set=default_probes(8, 8, seed=11), seed=11)


@pytest.fixture(scope="module")
def net4():
    return build_embedding(4, EmbeddingMode.NET, delta=0.25)


def jn(x):
    return james_norm(x).value


# -- functionals --------------------------------------------------------------

def test_eval_functional_examples():
    phi = PatternFunctional(IndexPattern((1, 2)), (-1.0,))
    assert eval_functional(phi, FiniteSequence.unit(1)) == 1.0
    assert eval_functional(phi, [0.0, 0.0]) == 0.0
    x = [0.3, -0.7, 0.2, 0.9]
    assert abs(eval_functional(optimal_functional(x), x) - jn(x)) <= 1e-12


def test_single_difference_reads_coordinate():
    phi = single_difference(3, 5)
    assert phi([0.1, 0.2, 0.7, 0.4, 0.5]) == 0.7


# -- build: PROBE_EXACT -------------------------------------------------------

def test_build_n1_single_tent():
    art = build_embedding(1, probe_set=[FiniteSequence.unit(1)])
    assert len(art.functionals) == 1
    assert art.functionals[0].pattern.indices == (1, 2)
    assert art.functionals[0].coefficients == (-1.0,)
    assert sup_on_line(art, [1.0]) == 1.0 == jn([1.0])
    assert art.M == 1.0


def test_build_n2_ones_probe():
    art = build_embedding(2, probe_set=[FiniteSequence.ones(2)])
    assert (1, 3) in [phi.pattern.indices for phi in art.functionals]
    assert sup_on_line(art, [1.0, 1.0]) == 1.0 == jn([1.0, 1.0])
    # polytope {|x1| <= 1, |x2| <= 1}: worst vertex (1, -1)
    assert art.M == pytest.approx(math.sqrt(5.0), rel=1e-12)


def test_zero_combination(art8):
    assert sup_on_line(art8, [0.0] * 8) == 0.0


def test_build_rejects_bad_probes():
    with pytest.raises(ValueError):
        build_embedding(3, probe_set=[[0.0, 0.0]])
    with pytest.raises(ValueError):
        build_embedding(2, probe_set=[[1.0, 1.0, 1.0]])
    with pytest.raises(ValueError):
        build_embedding(0)


def test_functional_count_at_n4():
    art = build_embedding(4, probe_set=default_probes(4, 1, seed=3))
    # 4 coordinate functionals plus at least one probe functional
    assert len(art.functionals) >= 5


def test_probe_isometry(art8):
    probes = probe_vectors(art8)
    assert len(probes) == 8 + 1 + 8
    for p in probes:
        assert abs(sup_on_line(art8, p) - jn(p)) <= 1e-9


def test_upper_norming_random(art8):
    rng = sub_rng(1, 0)
    for _ in range(300):
        lam = random_sequence(rng, 8)
        assert sup_on_line(art8, lam) <= jn(lam) + 1e-9


def test_lower_bound_from_certificate(art8):
    assert art8.M_source == "polytope_vertices"
    rng = sub_rng(2, 0)
    for _ in range(300):
        lam = random_sequence(rng, 8)
        assert sup_on_line(art8, lam) >= jn(lam) / art8.M - 1e-9


def test_certificate_recomputes(art8):
    assert audited_constant(art8) == pytest.approx(art8.M, rel=1e-12)


def test_vertex_enumeration_matches_bruteforce():
    art = build_embedding(3, probe_set=default_probes(3, 3, seed=4))
    fast = polytope_vertices(art.matrix)
    slow = polytope_vertices_bruteforce(art.matrix)
    assert len(fast) == len(slow)
    for v in fast:
        assert np.min(np.abs(slow - v).max(axis=1)) <= 1e-8


def test_sampled_audit_fallback_above_vertex_limit():
    art = build_embedding(11, probe_set=default_probes(11, 2, seed=0), seed=0)
    assert art.M_source == "sampled_audit"
    assert art.M >= 1.0
    assert audited_constant(art) == pytest.approx(art.M, rel=1e-12)


# -- build: NET ---------------------------------------------------------------

@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_sphere_net_covers(dim):
    delta = 0.3
    net = sphere_net(dim, delta)
    assert np.allclose(np.linalg.norm(net, axis=1), 1.0)
    u = np.random.default_rng(dim).normal(size=(4000, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    best = np.abs(u @ net.T).max(axis=1)
    # |u . c| >= 1 - |u - c|^2 / 2 for unit u, c
    assert best.min() >= 1.0 - delta ** 2 / 2 - 1e-12


def test_net_constant_and_lower_bound(net4):
    assert net4.M == pytest.approx(1.0 / 0.75, rel=1e-15)
    assert len(net4.functionals) == net_size(4, 0.25)
    rng = sub_rng(3, 0)
    for _ in range(300):
        lam = random_sequence(rng, 4)
        s, n = sup_on_line(net4, lam), jn(lam)
        assert (1 - 0.25) * n - 1e-9 <= s <= n + 1e-9


def test_net_rejects():
    with pytest.raises(ValueError):
        build_embedding(13, EmbeddingMode.NET, delta=0.5)
    with pytest.raises(ValueError):
        build_embedding(3, EmbeddingMode.NET, delta=1.5)
    with pytest.raises(ValueError):
        build_embedding(12, EmbeddingMode.NET, delta=0.25)  # net far too large


# -- evaluation ---------------------------------------------------------------

def test_intervals_layout_and_disjoint(art8):
    for k, iv in enumerate(art8.intervals, start=1):
        assert iv == peak_interval(k)
    check_disjoint(art8.intervals)
    with pytest.raises(ValueError):
        check_disjoint([peak_interval(1), type(peak_interval(1))(0.55, 0.1)])


def test_eval_f_peaks_endpoints_and_zero(art8):
    for k, iv in enumerate(art8.intervals):
        for n in (1, 4, 8):
            assert eval_f(art8, n, iv.center) == art8.functionals[k](FiniteSequence.unit(n))
            assert eval_f(art8, n, iv.lo) == 0.0
            assert eval_f(art8, n, iv.hi) == 0.0
    assert eval_f(art8, 1, 0.0) == 0.0
    assert eval_f(art8, 1, 0.75) == 0.0
    with pytest.raises(ValueError):
        eval_f(art8, 1, 1.5)
    with pytest.raises(ValueError):
        eval_f(art8, 9, 0.5)


def test_tent_is_linear_inside_interval(art8):
    iv = art8.intervals[2]
    peak = eval_f(art8, 2, iv.center)
    t = iv.center + 0.25 * iv.radius
    assert eval_f(art8, 2, t) == pytest.approx(0.75 * peak, rel=1e-12, abs=1e-15)


def test_continuity_at_zero(art8):
    # past the last interval every f_n vanishes identically
    last = art8.intervals[-1]
    t = np.linspace(0.0, last.lo, 50)
    for n in range(1, 9):
        assert np.all(eval_line(art8, FiniteSequence.unit(n), t) == 0.0)


def test_breakpoint_exactness_against_dense_grid(art8):
    rng = sub_rng(4, 0)
    t = np.linspace(0.0, 1.0, 200_001)
    mesh = t[1] - t[0]
    sampler = LineSampler(art8, t)
    for _ in range(20):
        lam = random_sequence(rng, 8)
        exact = sup_on_line(art8, lam)
        grid = float(np.abs(sampler(lam)).max())
        assert grid <= exact + 1e-12
        assert exact <= grid + line_lipschitz(art8, lam) * mesh + 1e-12


# -- serialization ------------------------------------------------------------

def test_json_roundtrip_bit_identical(art8, tmp_path):
    path = tmp_path / "a.json"
    digest = art8.save(path)
    back = EmbeddingArtifact.load(path)
    assert back.content_hash() == digest
    assert back.to_json() == art8.to_json()
    assert np.array_equal(back.matrix, art8.matrix)
    assert json.loads(path.read_text())["hash"] == digest


def test_load_detects_tampering(art8, tmp_path):
    path = tmp_path / "a.json"
    art8.save(path)
    doc = json.loads(path.read_text())
    doc["M"] = 0.1
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="hash"):
        EmbeddingArtifact.load(path)


def test_build_is_deterministic():
    a = build_embedding(6, probe_set=default_probes(6, 5, seed=9), seed=9)
    b = build_embedding(6, probe_set=default_probes(6, 5, seed=9), seed=9)
    assert a.content_hash() == b.content_hash()
