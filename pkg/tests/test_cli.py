import csv
import json
import math

import pytest

from james_counterexample.cli import main, plot_rows
from james_counterexample.embedding import EmbeddingArtifact, content_hash, eval_line
from james_counterexample.james import FiniteSequence


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    out = tmp_path_factory.mktemp("build")
    assert main(["build", "--n", "8", "--seed", "3", "--out", str(out)]) == 0
    return out


# -- jnorm --------------------------------------------------------------------

def test_jnorm_monotone(capsys):
    code, cap = run(capsys, "jnorm", "[1, 0.5, 0.25]")
    assert code == 0
    assert json.loads(cap.out) == {"value": 1.0, "pattern": [1, 4], "variant": "DIFFERENCES_ONLY"}


def test_jnorm_empty_and_alternating(capsys):
    assert json.loads(run(capsys, "jnorm", "[]")[1].out)["value"] == 0.0
    doc = json.loads(run(capsys, "jnorm", "[1,-1]", "--variant", "diff")[1].out)
    assert doc["value"] == pytest.approx(math.sqrt(5), rel=1e-15)


def test_jnorm_leading_term(capsys):
    doc = json.loads(run(capsys, "jnorm", "[1, 0]", "--variant", "LEADING_TERM")[1].out)
    assert doc["value"] == pytest.approx(math.sqrt(2), rel=1e-15)


def test_jnorm_from_file(capsys, tmp_path):
    p = tmp_path / "v.json"
    p.write_text("[2, 1]")
    assert json.loads(run(capsys, "jnorm", str(p))[1].out)["value"] == 2.0


@pytest.mark.parametrize("bad", ["[1,", "{\"a\": 1}", "[1, \"x\"]", "nope"])
def test_jnorm_parse_failure_exit_2(capsys, bad):
    assert run(capsys, "jnorm", bad)[0] == 2


# -- fuzz ---------------------------------------------------------------------

def test_fuzz_passes_and_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "fuzz", "--trials", "60", "--seed", "9", "--out", str(a))[0] == 0
    assert run(capsys, "fuzz", "--trials", "60", "--seed", "9", "--out", str(b))[0] == 0
    ra, rb = (a / "fuzz_report.json").read_bytes(), (b / "fuzz_report.json").read_bytes()
    assert ra == rb
    doc = json.loads(ra)
    assert doc["pass"] and doc["seed"] == 9 and doc["config"]["fuzz_trials"] == 60
    assert {c["check"] for c in doc["checks"]} == {
        "oracle_equivalence", "lemma1", "monotone", "variant_sandwich", "norm_dominates_sup"}
    for c in doc["checks"]:
        assert set(c) == {"check", "pass", "values", "seed", "artifact_hash"}


def test_fuzz_rejects_zero_trials(capsys, tmp_path):
    assert run(capsys, "fuzz", "--trials", "0", "--out", str(tmp_path))[0] == 2


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"fuzz_trials": 5, "seed": 4, "N": 3}))
    out = tmp_path / "o"
    code, _ = run(capsys, "fuzz", "--config", str(cfg), "--seed", "8", "--out", str(out))
    assert code == 0
    doc = json.loads((out / "fuzz_report.json").read_text())
    assert doc["config"]["fuzz_trials"] == 5 and doc["config"]["seed"] == 8
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "fuzz", "--config", str(cfg))[0] == 2


# -- build / verify -----------------------------------------------------------

def test_build_outputs(built):
    art = EmbeddingArtifact.load(built / "embedding.json")
    assert art.N == 8 and len(art.functionals) >= 9
    system = json.loads((built / "system.json").read_text())
    assert system["artifact_hash"] == art.content_hash() == system["hash"]
    assert system["M_source"] == "polytope_vertices"


def test_build_schema(built):
    doc = json.loads((built / "embedding.json").read_text())
    assert {"N", "mode", "M", "functionals", "intervals", "audit", "hash"} <= set(doc)
    assert set(doc["functionals"][0]) == {"pattern", "coefficients"}
    assert set(doc["intervals"][0]) == {"center", "radius"}


def test_build_small_n4(capsys, tmp_path):
    assert run(capsys, "build", "--n", "4", "--probes", "1", "--out", str(tmp_path))[0] == 0
    art = EmbeddingArtifact.load(tmp_path / "embedding.json")
    assert len(art.functionals) >= 5


def test_build_rejects_large_net(capsys, tmp_path):
    assert run(capsys, "build", "--n", "13", "--mode", "NET", "--out", str(tmp_path))[0] == 2


def test_rebuild_same_hash(capsys, tmp_path, built):
    assert run(capsys, "build", "--n", "8", "--seed", "3", "--out", str(tmp_path))[0] == 0
    assert (tmp_path / "embedding.json").read_bytes() == (built / "embedding.json").read_bytes()


def test_verify_fresh_artifact(capsys, tmp_path, built):
    code, cap = run(capsys, "verify", str(built / "embedding.json"), "--trials", "100",
                    "--grid", "64", "--out", str(tmp_path))
    assert code == 0, cap.out
    doc = json.loads((tmp_path / "verify_report.json").read_text())
    assert doc["pass"] and doc["M_source"] == "polytope_vertices"
    assert all(c["artifact_hash"] == doc["artifact_hash"] for c in doc["checks"])


def test_verify_tampered_constant_reports_sandwich_failures(capsys, tmp_path, built):
    doc = json.loads((built / "embedding.json").read_text())
    doc.pop("hash")
    doc["M"] = 0.1
    doc["hash"] = content_hash(doc)
    path = tmp_path / "tampered.json"
    path.write_text(json.dumps(doc))
    code, _ = run(capsys, "verify", str(path), "--trials", "20", "--grid", "16",
                  "--out", str(tmp_path))
    assert code == 1
    report = json.loads((tmp_path / "verify_report.json").read_text())
    failed = {c["check"] for c in report["checks"] if not c["pass"]}
    assert {"certificate", "sandwich_random", "sandwich_probes"} <= failed


def test_verify_hash_mismatch_and_missing(capsys, tmp_path, built):
    doc = json.loads((built / "embedding.json").read_text())
    doc["M"] = 0.1
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert run(capsys, "verify", str(path))[0] == 2
    assert run(capsys, "verify", str(tmp_path / "missing.json"))[0] == 2


def test_verify_net_artifact(capsys, tmp_path):
    assert run(capsys, "build", "--n", "3", "--mode", "NET", "--delta", "0.3",
               "--out", str(tmp_path))[0] == 0
    code, cap = run(capsys, "verify", str(tmp_path / "embedding.json"), "--trials", "50",
                    "--grid", "32", "--out", str(tmp_path))
    assert code == 0, cap.out
    doc = json.loads((tmp_path / "verify_report.json").read_text())
    assert doc["M_source"] == "net_certificate"
    assert "net_lower_bound" in {c["check"] for c in doc["checks"]}


# -- plotdata -----------------------------------------------------------------

def test_plotdata_shape_and_values(capsys, tmp_path, built):
    code, _ = run(capsys, "plotdata", str(built / "embedding.json"), "--index", "3",
                  "--grid", "2", "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "plotdata_S3.csv") as fh:
        rows = list(csv.DictReader(fh))
    grid = [r for r in rows if r["kind"] == "grid"]
    assert len(grid) == 4
    assert {r["kind"] for r in rows} >= {"L", "L_1", "L_8"}
    assert all(float(r["S_n"]) == 0.0 for r in rows if r["kind"] == "L_1")


def test_plot_rows_bottom_line_is_sum_of_f(built):
    art = EmbeddingArtifact.load(built / "embedding.json")
    rows = [r for r in plot_rows(art, 4, 9) if r[3] == "L"]
    for a, b, val, _ in rows:
        expected = sum(float(eval_line(art, FiniteSequence.unit(i), a)[0]) for i in range(1, 5))
        assert val == pytest.approx(expected, abs=1e-12)


def test_plotdata_rejects_index(capsys, tmp_path, built):
    assert run(capsys, "plotdata", str(built / "embedding.json"), "--index", "9",
               "--out", str(tmp_path))[0] == 2
