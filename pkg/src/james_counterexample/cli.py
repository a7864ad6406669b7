"""Command-line front end.

Exit codes: 0 all checks pass, 1 a property was violated, 2 usage or data
error.  Every report embeds the config and seed it came from, and the
artifact hash where one is involved.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .counterexample import CheckReport, CounterexampleSystem, eval_combination_grid, line_sups
from .embedding import EmbeddingArtifact, EmbeddingMode, build_embedding, default_probes, dumps
from .james import FiniteSequence, NormVariant, james_norm
from .suites import RunConfig, run_fuzz, run_verify

log = logging.getLogger("james_counterexample")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

FLAG_FIELDS = {"n": "N", "mode": "mode", "delta": "delta", "trials": "fuzz_trials",
               "seed": "seed", "grid": "grid_resolution", "out": "output_dir",
               "probes": "probe_count"}


class UsageError(Exception):
    pass


def _parse_vector(text: str) -> FiniteSequence:
    path = Path(text)
    if not text.lstrip().startswith("[") and path.exists():
        text = path.read_text()
    try:
        return FiniteSequence.from_json(json.loads(text))
    except (json.JSONDecodeError, ValueError) as exc:
        raise UsageError(f"cannot parse vector: {exc}") from exc


def load_config(args) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        unknown = set(base) - set(RunConfig.field_names())
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for flag, name in FLAG_FIELDS.items():
        val = getattr(args, flag, None)
        if val is not None:
            base[name] = val
    try:
        return RunConfig(**base).validate()
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _write_report(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc))


def _finish(reports: list[CheckReport], seed: int, artifact_hash: str | None) -> tuple[list, bool]:
    out = [replace(r, seed=seed, artifact_hash=artifact_hash).to_json() for r in reports]
    return out, all(r.passed for r in reports)


def _summarize(checks: list[dict]) -> None:
    for c in checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['check']}")


def _load_artifact(path: str) -> EmbeddingArtifact:
    try:
        return EmbeddingArtifact.load(path)
    except FileNotFoundError as exc:
        raise UsageError(f"artifact not found: {path}") from exc
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise UsageError(f"corrupt artifact: {exc}") from exc


def cmd_jnorm(args) -> int:
    x = _parse_vector(args.vector)
    try:
        variant = NormVariant.parse(args.variant)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(json.dumps(james_norm(x, variant).to_json()))
    return EXIT_OK


def cmd_fuzz(args) -> int:
    cfg = load_config(args)
    checks, ok = _finish(run_fuzz(cfg), cfg.seed, None)
    path = Path(cfg.output_dir) / "fuzz_report.json"
    _write_report(path, {"command": "fuzz", "config": cfg.to_json(), "seed": cfg.seed,
                         "pass": ok, "checks": checks})
    _summarize(checks)
    print(f"report: {path}")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_build(args) -> int:
    cfg = load_config(args)
    mode = EmbeddingMode(cfg.mode)
    try:
        if mode is EmbeddingMode.NET:
            art = build_embedding(cfg.N, mode, delta=cfg.delta, seed=cfg.seed)
        else:
            probes = default_probes(cfg.N, cfg.probe_count, cfg.seed)
            art = build_embedding(cfg.N, mode, probe_set=probes, seed=cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = art.save(out / "embedding.json")
    system = {"config": cfg.to_json(), **CounterexampleSystem(art).descriptor()}
    system["hash"] = digest
    (out / "system.json").write_text(dumps(system))
    print(json.dumps({"artifact": str(out / "embedding.json"), "hash": digest,
                      "functionals": len(art.functionals), "M": art.M,
                      "M_source": art.M_source}))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args)
    art = _load_artifact(args.artifact)
    digest = art.content_hash()
    checks, ok = _finish(run_verify(art, cfg), cfg.seed, digest)
    path = Path(cfg.output_dir) / "verify_report.json"
    _write_report(path, {"command": "verify", "config": cfg.to_json(), "seed": cfg.seed,
                         "artifact_hash": digest, "M_eff": art.M, "M_source": art.M_source,
                         "pass": ok, "checks": checks})
    _summarize(checks)
    print(f"report: {path}")
    return EXIT_OK if ok else EXIT_VIOLATION


def plot_rows(art: EmbeddingArtifact, n: int, resolution: int) -> list[tuple]:
    """Rows (a, b, S_n(a, b), kind) on the grid plus exact values on each line."""
    sys_ = CounterexampleSystem(art)
    lam = FiniteSequence.ones(n)
    a = np.linspace(0.0, 1.0, resolution)
    b = np.linspace(0.0, 1.0, resolution)
    rows = []
    vals = eval_combination_grid(sys_, lam, a, b)
    for i, bv in enumerate(b):
        for j, av in enumerate(a):
            rows.append((float(av), float(bv), float(vals[i, j]), "grid"))
    line_a = np.unique(np.concatenate([a, art.centers]))
    levels = [(f"L_{k}", 2.0 ** -k) for k in range(1, art.N + 1)] + [("L", 0.0)]
    for name, bv in levels:
        line_vals = eval_combination_grid(sys_, lam, line_a, np.array([bv]))[0]
        rows.extend((float(av), bv, float(v), name) for av, v in zip(line_a, line_vals))
    return rows


def cmd_plotdata(args) -> int:
    cfg = load_config(args)
    art = _load_artifact(args.artifact)
    if not 1 <= args.index <= art.N:
        raise UsageError(f"--index must lie in [1, {art.N}]")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["a", "b", "S_n", "kind"])
    writer.writerows(plot_rows(art, args.index, cfg.grid_resolution))
    path = Path(cfg.output_dir) / f"plotdata_S{args.index}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())
    print(f"wrote {path}")
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--n", type=int, help="number of basis functions N")
    p.add_argument("--mode", choices=[m.value for m in EmbeddingMode], type=str.upper)
    p.add_argument("--delta", type=float, help="net resolution (NET mode)")
    p.add_argument("--probes", type=int, help="random probe vectors (PROBE_EXACT mode)")
    p.add_argument("--trials", type=int, help="random trials per suite")
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", type=int, help="grid resolution for cross-checks and plots")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="james-cx", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jnorm", help="James norm of a vector")
    p.add_argument("vector", help="JSON array, or a file containing one")
    p.add_argument("--variant", default="DIFFERENCES_ONLY",
                   help="DIFFERENCES_ONLY (default) or LEADING_TERM")
    p.set_defaults(func=cmd_jnorm)

    for name, func, helptext in [("fuzz", cmd_fuzz, "property suites for the James norm"),
                                 ("build", cmd_build, "build the embedding artifact")]:
        p = sub.add_parser(name, help=helptext)
        _add_run_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="verify the counterexample system")
    p.add_argument("artifact")
    _add_run_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plotdata", help="CSV samples of a partial sum S_n")
    p.add_argument("artifact")
    p.add_argument("--index", type=int, required=True, help="partial sum index n")
    _add_run_flags(p)
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
