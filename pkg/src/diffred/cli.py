"""Command-line front end: ``diffred <subcommand> [options]``.

Exit codes: 0 success, 2 I/O or parse failure, 3 bad configuration,
4 numerical failure. Options can also come from a flat ``key = value`` file
given with ``--config``; command-line flags win over the file, the file wins
over built-in defaults.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import metrics
from .data import DataMatrix, load_matrix, preprocess, read_sidecar, save_matrix, write_sidecar
from .embed import DiffRedConfig, auto_config, diffred_embed, energy_match, pca_embed, rmap_embed
from .errors import ConfigError, DiffRedError, NumericError
from .experiments import GRID_COLUMNS, grid_search, validate_bounds
from .projection import resolve_threads
from .rng import Purpose, RandomStream
from .spectral import DEFAULT_MAX_ITER, DEFAULT_TOL, residual_stable_rank_curve
from .synth import SpectrumProfile, synth_spiked

_EXT = {"bin": ".bin", "csv": ".csv"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: error: {message}\n")


def parse_profile(text: str) -> SpectrumProfile:
    """``"10,1x50"`` -> one value 10 followed by fifty 1s."""
    values = []
    try:
        for item in text.replace(" ", "").split(","):
            if not item:
                continue
            if "x" in item:
                v, c = item.split("x", 1)
                values.extend([float(v)] * int(c))
            else:
                values.append(float(item))
    except ValueError:
        raise ConfigError(f"bad spectrum profile {text!r}") from None
    return SpectrumProfile(tuple(values))


def parse_int_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None


def _add_common(p, input_required=True):
    p.add_argument("--config", help="flat key = value file of option defaults")
    p.add_argument("--input", required=False, help="input matrix file")
    p.add_argument("--format", choices=["csv", "bin"], default="bin", help="input file format")
    p.add_argument("--header", action="store_true", help="skip one header row in CSV input")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", default=None, help="worker threads (default: $DIFFRED_THREADS or CPU count)")
    p.add_argument("--out", help="output file or directory")
    p.add_argument("--timing", action="store_true", help="record wall-clock times (outputs no longer byte-reproducible)")
    p.set_defaults(_input_required=input_required)


def _add_svd(p):
    p.add_argument("--svd-tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--svd-max-iter", type=int, default=DEFAULT_MAX_ITER)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diffred", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("preprocess", help="row-normalize and column-center a dataset")
    _add_common(p)
    p.add_argument("--zero-rows", choices=["abort", "drop"], default="abort")
    p.add_argument("--force", action="store_true", help="reprocess input already flagged as preprocessed")

    p = sub.add_parser("embed", help="compute a DiffRed, PCA or random-map embedding")
    _add_common(p)
    _add_svd(p)
    p.add_argument("--method", choices=["diffred", "pca", "rmap"], default="diffred")
    p.add_argument("--d", type=int)
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    p.add_argument("--eta", type=int, default=100)
    p.add_argument("--alpha", type=int, default=20)
    p.add_argument("--stress", default="exact", help="'exact' or 'sampled:N'")
    p.add_argument("--out-format", choices=["csv", "bin"], default="bin")

    p = sub.add_parser("gridsearch", help="evaluate every (k1, k2) split for each target dimension")
    _add_common(p)
    _add_svd(p)
    p.add_argument("--d", required=False, help="comma-separated target dimensions")
    p.add_argument("--eta", type=int, default=100)
    p.add_argument("--stress", default="exact")

    p = sub.add_parser("validate", help="check the Stress and M1 bounds over repeated runs")
    _add_common(p, input_required=False)
    _add_svd(p)
    p.add_argument("--d", type=int)
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    p.add_argument("--eta", type=int, default=100)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--stress", default="exact")
    p.add_argument("--n", type=int, help="synthetic data: number of points")
    p.add_argument("--D", type=int, help="synthetic data: dimension")
    p.add_argument("--profile", help="synthetic data: singular values, e.g. '10,1x50'")

    p = sub.add_parser("stablerank", help="stable rank of the residual as a function of k1")
    _add_common(p)
    _add_svd(p)
    p.add_argument("--k1-max", type=int)

    p = sub.add_parser("metrics", help="M1 and Stress of an existing embedding")
    _add_common(p)
    p.add_argument("--embedding", help="embedding matrix file")
    p.add_argument("--embedding-format", choices=["csv", "bin"], default=None)
    p.add_argument("--stress", default="exact")
    p.add_argument("--energy-match", action="store_true", help="rescale the embedding to the data's energy first")

    p = sub.add_parser("synth", help="write a synthetic matrix with a prescribed spectrum")
    _add_common(p, input_required=False)
    p.add_argument("--n", type=int)
    p.add_argument("--D", type=int)
    p.add_argument("--profile")
    p.add_argument("--centered", action="store_true", help="make columns exactly zero-mean")
    p.add_argument("--out-format", choices=["csv", "bin"], default="bin")
    return parser


def read_config_file(path) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config file {path}: {exc}") from exc
    return {k.replace("-", "_"): v for k, v in cp["run"].items()}


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = read_config_file(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in values.items():
        if key not in known or key in ("config", "help"):
            raise ConfigError(f"unknown key {key!r} in config file")
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.strip().lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = raw
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise ConfigError(f"{args.command}: missing required option(s) " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _load_input(args) -> DataMatrix:
    _require(args, "input")
    A = load_matrix(args.input, args.format, header=args.header)
    side = read_sidecar(args.input) if args.format == "bin" else None
    if side and side.get("column_centered"):
        A = DataMatrix(A.values, row_normalized=bool(side.get("row_normalized")), column_centered=True,
                       history=tuple(side.get("history", ())))
    return A


def _dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def _out_dir(args) -> Path:
    _require(args, "out")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_preprocess(args):
    _require(args, "input", "out")
    side = read_sidecar(args.input) if args.format == "bin" else None
    if side and (side.get("column_centered") or side.get("row_normalized")) and not args.force:
        raise ConfigError(f"{args.input} is already preprocessed; pass --force to process it again")
    A = load_matrix(args.input, args.format, header=args.header)
    P = preprocess(A, zero_rows=args.zero_rows)
    save_matrix(args.out, P, "bin")
    record = P.flags()
    record["source"] = str(args.input)
    write_sidecar(args.out, record)
    print(f"wrote {args.out}: {P.n} x {P.D}, rows normalized then columns centered")
    return 0


def _report_json(report: metrics.MetricReport) -> dict:
    return report.to_dict()


def cmd_embed(args):
    A = _load_input(args)
    X = A.values
    out = _out_dir(args)
    threads = resolve_threads(args.threads)
    ext = _EXT[args.out_format]
    t0 = time.perf_counter()
    stress_stream = RandomStream(args.seed, Purpose.PAIR_SAMPLE, 0)
    svd_kw = dict(svd_tol=args.svd_tol, svd_max_iter=args.svd_max_iter)

    if args.method == "rmap":
        _require(args, "d")
        res = rmap_embed(A, args.d, alpha=args.alpha, seed=args.seed, stress_mode=args.stress, threads=threads)
        for i, emb in enumerate(res.embeddings):
            save_matrix(out / f"rmap_{i:03d}{ext}", emb.values, args.out_format)
        elapsed = 1e3 * (time.perf_counter() - t0)
        report = metrics.MetricReport(
            m1=res.m1_mean, stress=res.stress_mean, stress_mode=args.stress, bound_value=None,
            wall_time_ms=elapsed if args.timing else None,
            provenance={
                "method": "rmap", "d": args.d, "alpha": args.alpha, "seed": args.seed,
                "ci_method": "normal 95%",
                "m1_ci": list(res.m1_ci) if res.m1_ci else None,
                "stress_ci": list(res.stress_ci) if res.stress_ci else None,
                "m1_per_map": res.m1.tolist(), "stress_per_map": res.stress.tolist(),
            },
        )
        _dump_json(out / "report.json", _report_json(report))
        ci = res.stress_ci
        print(f"rmap d={args.d} alpha={args.alpha}: M1 {res.m1_mean:.6g}, Stress {res.stress_mean:.6g}"
              + (f" (95% CI {ci[0]:.6g} .. {ci[1]:.6g})" if ci else " (CI undefined for one map)"))
        return 0

    scan = None
    if args.method == "pca":
        _require(args, "d")
        emb = pca_embed(A, args.d, tol=args.svd_tol, max_iter=args.svd_max_iter)
        sidecar = {"method": "pca", "k1": args.d, "k2": 0, "eta": None, "seed": None,
                   "svd_tol": args.svd_tol, "bound_value": None}
        bound = None
    else:
        if args.k1 is not None and args.k2 is not None:
            cfg = DiffRedConfig(args.k1, args.k2, eta=args.eta, seed=args.seed, **svd_kw)
            summary = None
        else:
            _require(args, "d")
            cfg, choice, summary = auto_config(A, args.d, eta=args.eta, seed=args.seed, **svd_kw)
            scan = [dict(zip(("k1", "k2", "p", "bound"), row)) for row in choice.scan]
        if args.d is not None and args.d != cfg.d:
            raise ConfigError(f"--k1 + --k2 = {cfg.d} disagrees with --d {args.d}")
        emb = diffred_embed(A, cfg, summary=summary, threads=threads)
        bound = emb.provenance["bound_value"]
        sidecar = {"method": "diffred", "k1": cfg.k1, "k2": cfg.k2, "eta": cfg.eta, "seed": cfg.seed,
                   "svd_tol": cfg.svd_tol, "bound_value": bound}
    path = out / f"embedding{ext}"
    save_matrix(path, emb.values, args.out_format)
    write_sidecar(path, sidecar)
    m1_val = metrics.m1(X, emb.values)
    s_val = metrics.stress(X, emb.values, mode=args.stress, stream=stress_stream, threads=threads)
    elapsed = 1e3 * (time.perf_counter() - t0)
    provenance = dict(sidecar)
    provenance.update({k: v for k, v in emb.provenance.items() if k not in provenance})
    if scan is not None:
        provenance["scan"] = scan
    report = metrics.MetricReport(m1=m1_val, stress=s_val, stress_mode=args.stress, bound_value=bound,
                                  wall_time_ms=elapsed if args.timing else None, provenance=provenance)
    _dump_json(out / "report.json", _report_json(report))
    print(f"{sidecar['method']} k1={sidecar['k1']} k2={sidecar['k2']}: M1 {m1_val:.6g}  Stress {s_val:.6g}")
    return 0


def cmd_gridsearch(args):
    A = _load_input(args)
    _require(args, "d")
    out = _out_dir(args)
    d_list = parse_int_list(args.d)
    reports, beta = grid_search(A, d_list, eta=args.eta, seed=args.seed, stress_mode=args.stress,
                                threads=resolve_threads(args.threads), svd_tol=args.svd_tol,
                                svd_max_iter=args.svd_max_iter)
    with open(out / "grid.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(GRID_COLUMNS)
        for rep in reports:
            for rec in rep.records():
                rec = list(rec)
                if not args.timing:
                    rec[7] = ""
                w.writerow(rec)
    summary = {
        "beta": beta if np.isfinite(beta) else None,
        "dimensions": [
            {"d": r.d, "bound_optimal_k1": r.rows[r.bound_optimal].k1,
             "stress_optimal_k1": r.rows[r.stress_optimal].k1, "stress_gap": r.stress_gap}
            for r in reports
        ],
    }
    _dump_json(out / "grid_summary.json", summary)
    print(f"{'d':>4} {'k1':>4} {'k2':>4} {'p':>8} {'bound':>8} {'M1':>10} {'Stress':>8}")
    for rep in reports:
        for i, r in enumerate(rep.rows):
            mark = (" <bound" if i == rep.bound_optimal else "") + (" <stress" if i == rep.stress_optimal else "")
            print(f"{rep.d:>4} {r.k1:>4} {r.k2:>4} {r.p:8.4f} {r.bound:8.4f} {r.m1:10.3e} {r.stress:8.4f}{mark}")
    print(f"beta = {summary['beta']}")
    return 0


def cmd_validate(args):
    if args.input:
        A = _load_input(args)
    else:
        _require(args, "n", "D", "profile")
        A = synth_spiked(args.n, args.D, parse_profile(args.profile),
                         RandomStream(args.seed, Purpose.SYNTH_DATA, 0), centered=True)
    _require(args, "d")
    out = _out_dir(args)
    rep = validate_bounds(A, args.d, trials=args.trials, seed=args.seed, eta=args.eta, k1=args.k1, k2=args.k2,
                          stress_mode=args.stress, threads=resolve_threads(args.threads),
                          svd_tol=args.svd_tol, svd_max_iter=args.svd_max_iter)
    _dump_json(out / "validation.json", rep.to_dict())
    with open(out / "trials.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("trial", "seed", "m1", "stress"))
        for t, (m, s) in enumerate(zip(rep.m1_values, rep.stress_values)):
            w.writerow((t, args.seed + t, m, s))
    print(f"k1={rep.k1} k2={rep.k2} p={rep.p:.4f}")
    print(f"(a) Stress <= {rep.stress_bound:.4f}: {rep.stress_fraction:.2%} of {rep.trials} trials")
    print(f"(b) M1 <= {rep.m1_epsilon:.4g}: {rep.m1_fraction:.2%}")
    print(f"(c) bound-optimal vs grid-optimal Stress gap: {rep.grid_gap:.2%}")
    return 0


def cmd_stablerank(args):
    A = _load_input(args)
    _require(args, "out")
    curve = residual_stable_rank_curve(A, args.k1_max, tol=args.svd_tol, max_iter=args.svd_max_iter)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("k1", "stable_rank"))
        w.writerows(curve)
    for k1, rho in curve:
        print(f"{k1:>4} {rho:.6g}")
    return 0


def cmd_metrics(args):
    A = _load_input(args)
    _require(args, "embedding")
    fmt = args.embedding_format or args.format
    Y = load_matrix(args.embedding, fmt).values
    provenance = {"input": str(args.input), "embedding": str(args.embedding)}
    if args.energy_match:
        matched = energy_match(Y, A)
        Y = matched.values
        provenance["energy_match_scale"] = matched.provenance["energy_match_scale"]
    t0 = time.perf_counter()
    report = metrics.MetricReport(
        m1=metrics.m1(A, Y),
        stress=metrics.stress(A, Y, mode=args.stress, stream=RandomStream(args.seed, Purpose.PAIR_SAMPLE, 0),
                              threads=resolve_threads(args.threads)),
        stress_mode=args.stress,
        provenance=provenance,
    )
    report.wall_time_ms = 1e3 * (time.perf_counter() - t0) if args.timing else None
    text = report.to_json(indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def cmd_synth(args):
    _require(args, "n", "D", "profile", "out")
    A = synth_spiked(args.n, args.D, parse_profile(args.profile), RandomStream(args.seed, Purpose.SYNTH_DATA, 0),
                     centered=args.centered)
    save_matrix(args.out, A, args.out_format)
    if args.out_format == "bin":
        write_sidecar(args.out, {**A.flags(), "profile": args.profile, "seed": args.seed})
    print(f"wrote {args.out}: {A.n} x {A.D}")
    return 0


COMMANDS = {
    "preprocess": cmd_preprocess,
    "embed": cmd_embed,
    "gridsearch": cmd_gridsearch,
    "validate": cmd_validate,
    "stablerank": cmd_stablerank,
    "metrics": cmd_metrics,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](args)
    except DiffRedError as exc:
        print(f"diffred: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"diffred: numerical error: {exc}", file=sys.stderr)
        return NumericError.exit_code


if __name__ == "__main__":
    sys.exit(main())
