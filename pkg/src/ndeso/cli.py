"""Command-line interface: ``ndeso {synth,resample,evaluate,compare,stats}``.

Output files are deterministic for fixed flags and inputs. Wall-clock
resampling times are the one exception: they go to standard error and to a
separate timing CSV, never into the results CSV or JSON reports.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .classifiers import ClassifierSpec
from .dataset import Dataset, DatasetError, bundled_datasets, class_stats, generate_synthetic, load_csv, write_csv
from .geometry import DistanceMetric
from .harness import ExperimentRecord, run_experiment, run_grid
from .metrics import confusion_matrix, gmean, macro_prf
from .resamplers import METHODS, ResamplerSpec, resample
from .stats import MISSING_POLICIES, ScoreTable, cd_groups, rank_analysis

DEFAULT_SEED = 20240101
SCHEMA_VERSION = 1
RESULT_COLUMNS = ("dataset", "resampler", "classifier", "seed", "folds", "gmean_mean", "gmean_folds",
                  "precision_macro", "recall_macro", "f1_macro", "status", "message")
TIMING_COLUMNS = ("dataset", "resampler", "classifier", "resample_time_s")

log = logging.getLogger("ndeso")


class CLIError(Exception):
    pass


def _fmt(v: float) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else format(float(v), ".17g")


def record_row(rec: ExperimentRecord) -> dict:
    return {
        "dataset": rec.dataset,
        "resampler": rec.resampler,
        "classifier": rec.classifier,
        "seed": str(rec.seed),
        "folds": str(rec.folds),
        "gmean_mean": _fmt(rec.gmean_mean) if rec.ok else "-",
        "gmean_folds": ";".join(_fmt(g) for g in rec.gmean_folds),
        "precision_macro": _fmt(rec.precision_macro),
        "recall_macro": _fmt(rec.recall_macro),
        "f1_macro": _fmt(rec.f1_macro),
        "status": rec.status,
        "message": rec.message,
    }


def write_results(records, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, RESULT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rec in records:
            w.writerow(record_row(rec))


def write_timings(records, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_COLUMNS)
        for rec in records:
            w.writerow([rec.dataset, rec.resampler, rec.classifier, f"{rec.resample_seconds:.6f}"])


def timing_path(out: Path) -> Path:
    return out.with_name(out.stem + ".timing.csv")


def _write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load(path, has_header) -> Dataset:
    p = Path(path)
    if not p.is_file():
        raise CLIError(f"input file not found: {p}")
    return load_csv(p, has_header=has_header)


def _resampler(args, method=None) -> ResamplerSpec:
    return ResamplerSpec(method or args.method, k=args.k, metric=args.metric,
                         auto_retry_k=args.auto_retry_k)


def _counts_text(ds) -> str:
    return ", ".join(f"{k}:{v}" for k, v in class_stats(ds).counts.items())


def cmd_synth(args) -> int:
    counts = [int(c) for c in args.counts.split(",")]
    ds = generate_synthetic(args.seed, counts, args.noise)
    write_csv(ds, args.out)
    print(f"wrote {ds.n} rows ({_counts_text(ds)}) to {args.out}")
    return 0


def cmd_resample(args) -> int:
    ds = _load(args.input, args.has_header)
    spec = _resampler(args)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    outcome = resample(spec, ds, rng)
    log.info("resample %s took %.6f s", spec, outcome.seconds)
    if not outcome.ok:
        raise CLIError(f"resampling failed at stage {outcome.stage}: {outcome.message}")
    write_csv(outcome.dataset, args.output)
    print(f"{spec}: before [{_counts_text(ds)}] after [{_counts_text(outcome.dataset)}] "
          f"resample_time_s={outcome.seconds:.6f}")
    return 0


def _evaluate_external(args, ds) -> ExperimentRecord:
    rows, preds = [], []
    with Path(args.predictions).open(newline="", encoding="utf-8") as fh:
        for line in csv.reader(fh):
            if not line or line[0].strip() in ("", "row_index"):
                continue
            if len(line) != 2:
                raise CLIError(f"prediction rows need row_index,predicted_label: {line}")
            rows.append(int(line[0]))
            preds.append(line[1].strip())
    index = {name: i for i, name in enumerate(ds.classes)}
    unknown = sorted(set(preds) - set(index))
    if unknown:
        raise CLIError(f"predicted labels not in dataset: {unknown}")
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0 or rows.min() < 0 or rows.max() >= ds.n:
        raise CLIError("prediction row indices out of range")
    cm = confusion_matrix(ds.labels[rows], [index[p] for p in preds], ds.n_classes)
    rec = ExperimentRecord(args.name or Path(args.input).stem, "external", "external", args.seed)
    rec.gmean_folds = [gmean(cm)]
    rec.precision_macro, rec.recall_macro, rec.f1_macro = macro_prf(cm)
    return rec


def cmd_evaluate(args) -> int:
    ds = _load(args.input, args.has_header)
    name = args.name or Path(args.input).stem
    if args.predictions:
        rec = _evaluate_external(args, ds)
        resampler, classifier = None, None
    else:
        resampler, classifier = _resampler(args), ClassifierSpec.parse(args.classifier)
        rec = run_experiment(ds, resampler, classifier, args.seed, name, args.split_first)
        log.info("resample %s on %s took %.6f s", resampler, name, rec.resample_seconds)
    write_results([rec], args.out)
    if args.report:
        _write_json({
            "schema_version": SCHEMA_VERSION,
            "command": "evaluate",
            "dataset": name,
            "resampler": None if resampler is None else str(resampler),
            "metric": None if resampler is None else str(resampler.metric),
            "k": None if resampler is None else resampler.k_value,
            "auto_retry_k": bool(args.auto_retry_k),
            "classifier": rec.classifier,
            "seed": args.seed,
            "protocol": "split-first" if args.split_first else "resample-first",
            "status": rec.status,
            "message": rec.message,
            "folds": rec.folds,
            "gmean_mean": None if not rec.ok else rec.gmean_mean,
            "gmean_folds": rec.gmean_folds,
            "precision_macro": None if not rec.ok else rec.precision_macro,
            "recall_macro": None if not rec.ok else rec.recall_macro,
            "f1_macro": None if not rec.ok else rec.f1_macro,
        }, args.report)
    shown = "-" if not rec.ok else f"{rec.gmean_mean:.4f}"
    print(f"{name} {rec.resampler} {rec.classifier}: status={rec.status} gmean={shown}")
    return 0


def cmd_compare(args) -> int:
    datasets = {}
    if args.bundled:
        datasets.update(bundled_datasets())
    elif args.synthetic or not args.inputs:
        datasets["synthetic"] = generate_synthetic(args.seed)
    for path in args.inputs:
        name = Path(path).stem
        if name in datasets:
            raise CLIError(f"duplicate dataset name {name!r}")
        datasets[name] = _load(path, args.has_header)
    methods = [_resampler(args, m.strip()) for m in args.methods.split(",") if m.strip()]
    classifiers = [ClassifierSpec.parse(c) for c in args.classifiers.split(",") if c.strip()]
    jobs = None if args.jobs == 0 else args.jobs
    records = run_grid(datasets, methods, classifiers, args.seed, jobs, args.split_first)
    out = Path(args.out)
    write_results(records, out)
    write_timings(records, args.timing_out or timing_path(out))
    for rec in records:
        log.info("%s %s %s resample_time_s=%.6f status=%s", rec.dataset, rec.resampler,
                 rec.classifier, rec.resample_seconds, rec.status)
    failed = sum(not r.ok for r in records)
    print(f"wrote {len(records)} records to {out} ({failed} failed)")
    return 0


def read_score_table(path, classifier: str | None = None) -> ScoreTable:
    """Pivot a results CSV into datasets x resamplers of mean G-mean.

    Rows are datasets (``dataset/classifier`` when several classifiers are
    present and none is selected). Failed runs become missing cells.
    """
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise CLIError(f"{path}: no result rows")
    missing_cols = set(("dataset", "resampler", "classifier", "gmean_mean", "status")) - set(rows[0])
    if missing_cols:
        raise CLIError(f"{path}: missing columns {sorted(missing_cols)}")
    if classifier is not None:
        rows = [r for r in rows if r["classifier"] == classifier]
        if not rows:
            raise CLIError(f"no rows for classifier {classifier!r}")
    multi = len({r["classifier"] for r in rows}) > 1
    row_names: list[str] = []
    methods: list[str] = []
    cells = {}
    for r in rows:
        key = f"{r['dataset']}/{r['classifier']}" if multi else r["dataset"]
        if key not in row_names:
            row_names.append(key)
        if r["resampler"] not in methods:
            methods.append(r["resampler"])
        ok = r["status"] == "ok" and r["gmean_mean"] not in ("", "-")
        cells[key, r["resampler"]] = float(r["gmean_mean"]) if ok else np.nan
    scores = np.array([[cells.get((d, m), np.nan) for m in methods] for d in row_names])
    return ScoreTable(scores, row_names, methods)


def cmd_stats(args) -> int:
    table = read_score_table(args.input, args.classifier)
    result = rank_analysis(table, args.alpha, args.missing_cell)
    groups = cd_groups(result.mean_ranks, result.cd)
    sig_pairs = [[result.methods[a], result.methods[b]]
                 for a in range(len(result.methods)) for b in range(a + 1, len(result.methods))
                 if result.significant[a, b]]
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "stats",
        "alpha": result.alpha,
        "missing_cell_policy": result.missing_policy,
        "dropped_rows": result.dropped_rows,
        "n_datasets": result.n_datasets,
        "k_methods": len(result.methods),
        "methods": result.methods,
        "mean_ranks": {m: float(r) for m, r in zip(result.methods, result.mean_ranks)},
        "friedman_chi2": result.chi2,
        "p_value": result.p_value,
        "reject_null": result.reject_null,
        "critical_difference": result.cd,
        "significant_pairs": sig_pairs,
        "groups": [[result.methods[i] for i in g] for g in groups],
    }
    _write_json(report, args.out)
    if args.cd_out:
        with Path(args.cd_out).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("method", "mean_rank", "groups"))
            for i in np.argsort(result.mean_ranks, kind="stable"):
                member = [str(g) for g, grp in enumerate(groups) if i in grp]
                w.writerow((result.methods[i], format(float(result.mean_ranks[i]), ".17g"), ";".join(member)))
    print(f"chi2={result.chi2:.4f} p={result.p_value:.4g} CD={result.cd:.4f} "
          f"significant pairs={len(sig_pairs)}")
    return 0


def _add_shared(p, *, k=True, seed=True, header=True):
    if seed:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED})")
    if k:
        p.add_argument("--k", type=int, default=None, help="neighbor count for the resampler")
        p.add_argument("--metric", type=DistanceMetric.parse, default=DistanceMetric("euclidean"),
                       help="euclidean, cityblock, minkowski[:p], cosine or hamming")
        p.add_argument("--auto-retry-k", action="store_true",
                       help="lower k step by step until a neighbor-based baseline succeeds")
    if header:
        p.add_argument("--has-header", action="store_true", help="input CSVs start with a header row")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ndeso", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log timings to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write the synthetic 3-class dataset")
    _add_shared(p, k=False, header=False)
    p.add_argument("--counts", default="50,500,100")
    p.add_argument("--noise", type=float, default=0.75)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("resample", help="resample one CSV file")
    _add_shared(p)
    p.add_argument("--method", choices=METHODS, default="ndeso")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("evaluate", help="run one dataset/resampler/classifier cell")
    _add_shared(p)
    p.add_argument("--method", choices=METHODS, default="ndeso")
    p.add_argument("--classifier", default="knn", help="knn[:k] or tree[:max_depth]")
    p.add_argument("--split-first", action="store_true", help="split before resampling (no leakage)")
    p.add_argument("--predictions", help="score external predictions (row_index,predicted_label)")
    p.add_argument("--name", help="dataset name used in outputs (default: file stem)")
    p.add_argument("--out", required=True, help="results CSV")
    p.add_argument("--report", help="JSON report")
    p.add_argument("input")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run a dataset x resampler x classifier grid")
    _add_shared(p)
    p.add_argument("--methods", default="ndeso,random_over,random_under,smote")
    p.add_argument("--classifiers", default="knn,tree")
    p.add_argument("--synthetic", action="store_true", help="include the synthetic dataset")
    p.add_argument("--bundled", action="store_true", help="include all bundled datasets")
    p.add_argument("--split-first", action="store_true")
    p.add_argument("--jobs", type=int, default=0, help="worker threads; 0 = executor default")
    p.add_argument("--out", required=True, help="results CSV")
    p.add_argument("--timing-out", help="timing CSV (default: <out stem>.timing.csv)")
    p.add_argument("inputs", nargs="*")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("stats", help="Friedman / Nemenyi statistics over a results CSV")
    p.add_argument("--alpha", type=float, choices=(0.05, 0.10), default=0.05)
    p.add_argument("--missing-cell", choices=MISSING_POLICIES, default="worst-rank")
    p.add_argument("--classifier", help="only use rows of this classifier")
    p.add_argument("--out", required=True, help="stats JSON")
    p.add_argument("--cd-out", help="critical-difference diagram CSV")
    p.add_argument("input")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (CLIError, DatasetError, ValueError, OSError) as exc:
        print(f"ndeso: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
