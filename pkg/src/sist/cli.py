"""Short isometric shapelet transform classifier: train, evaluate, grid, compare, bench.

Exit codes: 0 success, 1 other pipeline error, 2 missing input or bad flags,
3 unreadable or incompatible model / data shape, 4 oracle budget exceeded.
Errors go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import _backend
from .dataset import load_ucr
from .distance import RelaxMode
from .errors import (
    CandidateBudgetExceeded,
    CorruptModel,
    DimensionMismatch,
    LengthMismatch,
    LengthTooLarge,
    SchemaVersionMismatch,
    SistError,
    UnknownClass,
)
from .oracle import COMPARE_HEADER, DEFAULT_BUDGET, OracleConfig, compare, compare_csv_row
from .pipeline import (
    TABLE1,
    TABLE2,
    AblationReport,
    HyperGrid,
    Hyperparams,
    ablation_report,
    evaluate,
    grid_search_cv,
    load_model,
    save_model,
    train_sist,
)
from .selection import OverlapScope

EXIT_ERROR, EXIT_USAGE, EXIT_MODEL, EXIT_BUDGET = 1, 2, 3, 4


class UsageError(Exception):
    pass


class DatasetNotFound(Exception):
    pass


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _relax_pair(text: str) -> tuple[int, int]:
    try:
        left, right = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected L,R such as 3,3, got {text!r}") from None
    if left < 0 or right < 0:
        raise argparse.ArgumentTypeError("relaxation must be non-negative")
    return left, right


def _int_list(text: str, lowest: int = 0) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    if min(vals) < lowest:
        raise argparse.ArgumentTypeError(f"values must be >= {lowest}")
    return vals


def _positive_list(text: str) -> tuple[int, ...]:
    return _int_list(text, 1)


def _load(path, znorm=False):
    p = Path(path)
    if not p.is_file():
        raise DatasetNotFound(f"dataset not found: {path}")
    return load_ucr(p, znorm=znorm)


def _hp_from_args(args, name: str = "") -> Hyperparams:
    base = Hyperparams()
    if args.preset:
        key = name if args.preset == "auto" else args.preset
        if key not in TABLE2:
            raise UsageError(f"no preset for {key!r}; known: {', '.join(sorted(TABLE2))}")
        base = TABLE2[key]
    left, right = args.relax if args.relax is not None else (base.left, base.right)
    return Hyperparams(
        delete_overlap=args.delete_overlap if args.delete_overlap is not None else base.delete_overlap,
        L=args.length if args.length is not None else base.L,
        left=left,
        right=right,
        N=args.num_shapelets if args.num_shapelets is not None else base.N,
        relax_mode=RelaxMode(args.mode),
        overlap_scope=OverlapScope(args.scope),
        reg_c=args.reg_c,
        seed=args.seed,
        standardize=args.standardize,
    )


def _write(path, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _hp_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("hyperparameters")
    g.add_argument("--preset", help="start from a per-dataset selection; 'auto' uses the dataset name")
    g.add_argument("--length", type=_positive_int, help="shapelet length L (default 3)")
    g.add_argument("--relax", type=_relax_pair, help="left,right relaxation (default 3,3)")
    g.add_argument("--num-shapelets", type=_positive_int, help="shapelet number N (default 10)")
    g.add_argument("--delete-overlap", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--mode", choices=[m.value for m in RelaxMode], default="shifted")
    g.add_argument("--scope", choices=[s.value for s in OverlapScope], default="any")
    g.add_argument("--reg-c", type=float, default=1.0)
    g.add_argument("--standardize", action="store_true", help="z-score features before the SVM")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int, default=0, help="0 = auto; SIST_THREADS overrides")
    p.add_argument("--znorm", action="store_true", help="z-normalise each series on load")
    p.add_argument("--no-timestamps", action="store_true", help="omit wall-clock values from outputs")


class _Parser(argparse.ArgumentParser):
    """Flag errors come out as the same JSON object as every other failure."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, json.dumps({"error": "UsageError", "message": f"{self.prog}: {message}"}) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sist", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on a UCR-style file")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--report", help="training report JSON (default: <out>.train.json)")
    _hp_flags(p)
    _common(p)

    p = sub.add_parser("evaluate", help="score a model on a test file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", help="EvalReport JSON")
    p.add_argument("--csv", help="EvalReport CSV (header + one row)")
    _common(p)

    p = sub.add_parser("grid", help="k-fold CV grid search")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", choices=["table1"], default="table1")
    p.add_argument("--folds", type=_positive_int, default=10)
    p.add_argument("--length", type=_positive_list)
    p.add_argument("--left", type=_int_list)
    p.add_argument("--right", type=_int_list)
    p.add_argument("--num-shapelets", type=_positive_list)
    p.add_argument("--delete-overlap", choices=["true", "false", "both"], default="both")
    p.add_argument("--relax-search", choices=["independent", "joint"], default="independent",
                   help="joint keeps only cells with left == right")
    p.add_argument("--mode", choices=[m.value for m in RelaxMode], default="shifted")
    p.add_argument("--scope", choices=[s.value for s in OverlapScope], default="any")
    p.add_argument("--reg-c", type=float, default=1.0)
    p.add_argument("--out", default="cv_table.csv", help="cv_table CSV")
    p.add_argument("--best-out", help="winning hyperparameters JSON")
    _common(p)

    p = sub.add_parser("compare", help="SIST against the brute-force oracle")
    p.add_argument("--data", required=True, help="training file")
    p.add_argument("--test", required=True)
    p.add_argument("--oracle-min-len", type=_positive_int)
    p.add_argument("--oracle-max-len", type=_positive_int)
    p.add_argument("--oracle-num-shapelets", type=_positive_int)
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_BUDGET)
    p.add_argument("--out", default="-", help="comparison CSV")
    p.add_argument("--ablation-out", help="stage timing CSV")
    p.add_argument("--emit-plot-data", metavar="PATH", help="CSV of (scale, time) points")
    _hp_flags(p)
    _common(p)

    p = sub.add_parser("bench", help="median-of-N timings, kernels and training")
    p.add_argument("--data", help="training file (default: synthetic)")
    p.add_argument("--repeats", type=_positive_int, default=3)
    p.add_argument("--out", default="-", help="benchmark CSV")
    _hp_flags(p)
    _common(p)
    return parser


def _summary(**kv) -> str:
    return " ".join(f"{k}={v}" for k, v in kv.items())


def _fmt_time(t, args) -> str:
    return "NA" if args.no_timestamps or t is None else f"{t:.4f}s"


def cmd_train(args) -> int:
    d = _load(args.data, args.znorm)
    hp = _hp_from_args(args, d.name)
    model = train_sist(d, hp)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_bytes(save_model(model, timestamps=not args.no_timestamps))
    report = {
        "dataset": d.name,
        "n": d.n,
        "m": d.m,
        "hyperparams": hp.to_dict(),
        "candidates": model.candidates,
        "selected": len(model.basis),
        "train_accuracy": model.train_accuracy,
        "stage_times_s": None if args.no_timestamps else model.stage_times,
        "backend": _backend.NAME,
    }
    _write(args.report or f"{args.out}.train.json", json.dumps(report, indent=2) + "\n")
    print(_summary(train_accuracy=repr(model.train_accuracy), n=d.n, candidates=model.candidates,
                   selected=len(model.basis), time=_fmt_time(model.stage_times["total"], args)))
    return 0


def cmd_evaluate(args) -> int:
    mp = Path(args.model)
    if not mp.is_file():
        raise DatasetNotFound(f"model not found: {args.model}")
    model = load_model(mp.read_bytes())
    d = _load(args.data, args.znorm)
    rep = evaluate(model, d)
    if args.no_timestamps:
        rep = type(rep)(rep.accuracy, rep.n_test, rep.classes, rep.confusion, None, None, None)
    if args.report:
        _write(args.report, rep.to_json())
    if args.csv:
        _write(args.csv, rep.CSV_HEADER + "\n" + rep.to_csv_row() + "\n")
    t = None if rep.transform_time_s is None else rep.transform_time_s + rep.predict_time_s
    print(_summary(accuracy=repr(rep.accuracy), n=rep.n_test, time=_fmt_time(t, args)))
    return 0


def cmd_grid(args) -> int:
    d = _load(args.data, args.znorm)
    do = {"true": (True,), "false": (False,), "both": (True, False)}[args.delete_overlap]
    grid = HyperGrid(
        delete_overlap=do,
        L=args.length or TABLE1.L,
        left=args.left or TABLE1.left,
        right=args.right or TABLE1.right,
        N=args.num_shapelets or TABLE1.N,
        relax_mode=RelaxMode(args.mode),
        overlap_scope=OverlapScope(args.scope),
        reg_c=args.reg_c,
        seed=args.seed,
    )
    if any(L > d.m for L in grid.L):
        raise UsageError(f"shapelet length above series length {d.m}")
    cells = grid.cells()
    if args.relax_search == "joint":
        cells = [hp for hp in cells if hp.left == hp.right]
    if not cells:
        raise UsageError("joint relax search needs a value shared by --left and --right")
    t = time.perf_counter()
    res = grid_search_cv(d, cells, k=args.folds, seed=args.seed)
    elapsed = time.perf_counter() - t
    _write(args.out, res.to_csv())
    best = res.best.to_dict()
    if args.best_out:
        _write(args.best_out, json.dumps(best, indent=2) + "\n")
    mean = next(r.mean_accuracy for r in res.table if r.hp == res.best)
    print(_summary(cells=len(res.table), best=json.dumps(best, separators=(",", ":")),
                   cv_accuracy=repr(mean), time=_fmt_time(elapsed, args)))
    return 0


def _scaled_subsets(d, fractions):
    # the first ceil(f * n_c) members of each class, so every subset stays binary
    for f in fractions:
        idx = []
        for label in (-1, 1):
            members = np.flatnonzero(d.y == label)
            idx.extend(members[: max(1, math.ceil(f * members.size))].tolist())
        yield f, d.subset(sorted(idx))


def cmd_compare(args) -> int:
    train = _load(args.data, args.znorm)
    test = _load(args.test, args.znorm)
    hp = _hp_from_args(args, train.name)
    cfg = OracleConfig(
        min_len=args.oracle_min_len or hp.L,
        max_len=args.oracle_max_len or args.oracle_min_len or hp.L,
        N=args.oracle_num_shapelets or hp.N,
        budget=args.budget,
    )
    row = compare(train, test, hp, cfg)
    if args.no_timestamps:
        row["time_sist_s"] = row["time_oracle_s"] = None
    _write(args.out, COMPARE_HEADER + "\n" + compare_csv_row(row) + "\n")
    if args.ablation_out:
        ab = ablation_report(train, None, hp, cfg)
        props = ab.proportions()
        text = AblationReport.CSV_HEADER + "," + ",".join(props) + "\n"
        text += ab.to_csv_row() + "," + ",".join(repr(v) for v in props.values()) + "\n"
        _write(args.ablation_out, text)
    if args.emit_plot_data:
        from .oracle import brute_force_st

        lines = ["pipeline,scale,n,m,time_s"]
        for f, sub in _scaled_subsets(train, (0.25, 0.5, 0.75, 1.0)):
            t = time.perf_counter()
            train_sist(sub, hp)
            ts = time.perf_counter() - t
            t = time.perf_counter()
            brute_force_st(sub, cfg.min_len, cfg.max_len, cfg.N, cfg.budget, hp.reg_c, hp.seed)
            to = time.perf_counter() - t
            lines.append(f"sist,{f!r},{sub.n},{sub.m},{ts!r}")
            lines.append(f"oracle,{f!r},{sub.n},{sub.m},{to!r}")
        _write(args.emit_plot_data, "\n".join(lines) + "\n")
    print(_summary(acc_sist=repr(row["acc_sist"]), acc_oracle=repr(row["acc_oracle"]),
                   cands_sist=row["cands_sist"], cands_oracle=row["cands_oracle"],
                   time_sist=_fmt_time(row["time_sist_s"], args),
                   time_oracle=_fmt_time(row["time_oracle_s"], args)))
    return 0


def _median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return statistics.median(times)


def cmd_bench(args) -> int:
    from .dataset import ValidatedDataset
    from .distance import RelaxConfig

    if args.data:
        d = _load(args.data, args.znorm)
    else:
        rng = np.random.default_rng(args.seed)
        X = rng.standard_normal((60, 120)).cumsum(axis=1)
        d = ValidatedDataset(X, tuple("ab"[i % 2] for i in range(60)), name="synthetic", classes=("a", "b"))
    hp = _hp_from_args(args, d.name)
    from .selection import extract_candidates

    pool = extract_candidates(d, hp.L)
    cfg = RelaxConfig(hp.left, hp.right, hp.relax_mode)
    impls = _backend.implementations()
    lines = ["case,backend,n,m,median_s"]
    for name, impl in impls.items():
        t = _median_time(lambda: _backend.relaxed_matrix(pool.values, pool.offsets, d.series,
                                                         cfg.left, cfg.right, cfg.mode.code, impl=impl),
                         args.repeats)
        lines.append(f"relaxed_matrix,{name},{d.n},{d.m},{t!r}")
    t = _median_time(lambda: train_sist(d, hp), args.repeats)
    lines.append(f"train_sist,{_backend.NAME},{d.n},{d.m},{t!r}")
    _write(args.out, "\n".join(lines) + "\n")
    print(_summary(dataset=d.name or "synthetic", backend=_backend.NAME, threads=_backend.threads(),
                   train_median=f"{t:.4f}s"))
    return 0


COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "grid": cmd_grid,
    "compare": cmd_compare,
    "bench": cmd_bench,
}


def _fail(code: int, kind: str, message: str, hint: str | None = None) -> int:
    err = {"error": kind, "message": message}
    if hint:
        err["hint"] = hint
    print(json.dumps(err), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not os.environ.get("SIST_THREADS"):
        _backend.set_threads(args.threads)
    try:
        return COMMANDS[args.command](args)
    except (DatasetNotFound, FileNotFoundError) as exc:
        return _fail(EXIT_USAGE, "DatasetNotFound", str(exc) if isinstance(exc, DatasetNotFound)
                     else f"dataset not found: {exc.filename}")
    except (UsageError, LengthTooLarge) as exc:
        return _fail(EXIT_USAGE, "UsageError", str(exc))
    except (SchemaVersionMismatch, CorruptModel, DimensionMismatch, LengthMismatch, UnknownClass) as exc:
        return _fail(EXIT_MODEL, type(exc).__name__, str(exc))
    except CandidateBudgetExceeded as exc:
        return _fail(EXIT_BUDGET, "CandidateBudgetExceeded", str(exc),
                     "pass --budget with a larger value or narrow --oracle-min-len/--oracle-max-len")
    except SistError as exc:
        return _fail(EXIT_ERROR, type(exc).__name__, str(exc))
    except ValueError as exc:
        return _fail(EXIT_USAGE, "UsageError", str(exc))


if __name__ == "__main__":
    sys.exit(main())
