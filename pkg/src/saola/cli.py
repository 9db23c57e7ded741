"""Command-line entry point: selection, group selection, stability, trials,
benchmarks, and dataset inspection, with machine-readable outputs.

Every JSON/CSV output starts with a run manifest (command, resolved flags,
seeds, dataset fingerprint, version).  Given equal manifests the result
body is byte-identical; wall-clock timing lives outside the body.
"""

from __future__ import annotations

import argparse
import difflib
import hashlib
import json
import os
import sys
import time
from typing import Optional

from . import __version__, _kernels
from .dataset import (
    DataFormatError,
    Dataset,
    Grouping,
    OrderSpec,
    align_label_codes,
    load_svmlight,
    random_partition,
)
from .correlation import FISHER_Z, SU_DISCRETE, MeasureConfig
from .evaluation import order_trials
from .group_selection import select_groups
from .selection import SaolaConfig, select_features
from .stability import run_stability
from .synthetic import make_pinned_stream

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# manifest and output plumbing

def _file_fingerprint(*paths: str) -> str:
    digest = hashlib.sha256()
    for path in paths:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
    return digest.hexdigest()

def _manifest(command: str, args: argparse.Namespace, fingerprint: str,
              seeds: list[int]) -> dict:
    flags = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in ("func", "command", "out") and not callable(value)
    }
    return {
        "command": command,
        "flags": flags,
        "seeds": seeds,
        "dataset_fingerprint": fingerprint,
        "artifact_version": __version__,
    }


def _write_json(out: Optional[str], manifest: dict, result: dict, elapsed_ms: float) -> None:
    payload = {"manifest": manifest, "result": result, "elapsed_ms": round(elapsed_ms, 3)}
    text = json.dumps(payload, indent=2)
    if out is None:
        print(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _write_csv(out: Optional[str], manifest: dict, header: list[str], rows: list[list]) -> None:
    lines = ["# manifest: " + json.dumps(manifest, sort_keys=True)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join("" if v is None else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if out is None:
        print(text, end="")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# shared flag groups

def _add_data_flags(p: argparse.ArgumentParser, with_kind: bool = True) -> None:
    p.add_argument("--data", required=True, help="svmlight/libsvm input file")
    if with_kind:
        p.add_argument("--kind", required=True, choices=["discrete", "continuous"],
                       help="how to interpret feature values")
    p.add_argument("--num-features", type=int, default=None,
                   help="override the feature count (default: max index seen)")


def _add_measure_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, default=0.0,
                   help="relevance threshold for discrete data (default 0)")
    p.add_argument("--alpha", type=float, default=0.01,
                   help="significance level for continuous data (default 0.01)")
    p.add_argument("--bound", choices=["min", "max"], default="min",
                   help="redundancy bound: smaller or larger of the two relevances")
    p.add_argument("--tie", choices=["strict", "discard-new"], default="strict",
                   help="how equal relevances behave in the redundancy check")
    p.add_argument("--top-k", type=int, default=None,
                   help="keep only the k highest-relevance features")


def _add_order_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--order", choices=["natural", "shuffle"], default="natural")
    p.add_argument("--seed", type=int, default=0)


def _add_threads_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("SAOLA_THREADS", "1")),
                   help="worker threads for independent runs (results unchanged)")


def _load(args: argparse.Namespace) -> Dataset:
    return load_svmlight(args.data, args.kind, n_features=args.num_features)


def _config(args: argparse.Namespace) -> SaolaConfig:
    backend = SU_DISCRETE if args.kind == "discrete" else FISHER_Z
    measure = MeasureConfig(backend, delta=args.delta, alpha=args.alpha)
    return SaolaConfig(
        measure,
        bound_mode=args.bound,
        tie_break=args.tie.replace("-", "_"),
        top_k=args.top_k,
    )


def _order(args: argparse.Namespace) -> OrderSpec:
    if args.order == "shuffle":
        return OrderSpec.shuffled(args.seed)
    return OrderSpec()


# ---------------------------------------------------------------------------
# subcommands

def cmd_select(args: argparse.Namespace) -> int:
    dataset = _load(args)
    cfg = _config(args)
    started = time.perf_counter()
    result = select_features(dataset, cfg, _order(args))
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    manifest = _manifest("select", args, _file_fingerprint(args.data), [args.seed])
    _write_json(args.out, manifest, result.to_dict(), elapsed_ms)
    print(f"selected {len(result.selected_indices)} features "
          f"({result.comparisons} comparisons)", file=sys.stderr)
    return EXIT_OK


def _grouping_from_args(args: argparse.Namespace, dataset: Dataset) -> Grouping:
    if args.group_file is not None:
        groups = []
        with open(args.group_file, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                try:
                    members = tuple(int(tok) for tok in stripped.split())
                except ValueError:
                    raise DataFormatError(
                        f"{args.group_file}: line {lineno}: bad feature index"
                    ) from None
                groups.append(members)
        return Grouping(tuple(groups))
    return random_partition(dataset.n_features, args.groups, args.seed)


def cmd_group_select(args: argparse.Namespace) -> int:
    dataset = _load(args)
    cfg = _config(args)
    grouping = _grouping_from_args(args, dataset)
    started = time.perf_counter()
    result = select_groups(dataset, grouping, cfg, _order(args))
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    paths = [args.data] + ([args.group_file] if args.group_file else [])
    manifest = _manifest("group-select", args, _file_fingerprint(*paths), [args.seed])
    _write_json(args.out, manifest, result.to_dict(), elapsed_ms)
    print(f"retained {len(result.selected_indices)} features in "
          f"{len(result.groups)} groups", file=sys.stderr)
    return EXIT_OK


def cmd_stability(args: argparse.Namespace) -> int:
    dataset = _load(args)
    cfg = _config(args)
    result = run_stability(
        dataset,
        cfg,
        folds=args.folds,
        repeats=args.repeats,
        seed=args.seed,
        threads=args.threads,
        weight_bins=args.bins,
    )
    manifest = _manifest("stability", args, _file_fingerprint(args.data), [args.seed])
    rows: list[list] = []
    for pair in result.pairs:
        rows.append([result.runs[pair.run_a].repeat, pair.run_a, pair.run_b,
                     f"{pair.similarity:.6f}"])
    rows.append(["mean", None, None, f"{result.mean_similarity:.6f}"])
    _write_csv(args.out, manifest, ["repeat", "run_a", "run_b", "similarity"], rows)
    print(f"mean stability {result.mean_similarity:.4f} over "
          f"{len(result.pairs)} run pairs", file=sys.stderr)
    return EXIT_OK


def cmd_trials(args: argparse.Namespace) -> int:
    train = _load(args)
    n_features = max(train.n_features, args.num_features or 0)
    test = load_svmlight(args.test, args.kind, n_features=n_features)
    if test.n_features > train.n_features:
        train = load_svmlight(args.data, args.kind, n_features=test.n_features)
    test = align_label_codes(train, test)
    cfg = _config(args)
    report = order_trials(train, test, cfg, n_trials=args.n, seed=args.seed,
                          k=args.k, threads=args.threads)
    manifest = _manifest("trials", args, _file_fingerprint(args.data, args.test),
                         [args.seed])
    rows: list[list] = []
    for t, outcome in enumerate(report.trials):
        rows.append([t, outcome.order_seed, len(outcome.selected),
                     f"{outcome.accuracy:.6f}"])
    rows.append(["mean", None, f"{report.mean_size:.2f}", f"{report.mean_accuracy:.6f}"])
    rows.append(["std", None, None, f"{report.std_accuracy:.6f}"])
    _write_csv(args.out, manifest,
               ["trial", "order_seed", "selected_size", "accuracy"], rows)
    print(f"accuracy {report.mean_accuracy:.4f} +/- {report.std_accuracy:.4f} "
          f"(mean size {report.mean_size:.1f})", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    backends = (
        list(_kernels.available_backends())
        if args.compare_backends
        else [_kernels.current_backend()]
    )
    p_values = [int(tok) for tok in args.p_list.split(",") if tok]
    measure = MeasureConfig(SU_DISCRETE, delta=args.delta, alpha=args.alpha)
    cfg = SaolaConfig(measure)
    rows: list[list] = []
    for p in p_values:
        dataset = make_pinned_stream(p, n_pinned=args.pinned,
                                     n_instances=args.n_instances, seed=args.seed)
        for backend in backends:
            with _kernels.use_backend(backend):
                started = time.perf_counter()
                result = select_features(dataset, cfg)
                elapsed_ms = (time.perf_counter() - started) * 1000.0
            bound = p * (1 + 2 * args.pinned)
            rows.append([backend, p, args.pinned, args.n_instances,
                         result.comparisons, bound, f"{elapsed_ms:.3f}"])
    fingerprint = (f"synthetic:pinned:p={args.p_list},s={args.pinned},"
                   f"n={args.n_instances},seed={args.seed}")
    manifest = _manifest("bench", args, fingerprint, [args.seed])
    _write_csv(args.out, manifest,
               ["backend", "p", "pinned", "n_instances", "comparisons",
                "bound", "elapsed_ms"], rows)
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    dataset = _load(args)
    hist = ",".join(f"{k}:{v}" for k, v in sorted(dataset.label_histogram().items()))
    print(f"N={dataset.n_instances} P={dataset.n_features} labels={{{hist}}}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saola",
        description="Online streaming feature selection over svmlight data.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("select", help="select features from a feature stream")
    _add_data_flags(p)
    _add_measure_flags(p)
    _add_order_flags(p)
    _add_threads_flag(p)
    p.add_argument("--out", default=None, help="write JSON result here")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("group-select", help="select feature groups from a group stream")
    _add_data_flags(p)
    _add_measure_flags(p)
    _add_order_flags(p)
    _add_threads_flag(p)
    mx = p.add_mutually_exclusive_group(required=True)
    mx.add_argument("--groups", type=int, help="random partition into this many groups")
    mx.add_argument("--group-file", default=None,
                    help="file with one group of 1-based feature indices per line")
    p.add_argument("--out", default=None, help="write JSON result here")
    p.set_defaults(func=cmd_group_select)

    p = sub.add_parser("stability", help="subsample stability of the selection")
    _add_data_flags(p)
    _add_measure_flags(p)
    _add_threads_flag(p)
    p.add_argument("--repeats", type=int, default=30)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=10,
                   help="bins for SU weights on continuous data")
    p.add_argument("--out", default=None, help="write CSV result here")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("trials", help="randomized feature-order trials with 1-NN scoring")
    _add_data_flags(p)
    p.add_argument("--test", required=True, help="svmlight test file")
    _add_measure_flags(p)
    _add_threads_flag(p)
    p.add_argument("--n", type=int, default=30, help="number of trials")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=1, help="neighbors for the classifier")
    p.add_argument("--out", default=None, help="write CSV result here")
    p.set_defaults(func=cmd_trials)

    p = sub.add_parser("bench", help="scaling benchmark on pinned synthetic streams")
    p.add_argument("--p-list", default="1000,10000,100000",
                   help="comma-separated stream lengths")
    p.add_argument("--pinned", type=int, default=8,
                   help="size the selected set is pinned at")
    p.add_argument("--n-instances", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--compare-backends", action="store_true",
                   help="run the workload under every available kernel backend")
    p.add_argument("--out", default=None, help="write CSV result here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inspect", help="print dataset dimensions and label histogram")
    _add_data_flags(p)
    p.set_defaults(func=cmd_inspect)

    return parser


def _suggest(parser: argparse.ArgumentParser, unknown: list[str]) -> str:
    options: list[str] = []
    for action in parser._actions:  # includes subparser choices
        options.extend(action.option_strings)
        if isinstance(action, argparse._SubParsersAction):
            for name, sp in action.choices.items():
                options.append(name)
                for sub_action in sp._actions:
                    options.extend(sub_action.option_strings)
    matches = difflib.get_close_matches(unknown[0], sorted(set(options)), n=1)
    hint = f" (did you mean {matches[0]!r}?)" if matches else ""
    return f"unknown argument {unknown[0]!r}{hint}"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, unknown = parser.parse_known_args(argv)
    except SystemExit as exc:  # argparse handled --help or a usage error
        code = exc.code if exc.code is not None else 0
        return int(code)
    if unknown:
        print(f"saola: error: {_suggest(parser, unknown)}", file=sys.stderr)
        return EXIT_USAGE
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (DataFormatError, ValueError, ArithmeticError, OSError) as exc:
        print(f"saola: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
