"""Command-line entry point.

Exit status: 0 on success, 1 on a usage error, 2 on a data error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .baselines import KINDS, MethodError, MethodSpec, fit_method, predict_method, resolve_paths
from .evaluation import (format_report, run_experiment, write_boxplot_csv,
                         write_results_table, write_timing)
from .fileio import (FormatError, load_dataset, read_experiment_config,
                     read_schema, read_synthetic_params, save_dataset, write_labels)
from .graph import NetworkError, build_network
from .hcc import MAX_IT
from .learner import DegenerateDataError, LogisticRegression, save_model
from .metapath import (NetworkView, all_meta_paths, format_meta_path,
                       parse_meta_path, select_meta_paths)
from .synthetic import synthetic_bundle

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _non_negative(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hincc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("paths", help="print the meta paths selected for a schema")
    s.add_argument("--schema", required=True)
    s.add_argument("--target", help="target node type (default: schema's target)")
    s.add_argument("--lmax", type=_positive, default=4)
    s.add_argument("--all", action="store_true", help="every candidate, no pruning")

    s = sub.add_parser("gen", help="write a synthetic dataset bundle")
    s.add_argument("--params", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=_non_negative)

    s = sub.add_parser("run", help="run a cross-validation experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=_non_negative)
    s.add_argument("--out", default="report")
    s.add_argument("--quiet", action="store_true")

    s = sub.add_parser("predict", help="train on labeled nodes, label the rest")
    s.add_argument("--dataset", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--method", choices=[k for k in KINDS if k != "hcc_ceiling"],
                   default="hcc")
    s.add_argument("--lmax", type=_positive)
    s.add_argument("--path", action="append", help="explicit meta path (repeatable)")
    s.add_argument("--max-it", type=_non_negative, default=MAX_IT)
    s.add_argument("--lam", type=float, default=1e-3)
    s.add_argument("--save-model", help="also write the local linear model")
    return p


def cmd_paths(args) -> int:
    schema_file = read_schema(args.schema)
    target = args.target or schema_file.target
    if target is None:
        raise UsageError("paths: no --target and the schema names none")
    schema = build_network(schema_file.node_types, schema_file.relations, (), ()).schema()
    if target not in schema_file.node_types:
        raise UsageError(f"paths: unknown target type {target!r}")
    chosen = (all_meta_paths if args.all else select_meta_paths)(schema, target, args.lmax)
    for path in chosen:
        print(format_meta_path(path))
    return 0


def cmd_gen(args) -> int:
    params = read_synthetic_params(args.params)
    if args.seed is not None:
        params = replace(params, seed=args.seed)
    save_dataset(synthetic_bundle(params), args.out)
    return 0


def cmd_run(args) -> int:
    config = read_experiment_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    report = run_experiment(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    text = format_report(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    with open(out / "results.tsv", "w", encoding="utf-8", newline="") as fh:
        write_results_table(report, fh)
    with open(out / "boxplot.csv", "w", encoding="utf-8", newline="") as fh:
        write_boxplot_csv(report, fh)
    with open(out / "timing.tsv", "w", encoding="utf-8", newline="") as fh:
        write_timing(report, fh)
    if not args.quiet:
        sys.stdout.write(text)
    return 0


def cmd_predict(args) -> int:
    bundle = load_dataset(args.dataset)
    schema = bundle.network.schema()
    paths = tuple(parse_meta_path(p, schema) for p in args.path) if args.path else None
    try:
        spec = MethodSpec(args.method, paths=paths, lmax=args.lmax, max_it=args.max_it)
    except MethodError as exc:
        raise UsageError(f"predict: {exc}") from None
    selected = select_meta_paths(schema, bundle.target, args.lmax or 4).paths
    resolved = resolve_paths(spec, schema, bundle.target, selected)
    L, U = bundle.labeled, bundle.unlabeled
    view = NetworkView(bundle.network)
    learner = LogisticRegression(lam=args.lam)
    model = fit_method(spec, view, bundle.X, bundle.labels, L, bundle.space,
                       resolved, learner)
    pred, _ = predict_method(spec, model, view, bundle.X, bundle.labels, L, U)
    labels = bundle.labels.copy()
    labels[:] = -1
    labels[U] = pred
    write_labels(args.out, bundle.network.external_ids(bundle.target), labels,
                 bundle.space, nodes=U)
    if args.save_model:
        local = getattr(model, "local", model)
        if hasattr(local, "weights"):
            with open(args.save_model, "w", encoding="utf-8") as fh:
                save_model(local, fh)
    return 0


COMMANDS = {"paths": cmd_paths, "gen": cmd_gen, "run": cmd_run, "predict": cmd_predict}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, NetworkError, DegenerateDataError, MethodError,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
