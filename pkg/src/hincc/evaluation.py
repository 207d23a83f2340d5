"""Repeated stratified cross-validation harness and report serialization.

Box statistics use the median-of-halves convention: the lower (upper)
quartile is the median of the values strictly below (above) the median
position; for an odd count the middle value belongs to neither half.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .baselines import (KINDS, MethodSpec, fit_method, predict_method,
                        resolve_paths)
from .data import DatasetBundle
from .hcc import MAX_IT
from .learner import LogisticRegression
from .metapath import (CombinedPaths, MetaPath, NetworkView, format_meta_path,
                       parse_meta_path, select_meta_paths)

FOLD_STREAM = 1


@dataclass(frozen=True)
class FoldPlan:
    repeats: int
    k: int
    seed: int
    assignments: tuple[np.ndarray, ...]   # per repeat: fold index per instance

    def folds(self, repeat: int):
        a = self.assignments[repeat]
        for f in range(self.k):
            yield f, np.flatnonzero(a == f), np.flatnonzero(a != f)


def make_folds(labels, k: int, repeats: int = 1, seed: int = 0) -> FoldPlan:
    """Stratified k-fold assignments, one independent shuffle per repeat."""
    labels = np.asarray(labels, dtype=np.int64)
    if k < 1 or repeats < 1:
        raise ValueError("k and repeats must be >= 1")
    classes, counts = np.unique(labels, return_counts=True)
    small = classes[counts < k]
    if len(small):
        raise ValueError(f"class {int(small[0])} has fewer than k={k} members")
    plans = []
    for r in range(repeats):
        rng = np.random.default_rng(np.random.SeedSequence([seed, FOLD_STREAM, r]))
        a = np.empty(len(labels), dtype=np.int64)
        offset = 0
        for c in classes:
            members = rng.permutation(np.flatnonzero(labels == c))
            a[members] = (offset + np.arange(len(members))) % k
            offset = (offset + len(members)) % k
        plans.append(a)
    return FoldPlan(repeats, k, seed, tuple(plans))


def accuracy(pred: Mapping[int, int], truth: Mapping[int, int]) -> float:
    """Fraction of ``truth`` entries predicted exactly."""
    if not truth:
        raise ValueError("no ground truth to score against")
    hits = 0
    for node, label in truth.items():
        if node not in pred:
            raise ValueError(f"missing prediction for instance {node}")
        hits += int(pred[node] == label)
    return hits / len(truth)


@dataclass(frozen=True)
class BoxStats:
    min: float
    q1: float
    median: float
    q3: float
    max: float


def _median(v: np.ndarray) -> float:
    n = len(v)
    mid = n // 2
    return float(v[mid]) if n % 2 else float((v[mid - 1] + v[mid]) / 2)


def box_stats(values: Sequence[float]) -> BoxStats:
    v = np.sort(np.asarray(values, dtype=float))
    if not len(v):
        raise ValueError("box statistics of an empty list")
    n = len(v)
    lower, upper = v[:n // 2], v[(n + 1) // 2:]
    q1 = _median(lower) if len(lower) else float(v[0])
    q3 = _median(upper) if len(upper) else float(v[-1])
    return BoxStats(float(v[0]), q1, _median(v), q3, float(v[-1]))


@dataclass
class ExperimentConfig:
    methods: tuple[MethodSpec, ...]
    dataset: str | None = None
    synthetic: object | None = None          # SyntheticParams
    target: str | None = None
    lmax: int = 4
    paths: tuple | None = None               # explicit override of selection
    k: int = 3
    repeats: int = 10
    seed: int = 0
    learner: LogisticRegression = field(default_factory=LogisticRegression)
    max_it: int = MAX_IT
    ablation: bool = False

    def __post_init__(self):
        if self.k < 1 or self.repeats < 1:
            raise ValueError("k and repeats must be >= 1")
        if self.lmax < 1:
            raise ValueError("lmax must be >= 1")
        if self.max_it < 0:
            raise ValueError("max_it must be >= 0")
        names = [m.label for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError("method names must be unique")


@dataclass
class FoldResult:
    repeat: int
    fold: int
    method: str
    paths: int
    accuracy: float
    iterations: int
    converged: bool
    train_seconds: float
    test_seconds: float


@dataclass
class MethodSummary:
    method: str
    kind: str
    paths: int
    accuracies: list[float]
    box: BoxStats
    mean_accuracy: float
    mean_train_seconds: float
    mean_test_seconds: float


@dataclass
class ExperimentReport:
    k: int
    repeats: int
    seed: int
    target: str
    selected_paths: tuple[str, ...]
    method_paths: dict[str, tuple[str, ...]]
    kinds: dict[str, str]
    rows: list[FoldResult]
    counting_seconds: float = 0.0

    @property
    def methods(self) -> list[str]:
        return list(self.kinds)

    def accuracies(self, method: str) -> list[float]:
        return [r.accuracy for r in self.rows if r.method == method]

    def summary(self, method: str) -> MethodSummary:
        rows = [r for r in self.rows if r.method == method]
        if not rows:
            raise KeyError(method)
        acc = [r.accuracy for r in rows]
        return MethodSummary(
            method, self.kinds[method], rows[0].paths, acc, box_stats(acc),
            float(np.mean(acc)),
            float(np.mean([r.train_seconds for r in rows])),
            float(np.mean([r.test_seconds for r in rows])))


def _path_text(p) -> str:
    return str(p) if isinstance(p, CombinedPaths) else format_meta_path(p)


def expand_methods(config: ExperimentConfig, selected: Sequence[MetaPath]):
    methods = list(config.methods)
    if config.ablation:
        if not any(m.kind == "iid" for m in methods):
            methods.append(MethodSpec("iid"))
        for p in selected:
            methods.append(MethodSpec("hcc", name=f"single:{format_meta_path(p)}",
                                      paths=(p,), max_it=config.max_it))
    return methods


def load_config_dataset(config: ExperimentConfig) -> DatasetBundle:
    if config.synthetic is not None:
        from .synthetic import synthetic_bundle
        return synthetic_bundle(config.synthetic)
    if config.dataset is None:
        raise ValueError("experiment config names no dataset")
    from .fileio import load_dataset
    return load_dataset(config.dataset)


def run_experiment(config: ExperimentConfig,
                   bundle: DatasetBundle | None = None) -> ExperimentReport:
    """Cross-validate every configured method on the same fold plan.

    Path-instance counts do not depend on the fold (training only hides
    labels), so they are computed once up front and shared; per-fold times
    cover relational feature aggregation, training and inference.
    """
    bundle = bundle or load_config_dataset(config)
    network = bundle.network
    schema = network.schema()
    target = network.node_type(config.target) if config.target else bundle.target
    if config.paths is not None:
        selected = tuple(p if isinstance(p, MetaPath) else parse_meta_path(p, schema)
                         for p in config.paths)
    else:
        selected = select_meta_paths(schema, target, config.lmax).paths
    methods = expand_methods(config, selected)
    resolved = {m.label: resolve_paths(m, schema, target, selected, config.lmax)
                for m in methods}

    view = NetworkView(network)
    t0 = time.perf_counter()
    for paths in resolved.values():
        for p in paths:
            view.count_matrix(p)
    counting = time.perf_counter() - t0

    instances = bundle.labeled
    truth_all = bundle.labels
    plan = make_folds(truth_all[instances], config.k, config.repeats, config.seed)
    rows = []
    for r in range(config.repeats):
        for f, test_pos, train_pos in plan.folds(r):
            U = instances[test_pos]
            L = instances[train_pos] if config.k > 1 else U
            truth = {int(u): int(truth_all[u]) for u in U}
            for spec in methods:
                paths = resolved[spec.label]
                t_start = time.perf_counter()
                model = fit_method(spec, view, bundle.X, truth_all, L, bundle.space,
                                   paths, config.learner)
                t_mid = time.perf_counter()
                pred, state = predict_method(spec, model, view, bundle.X, truth_all,
                                             L, U, truth=truth_all)
                t_end = time.perf_counter()
                acc = accuracy(dict(zip(U.tolist(), pred.tolist())), truth)
                rows.append(FoldResult(
                    r, f, spec.label, len(paths), acc,
                    state.iteration if state else 0,
                    state.converged if state else True,
                    t_mid - t_start, t_end - t_mid))
    return ExperimentReport(
        config.k, config.repeats, config.seed, target.name,
        tuple(format_meta_path(p) for p in selected),
        {m.label: tuple(_path_text(p) for p in resolved[m.label]) for m in methods},
        {m.label: m.kind for m in methods}, rows, counting)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def format_report(report: ExperimentReport) -> str:
    """Line-oriented text report; contains no wall-clock values."""
    out = io.StringIO()
    out.write("format-version 1\n")
    out.write(f"target {report.target}\n")
    out.write(f"cross-validation {report.repeats}x{report.k} seed {report.seed}\n")
    out.write(f"selected-paths {len(report.selected_paths)}\n")
    for p in report.selected_paths:
        out.write(f"  {p}\n")
    out.write("methods\n")
    header = ("method", "kind", "paths", "mean", "min", "q1", "median", "q3", "max")
    out.write("  " + "\t".join(header) + "\n")
    for m in report.methods:
        s = report.summary(m)
        b = s.box
        vals = [s.method, s.kind, str(s.paths)] + [
            _fmt(v) for v in (s.mean_accuracy, b.min, b.q1, b.median, b.q3, b.max)]
        out.write("  " + "\t".join(vals) + "\n")
    for m in report.methods:
        paths = report.method_paths[m]
        if paths:
            out.write(f"paths {m}\n")
            for p in paths:
                out.write(f"  {p}\n")
    return out.getvalue()


def write_results_table(report: ExperimentReport, fh) -> None:
    """One row per repeat x fold x method."""
    w = csv.writer(fh, delimiter="\t", lineterminator="\n")
    w.writerow(["repeat", "fold", "method", "paths", "accuracy", "iterations", "converged"])
    for r in report.rows:
        w.writerow([r.repeat, r.fold, r.method, r.paths, repr(r.accuracy),
                    r.iterations, int(r.converged)])


def write_boxplot_csv(report: ExperimentReport, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["method", "min", "q1", "median", "q3", "max", "mean", "n"])
    for m in report.methods:
        s = report.summary(m)
        b = s.box
        w.writerow([m] + [repr(v) for v in (b.min, b.q1, b.median, b.q3, b.max,
                                             s.mean_accuracy)] + [len(s.accuracies)])


def write_timing(report: ExperimentReport, fh) -> None:
    """Wall-clock summary (not reproducible; kept out of the main report)."""
    w = csv.writer(fh, delimiter="\t", lineterminator="\n")
    w.writerow(["method", "paths", "mean_train_seconds", "mean_test_seconds"])
    for m in report.methods:
        s = report.summary(m)
        w.writerow([m, s.paths, f"{s.mean_train_seconds:.6f}", f"{s.mean_test_seconds:.6f}"])
    w.writerow(["path-counting", "", f"{report.counting_seconds:.6f}", ""])


__all__ = [
    "BoxStats", "ExperimentConfig", "ExperimentReport", "FoldPlan", "FoldResult",
    "KINDS", "accuracy", "box_stats", "format_report", "make_folds", "run_experiment",
    "write_boxplot_csv", "write_results_table", "write_timing",
]
