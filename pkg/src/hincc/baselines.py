"""Comparison methods built on the same local learner and inference loop.

``iid``          attributes only, every instance on its own
``ica``          collective inference over one homogeneous meta path
``cp``           all meta paths merged into one relation (counts summed)
``cf``           one collective model per meta path, fused every round
``hcc``          one block of relational features per selected meta path
``hcc_ceiling``  hcc reading the true labels of related test instances
``hcc_all``      hcc over every meta path up to length 5, no pruning
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import SchemaGraph
from .hcc import (MAX_IT, HccModel, InferenceState, as_view, hcc_train,
                  known_labels, run_inference)
from .learner import LinearModel, LogisticRegression
from .metapath import (CombinedPaths, MetaPath, all_meta_paths,
                       enumerate_candidates, parse_meta_path, select_meta_paths)
from .relfeat import LabelSpace

KINDS = ("iid", "ica", "cp", "cf", "hcc", "hcc_ceiling", "hcc_all")
HCC_LMAX = 4
HCC_ALL_LMAX = 5


class MethodError(ValueError):
    pass


@dataclass(frozen=True)
class MethodSpec:
    kind: str
    name: str | None = None
    paths: tuple | None = None      # explicit override: MetaPath or text
    lmax: int | None = None
    vote: str = "average"
    strict: bool = False
    max_it: int = MAX_IT

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MethodError(f"unknown method kind {self.kind!r}")
        if self.vote not in ("average", "hard"):
            raise MethodError(f"unknown vote mode {self.vote!r}")
        if self.paths is not None:
            object.__setattr__(self, "paths", tuple(self.paths))
            n = len(self.paths)
            if self.kind == "ica" and n != 1:
                raise MethodError("ica needs exactly one meta path")
            if self.kind in ("cp", "cf") and n < 1:
                raise MethodError(f"{self.kind} needs at least one meta path")
            if self.kind == "iid" and n:
                raise MethodError("iid takes no meta paths")
        if self.lmax is not None and self.lmax < 1:
            raise MethodError("lmax must be >= 1")
        if self.max_it < 0:
            raise MethodError("max_it must be >= 0")

    @property
    def label(self) -> str:
        return self.name or self.kind


class Ensemble:
    """Collective fusion: members' class distributions are combined per round."""

    def __init__(self, members: Sequence[HccModel], vote: str = "average",
                 max_it: int = MAX_IT):
        self.members = list(members)
        self.vote = vote
        self.max_it = max_it

    @property
    def paths(self) -> tuple:
        return tuple(p for m in self.members for p in m.paths)

    def predict_proba(self, view, X, labels, nodes) -> np.ndarray:
        probs = [m.predict_proba(view, X, labels, nodes) for m in self.members]
        if self.vote == "hard":
            q = probs[0].shape[1]
            probs = [np.eye(q)[np.argmax(p, axis=1)] for p in probs]
        total = probs[0]
        for p in probs[1:]:
            total = total + p
        return total / len(probs)


def resolve_paths(spec: MethodSpec, schema: SchemaGraph, target,
                  default_paths: Sequence[MetaPath] | None = None,
                  lmax: int | None = None) -> tuple[MetaPath, ...]:
    """Meta paths a method will use, from its override or from selection."""
    if spec.kind == "iid":
        return ()
    if spec.paths is not None:
        return tuple(p if isinstance(p, MetaPath) else parse_meta_path(p, schema)
                     for p in spec.paths)
    if spec.kind == "hcc_all":
        return all_meta_paths(schema, target, spec.lmax or HCC_ALL_LMAX).paths
    if spec.kind == "ica":
        first = enumerate_candidates(schema, target, 1)
        if not first:
            raise MethodError("ica needs a direct link between target nodes")
        return (first[0],)
    if spec.lmax is not None or default_paths is None:
        return select_meta_paths(schema, target, spec.lmax or lmax or HCC_LMAX).paths
    return tuple(default_paths)


def fit_method(spec: MethodSpec, network, X, labels, L, space: LabelSpace,
               paths: Sequence[MetaPath], learner=None):
    """Training half of a method; returns a model for :func:`predict_method`."""
    learner = learner or LogisticRegression()
    paths = tuple(paths)
    if spec.kind == "iid":
        return iid_fit(X, labels, L, space, learner)
    if spec.kind == "cf":
        members = [hcc_train(network, X, labels, L, (p,), space, learner,
                             spec.max_it, spec.strict) for p in paths]
        return Ensemble(members, spec.vote, spec.max_it)
    if spec.kind == "cp":
        paths = (CombinedPaths(paths),)
    return hcc_train(network, X, labels, L, paths, space, learner, spec.max_it,
                     spec.strict)


def predict_method(spec: MethodSpec, model, network, X, labels, L, U,
                   truth=None) -> tuple[np.ndarray, InferenceState | None]:
    """Inference half of a method; returns estimates aligned with ``U``."""
    U = np.asarray(U, dtype=np.int64)
    if spec.kind == "iid":
        return iid_predict(model, X, U), None
    y_known = known_labels(labels, L)
    if spec.kind == "hcc_ceiling":
        if truth is None:
            raise MethodError("hcc_ceiling needs the true labels of U")
        return ceiling_predict(model, network, X, y_known, truth, U), None
    state = run_inference(model, as_view(network), X, y_known, U, spec.max_it)
    return state.estimates, state


def iid_fit(X, labels, L, space: LabelSpace, learner=None) -> LinearModel:
    learner = learner or LogisticRegression()
    L = np.asarray(L, dtype=np.int64)
    X = np.asarray(X, dtype=float)
    return learner.fit(X[L], np.asarray(labels)[L], space.q, space.classes)


def iid_predict(model: LinearModel, X, U) -> np.ndarray:
    U = np.asarray(U, dtype=np.int64)
    if not len(U):
        return np.zeros(0, dtype=np.int64)
    return model.predict_label(np.asarray(X, dtype=float)[U]).astype(np.int64)


def ceiling_predict(model, network, X, y_known, truth, U) -> np.ndarray:
    """One pass with the true labels of every related test instance."""
    U = np.asarray(U, dtype=np.int64)
    labels = np.asarray(y_known, dtype=np.int64).copy()
    labels[U] = np.asarray(truth)[U]
    probs = model.predict_proba(as_view(network), X, labels, U)
    return np.argmax(probs, axis=1).astype(np.int64)


def iid_run(X, labels, L, U, space: LabelSpace, learner=None) -> np.ndarray:
    return iid_predict(iid_fit(X, labels, L, space, learner), X, U)


def _collective_run(spec, network, X, labels, L, U, paths, space, learner, truth=None):
    model = fit_method(spec, network, X, labels, L, space, paths, learner)
    return predict_method(spec, model, network, X, labels, L, U, truth)[0]


def hcc_run(network, X, labels, L, U, paths, space: LabelSpace, learner=None,
            max_it: int = MAX_IT, strict: bool = False) -> np.ndarray:
    spec = MethodSpec("hcc", paths=tuple(paths), max_it=max_it, strict=strict)
    return _collective_run(spec, network, X, labels, L, U, paths, space, learner)


def ica_run(network, X, labels, L, U, path: MetaPath, space: LabelSpace,
            learner=None, max_it: int = MAX_IT) -> np.ndarray:
    spec = MethodSpec("ica", paths=(path,), max_it=max_it)
    return _collective_run(spec, network, X, labels, L, U, (path,), space, learner)


def cp_run(network, X, labels, L, U, paths, space: LabelSpace, learner=None,
           max_it: int = MAX_IT) -> np.ndarray:
    spec = MethodSpec("cp", paths=tuple(paths), max_it=max_it)
    return _collective_run(spec, network, X, labels, L, U, paths, space, learner)


def cf_run(network, X, labels, L, U, paths, space: LabelSpace, learner=None,
           max_it: int = MAX_IT, vote: str = "average") -> np.ndarray:
    if len(paths) < 2:
        raise MethodError("cf needs at least two meta paths")
    spec = MethodSpec("cf", paths=tuple(paths), max_it=max_it, vote=vote)
    return _collective_run(spec, network, X, labels, L, U, paths, space, learner)


def hcc_ceiling_run(network, X, labels, truth, L, U, paths, space: LabelSpace,
                    learner=None) -> np.ndarray:
    spec = MethodSpec("hcc_ceiling", paths=tuple(paths))
    return _collective_run(spec, network, X, labels, L, U, paths, space, learner, truth)


def hcc_all_paths(schema: SchemaGraph, target, lmax: int = HCC_ALL_LMAX):
    return all_meta_paths(schema, target, lmax).paths


__all__ = [
    "Ensemble", "KINDS", "MethodError", "MethodSpec", "cf_run", "cp_run",
    "fit_method", "hcc_all_paths", "hcc_ceiling_run", "hcc_run", "ica_run",
    "iid_run", "predict_method", "resolve_paths",
]
