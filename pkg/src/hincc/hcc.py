"""Meta-path based collective classification.

Training extends every labeled instance with relational features computed
from the known labels only.  Inference bootstraps the unlabeled instances
from their attributes (relational block set to zero), then repeatedly
rebuilds all relational features from the previous round's estimates and
re-predicts, until no estimate changes or ``max_it`` rounds have run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .learner import LinearModel, LogisticRegression
from .metapath import CombinedPaths, NetworkView
from .relfeat import UNLABELED, Aggregator, LabelSpace, relational_features

MAX_IT = 10


def as_view(network) -> NetworkView:
    return network if isinstance(network, NetworkView) else NetworkView(network)


def _start_type(path):
    return path.paths[0].start if isinstance(path, CombinedPaths) else path.start


def known_labels(labels, L) -> np.ndarray:
    """Copy of ``labels`` with everything outside ``L`` marked unlabeled."""
    labels = np.asarray(labels, dtype=np.int64)
    out = np.full(len(labels), UNLABELED, dtype=np.int64)
    L = np.asarray(L, dtype=np.int64)
    out[L] = labels[L]
    return out


@dataclass
class HccModel:
    local: LinearModel
    paths: tuple
    space: LabelSpace
    dim: int
    max_it: int = MAX_IT
    aggregator: Aggregator | None = None

    @property
    def rel_dim(self) -> int:
        return len(self.paths) * self.space.q

    def extended(self, view, X, labels, nodes) -> np.ndarray:
        """Extended instances ``(x, relational features)``; ``labels=None`` gives zeros."""
        nodes = np.asarray(nodes, dtype=np.int64)
        x = np.asarray(X, dtype=float)[nodes]
        if labels is None or not self.paths:
            rel = np.zeros((len(nodes), self.rel_dim))
        else:
            rel = relational_features(as_view(view), self.paths, labels, nodes, self.space,
                                      self.aggregator)
        return np.hstack([x, rel])

    def predict_proba(self, view, X, labels, nodes) -> np.ndarray:
        if len(nodes) == 0:
            return np.zeros((0, self.space.q))
        return self.local.predict_proba(self.extended(view, X, labels, nodes))


@dataclass
class InferenceState:
    nodes: np.ndarray
    estimates: np.ndarray
    iteration: int = 0
    changes: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    previous: np.ndarray | None = field(default=None, repr=False)
    cycle_detected: bool = False

    @property
    def converged(self) -> bool:
        return bool(self.changes) and self.changes[-1] == 0.0


def hcc_train(network, X, labels, L, paths: Sequence, space: LabelSpace,
              learner=None, max_it: int = MAX_IT, strict: bool = False,
              aggregator: Aggregator | None = None) -> HccModel:
    """Train the local model on extended instances of the labeled set ``L``.

    Neighborhoods use the whole edge set, but only labels of ``L`` are read.
    With ``strict=True`` every unlabeled target node is removed from the
    network first, so no path may pass through a test instance.
    """
    learner = learner or LogisticRegression()
    paths = tuple(paths)
    view = as_view(network)
    L = np.asarray(L, dtype=np.int64)
    y_known = known_labels(labels, L)
    if strict and paths:
        target = _start_type(paths[0])
        hidden = np.flatnonzero(y_known == UNLABELED)
        view = NetworkView(view.network, {target.index: hidden})
    X = np.asarray(X, dtype=float)
    model = HccModel(None, paths, space, X.shape[1], max_it, aggregator)
    feats = model.extended(view, X, y_known, L)
    model.local = learner.fit(feats, y_known[L], space.q, space.classes)
    return model


def bootstrap(model, X, U) -> InferenceState:
    """Initial estimates from attributes only (zero relational block)."""
    U = np.asarray(U, dtype=np.int64)
    probs = model.predict_proba(None, X, None, U)
    return InferenceState(U, np.argmax(probs, axis=1).astype(np.int64))


def current_labels(y_known, state: InferenceState) -> np.ndarray:
    labels = np.asarray(y_known, dtype=np.int64).copy()
    free = labels[state.nodes] == UNLABELED
    labels[state.nodes[free]] = state.estimates[free]
    return labels


def iterate_once(model, network, X, y_known, state: InferenceState) -> InferenceState:
    """One synchronous round: every estimate reads only the previous round."""
    start = time.perf_counter()
    labels = current_labels(y_known, state)
    U = state.nodes
    if len(U):
        new = np.argmax(model.predict_proba(as_view(network), X, labels, U),
                        axis=1).astype(np.int64)
        change = float(np.mean(new != state.estimates))
    else:
        new = state.estimates
        change = 0.0
    cycle = state.cycle_detected or (
        state.previous is not None and change > 0
        and np.array_equal(new, state.previous))
    return replace(state, estimates=new, iteration=state.iteration + 1,
                   changes=state.changes + [change],
                   seconds=state.seconds + [time.perf_counter() - start],
                   previous=state.estimates, cycle_detected=cycle)


def run_inference(model, network, X, y_known, U, max_it: int | None = None,
                  eps: float = 0.0) -> InferenceState:
    """Bootstrap then iterate until the change fraction is ``<= eps``."""
    max_it = model.max_it if max_it is None else max_it
    view = as_view(network)
    state = bootstrap(model, X, U)
    while state.iteration < max_it:
        state = iterate_once(model, view, X, y_known, state)
        if state.changes[-1] <= eps:
            break
    return state


def infer(model, network, X, y_known, U, max_it: int | None = None,
          eps: float = 0.0) -> np.ndarray:
    """Final label estimates for ``U`` (aligned with ``U``)."""
    return run_inference(model, network, X, y_known, U, max_it, eps).estimates
