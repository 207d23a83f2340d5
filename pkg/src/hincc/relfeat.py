"""Relational features built from the labels of meta-path related instances.

For every meta path the related instances' labels are aggregated into a
q-dimensional block; the blocks are concatenated in path order and appended
to the instance's own attributes.  Labels are integer class indices with
``UNLABELED`` (-1) marking unknown values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .graph import NodeId
from .metapath import NetworkView, PathNeighborhood, path_neighborhood

UNLABELED = -1


@dataclass(frozen=True)
class LabelSpace:
    classes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if len(self.classes) < 2:
            raise ValueError("a label space needs at least two classes")
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("class names must be unique")

    @property
    def q(self) -> int:
        return len(self.classes)

    def index(self, name: str) -> int:
        try:
            return self.classes.index(name)
        except ValueError:
            raise ValueError(f"unknown class {name!r}") from None

    @classmethod
    def of_size(cls, q: int) -> "LabelSpace":
        return cls(tuple(f"c{i}" for i in range(q)))


def _label_lookup(labels) -> Callable[[int], int]:
    if isinstance(labels, Mapping):
        return lambda t: labels.get(t, UNLABELED)
    return lambda t: int(labels[t])


def _weights(neigh) -> Mapping[int, float]:
    return neigh.weights if isinstance(neigh, PathNeighborhood) else neigh


def weighted_label_fraction(neigh, labels, space: LabelSpace) -> np.ndarray:
    """Label histogram of related instances weighted by path-instance counts.

    Unlabeled related instances are ignored entirely; when no related
    instance is labeled the result is the zero vector.
    """
    label_of = _label_lookup(labels)
    out = np.zeros(space.q)
    for t, w in _weights(neigh).items():
        c = label_of(t)
        if c != UNLABELED:
            out[c] += w
    total = out.sum()
    return out / total if total > 0 else out


def count_aggregator(neigh, labels, space: LabelSpace) -> np.ndarray:
    """Unweighted number of related instances carrying each label."""
    label_of = _label_lookup(labels)
    out = np.zeros(space.q)
    for t in _weights(neigh):
        c = label_of(t)
        if c != UNLABELED:
            out[c] += 1
    return out


def mode_aggregator(neigh, labels, space: LabelSpace) -> np.ndarray:
    """One-hot of the most frequent (path-weighted) label; ties go low."""
    hist = weighted_label_fraction(neigh, labels, space)
    out = np.zeros(space.q)
    if hist.any():
        out[int(np.argmax(hist))] = 1.0
    return out


Aggregator = Callable[[object, object, LabelSpace], np.ndarray]


def path_rel_feature(node: NodeId, network, labels, paths: Sequence,
                     space: LabelSpace,
                     aggregator: Aggregator = weighted_label_fraction) -> np.ndarray:
    """Relational feature vector of a single node, one q-block per path."""
    blocks = [aggregator(path_neighborhood(network, p, node), labels, space)
              for p in paths]
    if not blocks:
        return np.zeros(0)
    return np.concatenate(blocks)


def extend_instance(x, xr) -> np.ndarray:
    """Attributes first, then the relational blocks."""
    return np.concatenate([np.asarray(x, dtype=float), np.asarray(xr, dtype=float)])


def one_hot(labels: np.ndarray, q: int) -> np.ndarray:
    """Rows of the identity for known labels, zero rows for ``UNLABELED``."""
    labels = np.asarray(labels)
    out = np.zeros((len(labels), q))
    known = labels != UNLABELED
    out[np.flatnonzero(known), labels[known]] = 1.0
    return out


def fraction_block(counts: sp.spmatrix, label_matrix: np.ndarray) -> np.ndarray:
    """Bulk weighted label fraction: one row per row of ``counts``."""
    num = np.asarray(counts @ label_matrix)
    den = num.sum(axis=1)
    out = np.zeros_like(num)
    nz = den > 0
    out[nz] = num[nz] / den[nz, None]
    return out


def relational_features(view: NetworkView, paths: Sequence, labels: np.ndarray,
                        nodes: np.ndarray, space: LabelSpace,
                        aggregator: Aggregator | None = None) -> np.ndarray:
    """Relational blocks for many target nodes at once.

    ``labels`` is the full label array of the target type.  With the default
    aggregator the computation is a sparse product per path; a custom
    aggregator falls back to the per-node route.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    if not len(paths) or not len(nodes):
        return np.zeros((len(nodes), len(paths) * space.q))
    if aggregator is None or aggregator is weighted_label_fraction:
        y = one_hot(labels, space.q)
        return np.hstack([fraction_block(view.count_matrix(p)[nodes], y) for p in paths])
    rows = []
    for v in nodes.tolist():
        blocks = []
        for p in paths:
            m = view.count_matrix(p)
            neigh = dict(zip(m.indices[m.indptr[v]:m.indptr[v + 1]].tolist(),
                             m.data[m.indptr[v]:m.indptr[v + 1]].tolist()))
            blocks.append(aggregator(neigh, labels, space))
        rows.append(np.concatenate(blocks))
    return np.vstack(rows)
