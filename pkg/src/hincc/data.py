"""In-memory dataset: network, target type, label space, attributes, labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import HeterogeneousNetwork, NodeType
from .relfeat import UNLABELED, LabelSpace


@dataclass
class DatasetBundle:
    network: HeterogeneousNetwork
    target: NodeType
    space: LabelSpace
    X: np.ndarray           # n_target x d
    labels: np.ndarray      # n_target, UNLABELED where unknown

    def __post_init__(self):
        n = self.network.num_nodes(self.target)
        self.X = np.asarray(self.X, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[0] != n:
            raise ValueError(f"attribute matrix must have {n} rows")
        if self.labels.shape != (n,):
            raise ValueError(f"label array must have {n} entries")
        bad = (self.labels != UNLABELED) & ((self.labels < 0) | (self.labels >= self.space.q))
        if bad.any():
            raise ValueError("label index out of range")

    @property
    def labeled(self) -> np.ndarray:
        return np.flatnonzero(self.labels != UNLABELED)

    @property
    def unlabeled(self) -> np.ndarray:
        return np.flatnonzero(self.labels == UNLABELED)
