"""Meta paths: enumeration, decomposability-pruned selection, instance counts.

Meta paths are written in a small textual syntax: node type names joined by
relation arrows, e.g. ``paper -authoredBy-> author <-authoredBy- paper``.
An inverted step may also be written ``-authoredBy^-1->``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .graph import (HeterogeneousNetwork, NetworkError, NodeId, NodeType,
                    RelationStep, SchemaGraph)

__all__ = [
    "CombinedPaths", "MetaPath", "MetaPathSet", "NetworkView", "PathNeighborhood",
    "RelationStep", "enumerate_candidates", "format_meta_path", "is_decomposable",
    "parse_meta_path", "path_count_matrix", "path_neighborhood", "select_meta_paths",
]


@dataclass(frozen=True)
class MetaPath:
    steps: tuple[RelationStep, ...]

    def __post_init__(self):
        if not self.steps:
            raise NetworkError("a meta path needs at least one step")
        object.__setattr__(self, "steps", tuple(self.steps))
        for a, b in zip(self.steps, self.steps[1:]):
            if a.target != b.source:
                raise NetworkError(
                    f"steps {a} and {b} do not chain: {a.target.name} != {b.source.name}")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def node_types(self) -> tuple[NodeType, ...]:
        return (self.steps[0].source,) + tuple(s.target for s in self.steps)

    @property
    def start(self) -> NodeType:
        return self.steps[0].source

    @property
    def end(self) -> NodeType:
        return self.steps[-1].target

    @property
    def key(self) -> tuple:
        return tuple(s.key for s in self.steps)

    def is_palindrome(self) -> bool:
        """True when the path equals its own reversal (e.g. PAP, PVCVP)."""
        rev = tuple(s.inverted() for s in reversed(self.steps))
        return rev == self.steps

    def __str__(self) -> str:
        return format_meta_path(self)


@dataclass(frozen=True)
class CombinedPaths:
    """Several meta paths merged into one untyped relation (counts add up)."""

    paths: tuple[MetaPath, ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise NetworkError("cannot combine zero meta paths")

    def __str__(self) -> str:
        return " + ".join(format_meta_path(p) for p in self.paths)


@dataclass(frozen=True)
class MetaPathSet:
    paths: tuple[MetaPath, ...]
    target_type: NodeType
    lmax: int

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if len(set(self.paths)) != len(self.paths):
            raise NetworkError("duplicate meta path in set")
        for p in self.paths:
            if p.start != self.target_type or p.end != self.target_type:
                raise NetworkError(
                    f"meta path {p} does not start and end at {self.target_type.name}")
            if len(p) > self.lmax:
                raise NetworkError(f"meta path {p} is longer than lmax={self.lmax}")

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def __contains__(self, path) -> bool:
        return path in self.paths


@dataclass
class PathNeighborhood:
    """Related instances of ``source``: end-type ordinal -> path-instance count."""

    source: NodeId
    weights: dict[int, int]


def format_meta_path(path: MetaPath) -> str:
    parts = [path.start.name]
    for s in path.steps:
        parts.append(str(s))
        parts.append(s.target.name)
    return " ".join(parts)


_FORWARD = re.compile(r"^-([^\s<>^]+)->$")
_INVERSE = re.compile(r"^<-([^\s<>^]+)-$")
_INVERSE_CARET = re.compile(r"^-([^\s<>^]+)\^-1->$")


def parse_meta_path(text: str, schema: SchemaGraph | HeterogeneousNetwork) -> MetaPath:
    """Parse the canonical textual syntax against a schema."""
    if isinstance(schema, HeterogeneousNetwork):
        schema = schema.schema()
    tokens = text.split()
    if len(tokens) < 3 or len(tokens) % 2 == 0:
        raise NetworkError(f"malformed meta path {text!r}")
    current = schema.node_type(tokens[0])
    steps = []
    for arrow, node_name in zip(tokens[1::2], tokens[2::2]):
        for pattern, inverse in ((_INVERSE_CARET, True), (_FORWARD, False), (_INVERSE, True)):
            m = pattern.match(arrow)
            if m:
                break
        else:
            raise NetworkError(f"malformed relation token {arrow!r} in {text!r}")
        step = RelationStep(schema.relation(m.group(1)), inverse)
        nxt = schema.node_type(node_name)
        if step.source != current or step.target != nxt:
            raise NetworkError(
                f"{current.name} {arrow} {nxt.name} does not match relation "
                f"{step.relation}")
        steps.append(step)
        current = nxt
    return MetaPath(tuple(steps))


def _resolve_target(schema: SchemaGraph, target) -> NodeType:
    return schema.node_type(target)


def _dependence_tree_levels(schema: SchemaGraph, target: NodeType, lmax: int,
                            keep=None):
    """Yield BFS levels of the dependence tree as lists of step tuples.

    ``keep(prefix)`` is consulted for prefixes ending at the target type; a
    False answer prunes that prefix and its whole subtree.
    """
    arcs = sorted(schema.arcs, key=lambda a: a.key)
    out_arcs = {t: [a for a in arcs if a.source == t] for t in schema.vertices}
    level = [()]
    for _ in range(lmax):
        nxt = []
        for prefix in level:
            end = prefix[-1].target if prefix else target
            for arc in out_arcs[end]:
                candidate = prefix + (arc,)
                if arc.target == target and keep is not None and not keep(candidate):
                    continue
                nxt.append(candidate)
        yield nxt
        level = nxt


def enumerate_candidates(schema: SchemaGraph, target, lmax: int) -> list[MetaPath]:
    """All type-correct target-to-target meta paths up to ``lmax`` steps.

    Paths come in breadth-first order of the dependence tree: shorter first,
    then lexicographic by (relation index, forward-before-inverse).
    """
    if lmax < 1:
        raise ValueError("lmax must be >= 1")
    target = _resolve_target(schema, target)
    found = []
    for level in _dependence_tree_levels(schema, target, lmax):
        found.extend(MetaPath(p) for p in level if p[-1].target == target)
    return found


def is_decomposable(path: MetaPath, selected: Iterable[MetaPath]) -> bool:
    """Can ``path`` be cut, at interior target-type nodes, into selected paths?

    A decomposition needs at least two segments, every segment must already
    be selected, and at least one segment must be longer than one step.
    """
    target = path.start
    known = {p.key for p in selected}
    types = path.node_types
    n = len(path)
    cuts = [i for i in range(1, n) if types[i] == target] + [n]
    # reachable[i] = set of "has a non-trivial segment so far" flags
    reachable: dict[int, set[bool]] = {0: {False}}
    for i in [0] + cuts[:-1]:
        flags = reachable.get(i)
        if not flags:
            continue
        for j in cuts:
            if j <= i or (i == 0 and j == n):
                continue
            if tuple(s.key for s in path.steps[i:j]) in known:
                nontrivial = j - i > 1
                reachable.setdefault(j, set()).update(f or nontrivial for f in flags)
    return True in reachable.get(n, set())


def select_meta_paths(schema: SchemaGraph, target, lmax: int,
                      initial: Iterable[MetaPath] = ()) -> MetaPathSet:
    """Breadth-first meta-path selection with decomposability pruning.

    A candidate joins the set unless it decomposes into paths already
    selected; a decomposable candidate is pruned together with its subtree.
    """
    if lmax < 1:
        raise ValueError("lmax must be >= 1")
    target = _resolve_target(schema, target)
    selected: list[MetaPath] = list(initial)

    def keep(prefix):
        mp = MetaPath(prefix)
        if is_decomposable(mp, selected):
            return False
        if mp not in selected:
            selected.append(mp)
        return True

    for _ in _dependence_tree_levels(schema, target, lmax, keep):
        pass
    return MetaPathSet(tuple(selected), target, lmax)


def all_meta_paths(schema: SchemaGraph, target, lmax: int) -> MetaPathSet:
    """Every candidate without pruning (the exhaustive variant)."""
    target = _resolve_target(schema, target)
    return MetaPathSet(tuple(enumerate_candidates(schema, target, lmax)), target, lmax)


class NetworkView:
    """A network with some nodes hidden, plus a cache of path-count matrices.

    Hidden nodes behave as if every incident edge were deleted.  Count
    matrices are cached per path; the view itself never changes.
    """

    def __init__(self, network: HeterogeneousNetwork,
                 hidden: Mapping[object, Iterable[int]] | None = None):
        self.network = network
        self.hidden: dict[int, np.ndarray] = {}
        for t, ordinals in (hidden or {}).items():
            idx = network.node_type(t).index
            self.hidden[idx] = np.unique(np.asarray(list(ordinals), dtype=np.int64))
        self._cache: dict[object, sp.csr_matrix] = {}

    def adjacency(self, step: RelationStep) -> sp.csr_matrix:
        m = self.network.adjacency(step)
        src = self.hidden.get(step.source.index)
        tgt = self.hidden.get(step.target.index)
        if (src is None or not len(src)) and (tgt is None or not len(tgt)):
            return m
        rows = np.ones(m.shape[0])
        cols = np.ones(m.shape[1])
        if src is not None:
            rows[src] = 0.0
        if tgt is not None:
            cols[tgt] = 0.0
        m = (sp.diags(rows) @ m @ sp.diags(cols)).tocsr()
        m.eliminate_zeros()
        m.sort_indices()
        return m

    def neighbor_ordinals(self, step: RelationStep, ordinal: int) -> np.ndarray:
        hidden_src = self.hidden.get(step.source.index)
        if hidden_src is not None and ordinal in hidden_src:
            return np.zeros(0, dtype=np.int64)
        nbrs = self.network.neighbor_ordinals(step, ordinal)
        hidden_tgt = self.hidden.get(step.target.index)
        if hidden_tgt is not None and len(hidden_tgt):
            nbrs = nbrs[~np.isin(nbrs, hidden_tgt)]
        return nbrs

    def count_matrix(self, path: MetaPath | CombinedPaths) -> sp.csr_matrix:
        """Start-by-end matrix of path-instance counts with a zero diagonal."""
        m = self._cache.get(path)
        if m is None:
            if isinstance(path, CombinedPaths):
                m = self.count_matrix(path.paths[0])
                for p in path.paths[1:]:
                    m = m + self.count_matrix(p)
                m = m.tocsr()
                m.sort_indices()
            else:
                m = _chain_counts(self, path)
            self._cache[path] = m
        return m


def _as_view(network) -> NetworkView:
    return network if isinstance(network, NetworkView) else NetworkView(network)


def _chain_counts(view: NetworkView, path: MetaPath) -> sp.csr_matrix:
    m = view.adjacency(path.steps[0])
    for step in path.steps[1:]:
        m = m @ view.adjacency(step)
    m = sp.csr_matrix(m)
    if path.start == path.end:
        m.setdiag(0)
    m.eliminate_zeros()
    m.sort_indices()
    return m


def path_count_matrix(network, path: MetaPath) -> sp.csr_matrix:
    """Counts for every source at once via sparse matrix products."""
    return _as_view(network).count_matrix(path)


def path_neighborhood(network, path: MetaPath, source: NodeId) -> PathNeighborhood:
    """Related instances of one node through ``path`` with instance counts.

    Propagates a sparse count vector step by step; intermediate nodes may be
    revisited, but sequences that end back at ``source`` are dropped.
    """
    view = _as_view(network)
    if source.type != path.start.index:
        raise NetworkError(
            f"meta path {path} starts at {path.start.name} but node "
            f"{source.external_id!r} is a "
            f"{view.network.node_types[source.type].name}")
    frontier = {source.ordinal: 1}
    for step in path.steps:
        nxt: dict[int, int] = {}
        for node, count in frontier.items():
            for j in view.neighbor_ordinals(step, node).tolist():
                nxt[j] = nxt.get(j, 0) + count
        frontier = nxt
        if not frontier:
            break
    if path.start == path.end:
        frontier.pop(source.ordinal, None)
    return PathNeighborhood(source, dict(sorted(frontier.items())))

