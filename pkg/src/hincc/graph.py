"""Typed storage for heterogeneous information networks.

A network is declared as a set of node types, a set of binary relations
between node types, the nodes of each type and the edges of each relation.
Once built it is immutable.  Adjacency is kept per relation as a pair of
CSR matrices (forward and its exact transpose) so that both neighbor lookup
and path-count propagation are cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp


class NetworkError(ValueError):
    """Raised for inconsistent network declarations or mistyped queries."""


@dataclass(frozen=True)
class NodeType:
    index: int
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class RelationType:
    index: int
    name: str
    dom: NodeType
    rang: NodeType

    def __str__(self) -> str:
        return f"{self.name}: {self.dom.name} -> {self.rang.name}"


@dataclass(frozen=True, order=True)
class RelationStep:
    """A relation traversed forward (dom to rang) or inverted (rang to dom)."""

    relation: RelationType
    inverse: bool = False

    @property
    def source(self) -> NodeType:
        return self.relation.rang if self.inverse else self.relation.dom

    @property
    def target(self) -> NodeType:
        return self.relation.dom if self.inverse else self.relation.rang

    @property
    def key(self) -> tuple[int, int]:
        return (self.relation.index, int(self.inverse))

    def inverted(self) -> "RelationStep":
        return RelationStep(self.relation, not self.inverse)

    def __str__(self) -> str:
        name = self.relation.name
        return f"<-{name}-" if self.inverse else f"-{name}->"


class NodeId(NamedTuple):
    type: int
    ordinal: int
    external_id: str


@dataclass(frozen=True)
class SchemaGraph:
    vertices: tuple[NodeType, ...]
    arcs: tuple[RelationStep, ...]

    def node_type(self, name: str | NodeType) -> NodeType:
        if isinstance(name, NodeType):
            if name not in self.vertices:
                raise NetworkError(f"node type {name.name!r} not in schema")
            return name
        for t in self.vertices:
            if t.name == name:
                return t
        raise NetworkError(f"unknown node type {name!r}")

    def relation(self, name: str) -> RelationType:
        for arc in self.arcs:
            if arc.relation.name == name:
                return arc.relation
        raise NetworkError(f"unknown relation {name!r}")

    def arcs_from(self, node_type: NodeType) -> list[RelationStep]:
        return [a for a in self.arcs if a.source == node_type]


def make_schema(node_types: Sequence[str],
                relations: Iterable[tuple[str, str, str]]) -> SchemaGraph:
    """Schema graph straight from declarations, without any nodes."""
    return build_network(node_types, relations, (), ()).schema()


class HeterogeneousNetwork:
    """Immutable typed graph; construct with :func:`build_network`."""

    def __init__(self, node_types, relations, external_ids, forward):
        self.node_types: tuple[NodeType, ...] = tuple(node_types)
        self.relations: tuple[RelationType, ...] = tuple(relations)
        self._ext = [tuple(ids) for ids in external_ids]
        self._ord = [{e: i for i, e in enumerate(ids)} for ids in self._ext]
        self._fwd = list(forward)
        self._inv = [m.T.tocsr() for m in self._fwd]
        for m in self._inv:
            m.sort_indices()

    def __repr__(self) -> str:
        counts = ", ".join(f"{t.name}={self.num_nodes(t)}" for t in self.node_types)
        return f"HeterogeneousNetwork({counts}; {self.num_edges()} edges)"

    def node_type(self, name: str | NodeType | int) -> NodeType:
        if isinstance(name, NodeType):
            return self.node_types[name.index]
        if isinstance(name, (int, np.integer)):
            return self.node_types[int(name)]
        for t in self.node_types:
            if t.name == name:
                return t
        raise NetworkError(f"unknown node type {name!r}")

    def relation(self, name: str | RelationType) -> RelationType:
        if isinstance(name, RelationType):
            return self.relations[name.index]
        for r in self.relations:
            if r.name == name:
                return r
        raise NetworkError(f"unknown relation {name!r}")

    def num_nodes(self, node_type) -> int:
        return len(self._ext[self.node_type(node_type).index])

    def num_edges(self, relation=None) -> int:
        if relation is None:
            return sum(m.nnz for m in self._fwd)
        return self._fwd[self.relation(relation).index].nnz

    def nodes(self, node_type) -> list[NodeId]:
        t = self.node_type(node_type)
        return [NodeId(t.index, i, e) for i, e in enumerate(self._ext[t.index])]

    def external_ids(self, node_type) -> tuple[str, ...]:
        return self._ext[self.node_type(node_type).index]

    def node(self, node_type, external_id: str) -> NodeId:
        t = self.node_type(node_type)
        try:
            return NodeId(t.index, self._ord[t.index][external_id], external_id)
        except KeyError:
            raise NetworkError(
                f"no {t.name} node with id {external_id!r}") from None

    def node_at(self, node_type, ordinal: int) -> NodeId:
        t = self.node_type(node_type)
        return NodeId(t.index, int(ordinal), self._ext[t.index][ordinal])

    def adjacency(self, step: RelationStep) -> sp.csr_matrix:
        """Source-by-target 0/1 matrix for one traversal direction."""
        i = step.relation.index
        return self._inv[i] if step.inverse else self._fwd[i]

    def neighbor_ordinals(self, step: RelationStep, ordinal: int) -> np.ndarray:
        m = self.adjacency(step)
        return m.indices[m.indptr[ordinal]:m.indptr[ordinal + 1]]

    def neighbors(self, node: NodeId, step: RelationStep) -> list[NodeId]:
        """``R(a) = {b : R(a, b)}`` for a forward step, its transpose otherwise."""
        if node.type != step.source.index:
            raise NetworkError(
                f"step {step} starts at {step.source.name} but node "
                f"{node.external_id!r} is a {self.node_types[node.type].name}")
        tgt = step.target.index
        ids = self._ext[tgt]
        return [NodeId(tgt, int(j), ids[j])
                for j in self.neighbor_ordinals(step, node.ordinal)]

    def edges(self, relation) -> list[tuple[int, int]]:
        m = self._fwd[self.relation(relation).index].tocoo()
        return sorted(zip(m.row.tolist(), m.col.tolist()))

    def schema(self) -> SchemaGraph:
        arcs = []
        for r in self.relations:
            arcs.append(RelationStep(r, False))
            arcs.append(RelationStep(r, True))
        return SchemaGraph(self.node_types, tuple(arcs))


def build_network(node_type_decls: Iterable[str],
                  relation_decls: Iterable[tuple[str, str, str]],
                  node_decls: Iterable[tuple[str, str]],
                  edge_decls: Iterable[tuple]) -> HeterogeneousNetwork:
    """Validate declarations and build an immutable network.

    ``relation_decls`` holds ``(name, dom, rang)`` triples, ``node_decls``
    ``(type, external_id)`` pairs and ``edge_decls`` ``(relation, src, dst)``
    triples.  Edge endpoints are either bare external ids, resolved within
    the relation's domain/range, or explicit ``(type, external_id)`` pairs.
    Parallel edges collapse to one; self-loops are rejected.
    """
    node_types: list[NodeType] = []
    by_name: dict[str, NodeType] = {}
    for name in node_type_decls:
        if name in by_name:
            raise NetworkError(f"duplicate node type {name!r}")
        t = NodeType(len(node_types), name)
        node_types.append(t)
        by_name[name] = t

    def resolve_type(name):
        try:
            return by_name[name]
        except KeyError:
            raise NetworkError(f"unknown node type {name!r}") from None

    relations: list[RelationType] = []
    rel_by_name: dict[str, RelationType] = {}
    for name, dom, rang in relation_decls:
        if name in rel_by_name:
            raise NetworkError(f"duplicate relation {name!r}")
        r = RelationType(len(relations), name, resolve_type(dom), resolve_type(rang))
        relations.append(r)
        rel_by_name[name] = r

    ext: list[list[str]] = [[] for _ in node_types]
    ords: list[dict[str, int]] = [{} for _ in node_types]
    for type_name, external_id in node_decls:
        t = resolve_type(type_name)
        if external_id in ords[t.index]:
            raise NetworkError(
                f"duplicate external id {external_id!r} for node type {t.name!r}")
        ords[t.index][external_id] = len(ext[t.index])
        ext[t.index].append(external_id)

    def endpoint(rel, ref, expected: NodeType) -> int:
        if isinstance(ref, tuple):
            type_name, external_id = ref
            t = resolve_type(type_name)
            if t != expected:
                raise NetworkError(
                    f"relation {rel.name!r} expects a {expected.name} node but "
                    f"got {t.name} {external_id!r}")
        else:
            external_id = ref
        found = ords[expected.index].get(external_id)
        if found is None:
            others = [t.name for t in node_types if external_id in ords[t.index]]
            if others:
                raise NetworkError(
                    f"relation {rel.name!r} expects a {expected.name} node but "
                    f"{external_id!r} is a {others[0]}")
            raise NetworkError(
                f"relation {rel.name!r} references undeclared {expected.name} "
                f"node {external_id!r}")
        return found

    pairs: list[list[tuple[int, int]]] = [[] for _ in relations]
    for rel_name, src, dst in edge_decls:
        try:
            rel = rel_by_name[rel_name]
        except KeyError:
            raise NetworkError(f"unknown relation {rel_name!r}") from None
        u = endpoint(rel, src, rel.dom)
        v = endpoint(rel, dst, rel.rang)
        if rel.dom == rel.rang and u == v:
            raise NetworkError(
                f"self-loop on {ext[rel.dom.index][u]!r} under relation {rel.name!r}")
        pairs[rel.index].append((u, v))

    forward = []
    for rel, edge_list in zip(relations, pairs):
        shape = (len(ext[rel.dom.index]), len(ext[rel.rang.index]))
        if edge_list:
            uniq = sorted(set(edge_list))
            rows, cols = np.array(uniq, dtype=np.int64).T
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
        m = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=shape)
        m.sort_indices()
        forward.append(m)
    return HeterogeneousNetwork(node_types, relations, ext, forward)
