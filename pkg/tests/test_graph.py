import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hincc.graph import NetworkError, RelationStep, build_network, make_schema
from oracles import (ACM_NODE_TYPES, ACM_RELATIONS, DBLP_NODE_TYPES, DBLP_RELATIONS,
                     random_network, step)


def test_empty_acm_network_has_five_vertices_ten_arcs():
    net = build_network(ACM_NODE_TYPES, ACM_RELATIONS, (), ())
    schema = net.schema()
    assert len(schema.vertices) == 5
    assert len(schema.arcs) == 10
    assert all(net.num_nodes(t) == 0 for t in net.node_types)


def test_dblp_schema_two_vertices_four_arcs():
    schema = build_network(DBLP_NODE_TYPES, DBLP_RELATIONS, (), ()).schema()
    assert (len(schema.vertices), len(schema.arcs)) == (2, 4)


def test_no_relations_no_arcs():
    assert make_schema(["a"], []).arcs == ()


def test_arcs_forward_before_inverse():
    schema = make_schema(["p", "a"], [("w", "p", "a"), ("c", "p", "p")])
    assert [(str(a.relation.name), a.inverse) for a in schema.arcs] == [
        ("w", False), ("w", True), ("c", False), ("c", True)]


def test_type_mismatch_rejected():
    nodes = [("paper", "p1"), ("proceeding", "v1")]
    with pytest.raises(NetworkError, match="authoredBy"):
        build_network(ACM_NODE_TYPES, ACM_RELATIONS, nodes,
                      [("authoredBy", "p1", "v1")])


def test_undeclared_node_and_unknown_relation():
    nodes = [("paper", "p1")]
    with pytest.raises(NetworkError):
        build_network(ACM_NODE_TYPES, ACM_RELATIONS, nodes, [("cite", "p1", "p9")])
    with pytest.raises(NetworkError):
        build_network(ACM_NODE_TYPES, ACM_RELATIONS, nodes, [("likes", "p1", "p1")])


def test_duplicate_id_and_self_loop_rejected():
    with pytest.raises(NetworkError):
        build_network(["p"], [], [("p", "x"), ("p", "x")], ())
    with pytest.raises(NetworkError, match="self-loop"):
        build_network(["p"], [("c", "p", "p")], [("p", "x")], [("c", "x", "x")])


def test_parallel_edges_collapse():
    net = build_network(["p"], [("c", "p", "p")], [("p", "x"), ("p", "y")],
                        [("c", "x", "y"), ("c", "x", "y")])
    assert net.num_edges() == 1


def test_two_edge_transpose_by_hand():
    net = build_network(ACM_NODE_TYPES, ACM_RELATIONS,
                        [("paper", "p1"), ("paper", "p4"), ("author", "a1")],
                        [("authoredBy", "p1", "a1"), ("authoredBy", "p4", "a1")])
    a1 = net.node("author", "a1")
    p1 = net.node("paper", "p1")
    back = net.neighbors(a1, step(net, "authoredBy", True))
    assert [n.external_id for n in back] == ["p1", "p4"]
    assert [n.external_id for n in net.neighbors(p1, step(net, "authoredBy"))] == ["a1"]
    assert net.neighbors(p1, step(net, "cite")) == []


def test_neighbors_type_checked(toy_acm):
    a1 = toy_acm.node("author", "a1")
    with pytest.raises(NetworkError):
        toy_acm.neighbors(a1, step(toy_acm, "cite"))


def test_toy_paper_one_has_author_one(toy_acm):
    p1 = toy_acm.node("paper", "p1")
    ids = [n.external_id for n in toy_acm.neighbors(p1, step(toy_acm, "authoredBy"))]
    assert ids == ["a1"]


def test_transpose_consistency_full_scan():
    rng = np.random.default_rng(3)
    for _ in range(20):
        net = random_network(rng, max_nodes=20)
        for rel in net.relations:
            fwd = net.adjacency(RelationStep(rel, False)).toarray()
            inv = net.adjacency(RelationStep(rel, True)).toarray()
            assert np.array_equal(fwd.T, inv)
            pairs = {(int(u), int(v)) for u, v in zip(*np.nonzero(fwd))}
            assert pairs == set(net.edges(rel))


def test_neighbor_lists_sorted():
    rng = np.random.default_rng(5)
    net = random_network(rng, max_nodes=30)
    for arc in net.schema().arcs:
        for i in range(net.num_nodes(arc.source)):
            nb = net.neighbor_ordinals(arc, i)
            assert np.all(np.diff(nb) > 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([r[0] for r in ACM_RELATIONS]),
                          st.integers(0, 3), st.sampled_from(ACM_NODE_TYPES),
                          st.integers(0, 3)), max_size=15))
def test_edge_typing_fuzz(raw):
    nodes = [(t, f"{t[0]}{i}") for t in ACM_NODE_TYPES for i in range(4)]
    dom = {r[0]: (r[1], r[2]) for r in ACM_RELATIONS}
    edges = []
    legal = True
    for rel, i, t2, j in raw:
        src = ("paper" if dom[rel][0] == "paper" else dom[rel][0], f"{dom[rel][0][0]}{i}")
        dst = (t2, f"{t2[0]}{j}")
        edges.append((rel, src, dst))
        if t2 != dom[rel][1] or (dom[rel][0] == t2 and i == j):
            legal = False
    if legal:
        net = build_network(ACM_NODE_TYPES, ACM_RELATIONS, nodes, edges)
        for rel in net.relations:
            for u, v in net.edges(rel):
                assert u < net.num_nodes(rel.dom) and v < net.num_nodes(rel.rang)
    else:
        with pytest.raises(NetworkError):
            build_network(ACM_NODE_TYPES, ACM_RELATIONS, nodes, edges)


def test_build_is_deterministic():
    rng1, rng2 = np.random.default_rng(11), np.random.default_rng(11)
    a, b = random_network(rng1), random_network(rng2)
    for rel_a, rel_b in zip(a.relations, b.relations):
        assert a.edges(rel_a) == b.edges(rel_b)
    assert [a.external_ids(t) for t in a.node_types] == [b.external_ids(t) for t in b.node_types]
