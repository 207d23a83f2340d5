import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from oracles import ACM_NODE_TYPES, ACM_RELATIONS, DBLP_NODE_TYPES, DBLP_RELATIONS  # noqa: E402

from hincc.graph import build_network  # noqa: E402


@pytest.fixture
def acm_schema():
    return build_network(ACM_NODE_TYPES, ACM_RELATIONS, (), ()).schema()


@pytest.fixture
def dblp_schema():
    return build_network(DBLP_NODE_TYPES, DBLP_RELATIONS, (), ()).schema()


@pytest.fixture
def toy_acm():
    """Four papers whose authors all sit at one institute; p1..p4 share it."""
    nodes = [("paper", f"p{i}") for i in range(1, 5)]
    nodes += [("author", f"a{i}") for i in range(1, 5)]
    nodes += [("institute", "f1"), ("proceeding", "v1"), ("proceeding", "v2"),
              ("conference", "c1")]
    edges = [("authoredBy", f"p{i}", f"a{i}") for i in range(1, 5)]
    edges += [("affiliation", f"a{i}", "f1") for i in range(1, 5)]
    edges += [("publishIn", "p1", "v1"), ("publishIn", "p2", "v1"),
              ("publishIn", "p3", "v2"), ("publishIn", "p4", "v2"),
              ("collectIn", "v1", "c1"), ("collectIn", "v2", "c1"),
              ("cite", "p1", "p2"), ("cite", "p3", "p1")]
    return build_network(ACM_NODE_TYPES, ACM_RELATIONS, nodes, edges)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
