import numpy as np
import pytest

from hincc.baselines import (Ensemble, MethodError, MethodSpec, cf_run, cp_run, fit_method,
                             hcc_ceiling_run, hcc_run, ica_run, iid_run, predict_method,
                             resolve_paths)
from hincc.graph import build_network
from hincc.hcc import hcc_train
from hincc.metapath import parse_meta_path, path_neighborhood
from hincc.relfeat import LabelSpace
from hincc.synthetic import SyntheticParams, generate_synthetic_hin
from oracles import dfs_counts, hand_fraction


def synthetic(seed=0, papers=240, **kw):
    params = SyntheticParams(papers=papers, authors=papers // 3, venues=12, classes=3,
                             dimension=20, seed=seed, **kw)
    net, X, y = generate_synthetic_hin(params)
    return net, X, y, LabelSpace.of_size(3)


def split(n, every=3):
    L = np.arange(0, n, every)
    return L, np.setdiff1d(np.arange(n), L)


def test_reduction_lattice_bit_exact():
    net, X, y, space = synthetic()
    L, U = split(240)
    pp = parse_meta_path("paper -cite-> paper", net)
    pap = parse_meta_path("paper -authoredBy-> author <-authoredBy- paper", net)
    assert np.array_equal(hcc_run(net, X, y, L, U, (), space), iid_run(X, y, L, U, space))
    for path in (pp, pap):
        ica = ica_run(net, X, y, L, U, path, space)
        assert np.array_equal(cp_run(net, X, y, L, U, (path,), space), ica)
        assert np.array_equal(cf_run(net, X, y, L, U, (path, path), space), ica)


def test_edgeless_path_behaves_like_iid():
    net, X, y, space = synthetic(1, rho={"cite": 0.5, "authoredBy": 0.8, "publishIn": 0.8},
                                 citations_per_paper=0)
    L, U = split(240)
    pp = parse_meta_path("paper -cite-> paper", net)
    iid = iid_run(X, y, L, U, space)
    assert np.array_equal(ica_run(net, X, y, L, U, pp, space), iid)
    assert np.array_equal(hcc_ceiling_run(net, X, y, y, L, U, (pp,), space), iid)


class Fixed:
    def __init__(self, probs):
        self.probs = np.asarray(probs)
        self.paths = ()

    def predict_proba(self, view, X, labels, nodes):
        return self.probs


def test_opposing_members_average_to_tie_class_zero():
    ens = Ensemble([Fixed([[0.9, 0.1]]), Fixed([[0.1, 0.9]])])
    p = ens.predict_proba(None, None, None, [0])
    assert np.allclose(p, [[0.5, 0.5]])
    assert int(np.argmax(p)) == 0
    hard = Ensemble([Fixed([[0.9, 0.1]]), Fixed([[0.2, 0.8]]), Fixed([[0.3, 0.7]])], vote="hard")
    assert np.allclose(hard.predict_proba(None, None, None, [0]), [[1 / 3, 2 / 3]])


def reference_cf(net, X, y, L, U, paths, members, max_it=10):
    """Plain-Python fused inference over DFS neighborhoods."""
    def probs(member, labels, u):
        rel = [] if labels is None else [
            hand_fraction(dfs_counts(net, p, u), labels, 2) for p in member.paths]
        x = np.concatenate([X[u]] + (rel or [np.zeros(2)]))
        s = member.local.weights @ x + member.local.bias
        e = np.exp(s - s.max())
        return e / e.sum()

    def fused(labels):
        return [int(np.argmax(sum(probs(m, labels, u) for m in members) / len(members)))
                for u in U]

    est = fused(None)
    for _ in range(max_it):
        labels = np.full(len(y), -1)
        labels[L] = y[L]
        labels[U] = est
        new = fused(labels)
        if new == est:
            break
        est = new
    return est


def test_cf_matches_hand_rolled_reference():
    names = [f"p{i}" for i in range(10)]
    rng = np.random.default_rng(4)
    edges = [("cite", names[i], names[j]) for i in range(10) for j in range(10)
             if i != j and rng.random() < 0.25]
    edges += [("authoredBy", names[i], f"a{i % 3}") for i in range(10)]
    edges += [("publishIn", names[i], f"v{i % 2}") for i in range(10)]
    net = build_network(["paper", "author", "venue"],
                        [("cite", "paper", "paper"), ("authoredBy", "paper", "author"),
                         ("publishIn", "paper", "venue")],
                        [("paper", n) for n in names] + [("author", f"a{i}") for i in range(3)]
                        + [("venue", "v0"), ("venue", "v1")], edges)
    X = rng.normal(size=(10, 3))
    y = np.array([0, 1, 0, 1, 1, 0, 0, 1, 0, 1])
    L, U = np.array([0, 1, 2, 3, 4, 5]), np.array([6, 7, 8, 9])
    paths = [parse_meta_path(t, net) for t in (
        "paper -cite-> paper", "paper -authoredBy-> author <-authoredBy- paper",
        "paper -publishIn-> venue <-publishIn- paper")]
    space = LabelSpace(("A", "B"))
    members = [hcc_train(net, X, y, L, (p,), space) for p in paths]
    got = cf_run(net, X, y, L, U, paths, space)
    assert got.tolist() == reference_cf(net, X, y, L, U, paths, members)
    for m, p in zip(members, paths):
        for u in U:
            node = net.node_at(p.start, int(u))
            assert path_neighborhood(net, p, node).weights == dfs_counts(net, p, int(u))


def test_ceiling_equals_hcc_when_hcc_is_all_correct():
    checked = 0
    for seed in range(4):
        net, X, y, space = synthetic(seed, noise=0.0, words=30)
        L, U = split(240)
        paths = (parse_meta_path("paper -authoredBy-> author <-authoredBy- paper", net),)
        hcc = hcc_run(net, X, y, L, U, paths, space)
        if not np.array_equal(hcc, y[U]):
            continue
        checked += 1
        assert np.array_equal(hcc_ceiling_run(net, X, y, y, L, U, paths, space), hcc)
    assert checked


def test_iid_single_class_errors_and_separable_is_perfect():
    net, X, y, space = synthetic(3, noise=0.0)
    L, U = split(240)
    with pytest.raises(ValueError):
        iid_run(X, np.zeros_like(y), L, U, space)
    assert np.mean(iid_run(X, y, L, U, space) == y[U]) >= 0.99


def test_method_spec_validation(acm_schema):
    with pytest.raises(MethodError):
        MethodSpec("svm")
    with pytest.raises(MethodError):
        MethodSpec("ica", paths=("a", "b"))
    with pytest.raises(MethodError):
        MethodSpec("iid", paths=("a",))
    with pytest.raises(MethodError):
        MethodSpec("cf", vote="loud")
    assert resolve_paths(MethodSpec("iid"), acm_schema, "paper") == ()
    ica = resolve_paths(MethodSpec("ica"), acm_schema, "paper")
    assert [str(p) for p in ica] == ["paper -cite-> paper"]
    assert len(resolve_paths(MethodSpec("hcc"), acm_schema, "paper")) == 10
    assert len(resolve_paths(MethodSpec("hcc_all", lmax=2), acm_schema, "paper")) == 8


def test_ceiling_requires_truth():
    net, X, y, space = synthetic()
    L, U = split(240)
    spec = MethodSpec("hcc_ceiling")
    paths = (parse_meta_path("paper -cite-> paper", net),)
    model = fit_method(spec, net, X, y, L, space, paths)
    with pytest.raises(MethodError):
        predict_method(spec, model, net, X, y, L, U)


@pytest.mark.slow
def test_citation_autocorrelation_lifts_ica_over_iid():
    gaps = []
    for seed in range(10):
        net, X, y, space = synthetic(seed, papers=300, noise=0.85,
                                     rho={"cite": 0.9, "authoredBy": 0.0, "publishIn": 0.0},
                                     citations_per_paper=4)
        L, U = split(300, 2)
        pp = parse_meta_path("paper -cite-> paper", net)
        ica = np.mean(ica_run(net, X, y, L, U, pp, space) == y[U])
        gaps.append(ica - np.mean(iid_run(X, y, L, U, space) == y[U]))
    assert np.mean(gaps) >= 0.05
