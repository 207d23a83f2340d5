import numpy as np
import pytest

from hincc.baselines import iid_fit, iid_predict
from hincc.graph import build_network
from hincc.hcc import (HccModel, InferenceState, bootstrap, hcc_train, infer, iterate_once,
                       known_labels, run_inference)
from hincc.learner import LinearModel
from hincc.metapath import NetworkView, parse_meta_path
from hincc.relfeat import UNLABELED, LabelSpace
from hincc.synthetic import SyntheticParams, generate_synthetic_hin

AB = LabelSpace(("A", "B"))


def two_node_net():
    return build_network(["paper"], [("cite", "paper", "paper")],
                         [("paper", "u1"), ("paper", "u2")],
                         [("cite", "u1", "u2"), ("cite", "u2", "u1")])


def hand_model(net):
    pp = parse_meta_path("paper -cite-> paper", net)
    local = LinearModel(np.array([[1.0, 10.0, 0.0], [-1.0, 0.0, 10.0]]), np.zeros(2), 0.0)
    return HccModel(local, (pp,), AB, 1)


def test_two_node_hand_trace_is_synchronous():
    net = two_node_net()
    model = hand_model(net)
    X = np.array([[1.0], [-1.0]])
    y_known = np.array([UNLABELED, UNLABELED])
    state = bootstrap(model, X, [0, 1])
    assert state.estimates.tolist() == [0, 1]          # scores (1,-1) and (-1,1)
    # u1 sees u2=B: (1, -1+10); u2 sees u1=A: (-1+10, 1)
    state = iterate_once(model, net, X, y_known, state)
    assert state.estimates.tolist() == [1, 0]
    assert state.iteration == 1 and state.changes == [1.0]
    state = iterate_once(model, net, X, y_known, state)
    assert state.estimates.tolist() == [0, 1]
    assert state.cycle_detected


def test_oscillation_capped_by_max_it():
    net = two_node_net()
    state = run_inference(hand_model(net), net, np.array([[1.0], [-1.0]]),
                          np.array([UNLABELED, UNLABELED]), [0, 1], max_it=10)
    assert state.iteration == 10
    assert not state.converged and state.cycle_detected


def test_max_it_zero_returns_bootstrap():
    net = two_node_net()
    model = hand_model(net)
    X = np.array([[1.0], [-1.0]])
    out = infer(model, net, X, np.array([UNLABELED, UNLABELED]), [0, 1], max_it=0)
    assert out.tolist() == bootstrap(model, X, [0, 1]).estimates.tolist()


def test_empty_u():
    net = two_node_net()
    model = hand_model(net)
    state = bootstrap(model, np.zeros((2, 1)), [])
    assert len(state.estimates) == 0
    nxt = iterate_once(model, net, np.zeros((2, 1)), np.array([0, 1]), state)
    assert nxt.iteration == 1 and len(nxt.estimates) == 0


def test_zero_model_bootstraps_class_zero():
    net = two_node_net()
    model = HccModel(LinearModel.zeros(2, 3), hand_model(net).paths, AB, 1)
    assert bootstrap(model, np.ones((2, 1)), [0, 1]).estimates.tolist() == [0, 0]


def small_synthetic(seed=0, **kw):
    params = SyntheticParams(papers=240, authors=80, venues=12, classes=3, dimension=20,
                             seed=seed, **kw)
    net, X, y = generate_synthetic_hin(params)
    return net, X, y, LabelSpace.of_size(3)


def test_no_paths_reduces_to_iid():
    net, X, y, space = small_synthetic()
    L, U = np.arange(0, 240, 2), np.arange(1, 240, 2)
    model = hcc_train(net, X, y, L, (), space)
    iid = iid_fit(X, y, L, space)
    assert np.array_equal(model.local.weights, iid.weights)
    assert np.array_equal(model.local.bias, iid.bias)
    state = bootstrap(model, X, U)
    assert np.array_equal(state.estimates, iid_predict(iid, X, U))
    assert np.array_equal(infer(model, net, X, known_labels(y, L), U), iid_predict(iid, X, U))


def test_labeled_clique_gives_one_hot_training_rows():
    clique = [f"p{i}" for i in range(4)]
    net = build_network(["paper"], [("cite", "paper", "paper")],
                        [("paper", n) for n in clique + ["lone"]],
                        [("cite", a, b) for a in clique for b in clique if a != b])
    pp = parse_meta_path("paper -cite-> paper", net)
    y = np.array([1, 1, 1, 1, 0])
    L = np.arange(5)
    model = hcc_train(net, np.eye(5), y, L, (pp,), AB)
    feats = model.extended(NetworkView(net), np.eye(5), y, L)
    assert feats[:4, 5:].tolist() == [[0.0, 1.0]] * 4
    assert feats[4, 5:].tolist() == [0.0, 0.0]


def test_no_cross_u_paths_fixed_point_after_one_round():
    # every unlabeled paper only links to labeled papers
    net, X, y, space = small_synthetic()
    pap = parse_meta_path("paper -authoredBy-> author <-authoredBy- paper", net)
    view = NetworkView(net)
    M = view.count_matrix(pap).tocsr()
    U = []
    blocked = set()
    for i in range(240):
        if i in blocked:
            continue
        U.append(i)
        blocked.update(M.indices[M.indptr[i]:M.indptr[i + 1]].tolist())
        blocked.add(i)
    U = np.array(U[:30])
    L = np.setdiff1d(np.arange(240), U)
    model = hcc_train(net, X, y, L, (pap,), space)
    state = run_inference(model, net, X, known_labels(y, L), U)
    assert state.iteration <= 2
    assert all(c == 0.0 for c in state.changes[1:])


def test_inference_leaves_labels_untouched_and_is_order_free():
    net, X, y, space = small_synthetic(1)
    paths = (parse_meta_path("paper -authoredBy-> author <-authoredBy- paper", net),
             parse_meta_path("paper -cite-> paper", net))
    L, U = np.arange(0, 240, 3), np.setdiff1d(np.arange(240), np.arange(0, 240, 3))
    model = hcc_train(net, X, y, L, paths, space)
    y_known = known_labels(y, L)
    snapshot = y_known.copy()
    state = run_inference(model, net, X, y_known, U)
    assert np.array_equal(y_known, snapshot)
    assert state.iteration <= 10
    perm = np.random.default_rng(0).permutation(len(U))
    again = run_inference(model, net, X, y_known, U[perm])
    assert np.array_equal(again.estimates, state.estimates[perm])


def test_strict_mode_matches_default_when_everything_labeled():
    net, X, y, space = small_synthetic(2)
    paths = (parse_meta_path("paper -cite-> paper", net),)
    L = np.arange(240)
    a = hcc_train(net, X, y, L, paths, space)
    b = hcc_train(net, X, y, L, paths, space, strict=True)
    assert np.array_equal(a.local.weights, b.local.weights)


def block_norm(rho):
    params = SyntheticParams(papers=600, authors=200, venues=20, classes=4, dimension=30,
                             noise=0.85, seed=3,
                             rho={"cite": 0.0, "authoredBy": rho, "publishIn": 0.0})
    net, X, y = generate_synthetic_hin(params)
    pap = parse_meta_path("paper -authoredBy-> author <-authoredBy- paper", net)
    model = hcc_train(net, X, y, np.arange(600), (pap,), LabelSpace.of_size(4))
    return np.abs(model.local.weights[:, X.shape[1]:]).max()


def test_planted_autocorrelation_grows_relational_weights():
    assert block_norm(0.9) > block_norm(0.0)


@pytest.mark.slow
def test_inference_beats_bootstrap_on_average():
    gains = []
    for seed in range(10):
        params = SyntheticParams(papers=300, authors=100, venues=15, classes=4, dimension=30,
                                 noise=0.85, seed=seed)
        net, X, y = generate_synthetic_hin(params)
        paths = (parse_meta_path("paper -authoredBy-> author <-authoredBy- paper", net),
                 parse_meta_path("paper -publishIn-> venue <-publishIn- paper", net))
        L, U = np.arange(0, 300, 2), np.arange(1, 300, 2)
        model = hcc_train(net, X, y, L, paths, LabelSpace.of_size(4))
        boot = bootstrap(model, X, U).estimates
        final = infer(model, net, X, known_labels(y, L), U)
        gains.append(np.mean(final == y[U]) - np.mean(boot == y[U]))
    assert np.mean(gains) >= 0


def test_inference_state_converged_flag():
    s = InferenceState(np.array([0]), np.array([0]), 1, [0.0])
    assert s.converged
    assert not InferenceState(np.array([0]), np.array([0])).converged
