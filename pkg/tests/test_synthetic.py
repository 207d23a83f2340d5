import numpy as np
import pytest

from hincc.metapath import parse_meta_path, path_count_matrix
from hincc.synthetic import SyntheticParams, generate_synthetic_hin, synthetic_bundle


def same_class_rate(net, y, text):
    M = path_count_matrix(net, parse_meta_path(text, net)).tocoo()
    return float(np.mean(y[M.row] == y[M.col]))


PAP = "paper -authoredBy-> author <-authoredBy- paper"
PVP = "paper -publishIn-> venue <-publishIn- paper"
PP = "paper -cite-> paper"


def test_rho_one_forces_agreement_exhaustively():
    params = SyntheticParams(papers=300, authors=60, venues=8, classes=3, dimension=12,
                             noise=1.0, rho={"authoredBy": 1.0, "publishIn": 0.0, "cite": 0.0})
    net, X, y = generate_synthetic_hin(params)
    a = net.adjacency(next(s for s in net.schema().arcs if s.relation.name == "authoredBy"))
    a = a.tocsc()
    for j in range(net.num_nodes("author")):
        papers = a.indices[a.indptr[j]:a.indptr[j + 1]]
        assert len(set(y[papers].tolist())) <= 1


def test_rho_zero_is_chance_level():
    params = SyntheticParams(papers=600, authors=150, venues=20, classes=4, dimension=20,
                             rho={"authoredBy": 0.0, "publishIn": 0.0, "cite": 0.0}, seed=2)
    net, _, y = generate_synthetic_hin(params)
    for text in (PAP, PVP, PP):
        assert abs(same_class_rate(net, y, text) - 0.25) <= 0.05


@pytest.mark.parametrize("rho", [0.3, 0.64])
def test_planted_rate_matches_formula(rho):
    q = 4
    params = SyntheticParams(papers=1000, authors=200, venues=40, classes=q, dimension=20,
                             rho={"authoredBy": rho, "publishIn": rho, "cite": rho}, seed=5)
    net, _, y = generate_synthetic_hin(params)
    want = rho + (1 - rho) / q
    for text in (PAP, PVP, PP):
        assert abs(same_class_rate(net, y, text) - want) <= 0.05


def test_generation_is_deterministic_and_shaped():
    params = SyntheticParams(papers=120, authors=40, venues=8, classes=4, dimension=16, seed=9)
    a, b = generate_synthetic_hin(params), generate_synthetic_hin(params)
    assert np.array_equal(a[1], b[1]) and np.array_equal(a[2], b[2])
    for rel in a[0].relations:
        assert a[0].edges(rel) == b[0].edges(rel)
    assert a[1].shape == (120, 16)
    assert np.allclose(a[1].sum(axis=1), 1.0)
    bundle = synthetic_bundle(params)
    assert bundle.target.name == "paper" and bundle.space.q == 4


def test_noise_free_words_stay_in_prototype():
    params = SyntheticParams(papers=100, authors=40, venues=8, classes=4, dimension=20,
                             noise=0.0, seed=1)
    _, X, y = generate_synthetic_hin(params)
    support = [set(np.flatnonzero(X[y == c].sum(axis=0))) for c in range(4)]
    for c in range(4):
        for d in range(c + 1, 4):
            assert not support[c] & support[d]


@pytest.mark.parametrize("kw", [
    dict(classes=1), dict(noise=1.5), dict(authors=2), dict(rho={"cite": 2.0}),
    dict(rho={"likes": 0.5}), dict(schema="dblp"), dict(dimension=2),
])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        SyntheticParams(**kw)
