"""Synthetic bibliographic networks with planted label autocorrelation.

The "mini-ACM" schema has papers (the target type), authors and venues,
linked by ``cite`` (paper -> paper), ``authoredBy`` (paper -> author) and
``publishIn`` (paper -> venue).

Every author and venue gets a home class (round robin).  A paper of class
``c`` attaches to an entity of its own home class with probability ``a``
and to a uniformly random entity otherwise; with ``a = sqrt(rho)`` two
papers sharing an entity then agree with probability ``rho + (1 - rho)/q``.
A citation picks a same-class paper with probability ``rho`` and a uniform
paper otherwise, so citing and cited paper agree with the same probability.
``rho = 0`` is chance level and ``rho = 1`` forces agreement.

Attributes are bags of words: each of a paper's words is drawn from its
class's prototype vocabulary with probability ``1 - noise`` and uniformly
from the whole vocabulary otherwise; rows hold word frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import DatasetBundle
from .graph import HeterogeneousNetwork, build_network
from .relfeat import LabelSpace

RELATIONS = {"cite": ("paper", "paper"),
             "authoredBy": ("paper", "author"),
             "publishIn": ("paper", "venue")}


def _default_rho():
    return {"cite": 0.6, "authoredBy": 0.8, "publishIn": 0.8}


@dataclass(frozen=True)
class SyntheticParams:
    papers: int = 1200
    authors: int = 400
    venues: int = 40
    classes: int = 4
    dimension: int = 60
    words: int = 10
    noise: float = 0.8
    authors_per_paper: int = 2
    citations_per_paper: int = 2
    rho: dict = field(default_factory=_default_rho)
    seed: int = 0
    schema: str = "mini-acm"

    def __post_init__(self):
        if self.schema != "mini-acm":
            raise ValueError(f"unknown synthetic schema {self.schema!r}")
        for name in ("papers", "authors", "venues", "dimension", "words"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.classes < 2:
            raise ValueError("classes must be >= 2")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must lie in [0, 1]")
        if self.authors_per_paper < 0 or self.citations_per_paper < 0:
            raise ValueError("per-paper link counts must be >= 0")
        unknown = set(self.rho) - set(RELATIONS)
        if unknown:
            raise ValueError(f"rho given for unknown relation(s) {sorted(unknown)}")
        for name, r in self.rho.items():
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"rho for {name} must lie in [0, 1]")
        q = self.classes
        if self.authors < q or self.venues < q:
            raise ValueError("need at least one author and one venue per class")
        if self.authors_per_paper > self.authors // q:
            raise ValueError("authors_per_paper exceeds the authors of one class")
        if self.dimension < q:
            raise ValueError("dimension must be >= classes")
        if self.citations_per_paper and self.papers < 2 * q * (self.citations_per_paper + 1):
            raise ValueError("too few papers for the requested citations")

    def strength(self, relation: str) -> float:
        return float(self.rho.get(relation, 0.0))


def _pick(rng, own_pool, everyone, a, k, exclude=None):
    """``k`` distinct picks, each from ``own_pool`` w.p. ``a`` else from ``everyone``."""
    chosen: list[int] = []
    taken = set() if exclude is None else {exclude}
    for _ in range(k):
        while True:
            pool = own_pool if rng.random() < a else everyone
            j = int(pool[rng.integers(len(pool))])
            if j not in taken:
                break
        taken.add(j)
        chosen.append(j)
    return chosen


def generate_synthetic_hin(params: SyntheticParams
                           ) -> tuple[HeterogeneousNetwork, np.ndarray, np.ndarray]:
    """Return ``(network, X, y)``; identical for identical ``params``."""
    rng = np.random.default_rng(params.seed)
    q, n = params.classes, params.papers
    y = rng.integers(q, size=n)

    author_home = np.arange(params.authors) % q
    venue_home = np.arange(params.venues) % q
    all_authors = np.arange(params.authors)
    all_venues = np.arange(params.venues)
    author_pool = [np.flatnonzero(author_home == c) for c in range(q)]
    venue_pool = [np.flatnonzero(venue_home == c) for c in range(q)]
    all_papers = np.arange(n)
    paper_pool = [np.flatnonzero(y == c) for c in range(q)]
    for c in range(q):
        if params.citations_per_paper and len(paper_pool[c]) <= params.citations_per_paper:
            raise ValueError(f"class {c} has too few papers to cite within")

    a_auth = np.sqrt(params.strength("authoredBy"))
    a_venue = np.sqrt(params.strength("publishIn"))
    a_cite = params.strength("cite")

    edges = []
    for i in range(n):
        c = int(y[i])
        for j in _pick(rng, author_pool[c], all_authors, a_auth, params.authors_per_paper):
            edges.append(("authoredBy", f"p{i}", f"a{j}"))
        for j in _pick(rng, venue_pool[c], all_venues, a_venue, 1):
            edges.append(("publishIn", f"p{i}", f"v{j}"))
        for j in _pick(rng, paper_pool[c], all_papers, a_cite,
                       params.citations_per_paper, exclude=i):
            edges.append(("cite", f"p{i}", f"p{j}"))

    nodes = ([("paper", f"p{i}") for i in range(n)]
             + [("author", f"a{j}") for j in range(params.authors)]
             + [("venue", f"v{j}") for j in range(params.venues)])
    network = build_network(
        ["paper", "author", "venue"],
        [(name, dom, rang) for name, (dom, rang) in RELATIONS.items()],
        nodes, edges)

    d = params.dimension
    size = d // q
    perm = rng.permutation(d)
    prototypes = [perm[c * size:(c + 1) * size] for c in range(q)]
    X = np.zeros((n, d))
    for i in range(n):
        proto = prototypes[int(y[i])]
        noisy = rng.random(params.words) < params.noise
        words = np.where(noisy, rng.integers(d, size=params.words),
                         proto[rng.integers(len(proto), size=params.words)])
        np.add.at(X[i], words, 1.0)
    X /= params.words
    return network, X, y.astype(np.int64)


def synthetic_bundle(params: SyntheticParams) -> DatasetBundle:
    network, X, y = generate_synthetic_hin(params)
    return DatasetBundle(network, network.node_type("paper"),
                         LabelSpace.of_size(params.classes), X, y)
