"""Text formats for datasets, synthetic parameters and experiment configs.

Every file starts with the line ``format-version 1``.  Configuration-like
files (schema, synthetic parameters, experiment) are ``[section]`` headers
followed by ``key = value`` lines; ``#`` starts a comment line.  A dataset
bundle is a directory holding five files:

``schema.txt``      ``[network]`` node-types / target / classes, ``[relations]``
                    ``name = dom -> rang``
``nodes.txt``       ``<node type> <external id>`` per line
``edges.txt``       ``<relation> <source id> <target id>`` per line
``attributes.txt``  ``dimension <d>`` then ``<id> <index>:<value> ...`` with
                    1-based, strictly increasing indices (target nodes only)
``labels.txt``      ``<id> <class>``; absent nodes are unlabeled
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import KINDS, MethodError, MethodSpec
from .data import DatasetBundle
from .evaluation import ExperimentConfig
from .graph import HeterogeneousNetwork, NetworkError, build_network
from .learner import LogisticRegression
from .relfeat import UNLABELED, LabelSpace
from .synthetic import RELATIONS, SyntheticParams

VERSION_LINE = "format-version 1"
BUNDLE_FILES = ("schema.txt", "nodes.txt", "edges.txt", "attributes.txt", "labels.txt")


class FormatError(ValueError):
    def __init__(self, path, line: int, column: int, message: str):
        self.path, self.line, self.column = str(path), line, column
        super().__init__(f"{path}:{line}:{column}: {message}")


@dataclass
class Entry:
    value: str
    line: int
    column: int


@dataclass
class Section:
    name: str
    line: int
    entries: dict[str, Entry] = field(default_factory=dict)

    def get(self, key, default=None):
        e = self.entries.get(key)
        return default if e is None else e.value


_KEY = re.compile(r"[A-Za-z0-9_.\-]+")
_SECTION = re.compile(r"\[([A-Za-z0-9_.\-]+)\]")


def _read_lines(path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FormatError(path, 0, 0, "file not found") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].rstrip("\r") != VERSION_LINE:
        raise FormatError(path, 1, 1, f"first line must be {VERSION_LINE!r}")
    return [ln.rstrip("\r") for ln in lines]


def parse_sections(path) -> dict[str, Section]:
    """Strict ``[section]`` / ``key = value`` parser with line/column errors."""
    sections: dict[str, Section] = {}
    current = None
    for no, raw in enumerate(_read_lines(path)[1:], start=2):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip())
        if stripped.startswith("["):
            m = _SECTION.match(stripped)
            if not m:
                raise FormatError(path, no, indent + 1, "malformed section header")
            if m.end() != len(stripped):
                raise FormatError(path, no, indent + m.end() + 1,
                                  "trailing characters after section header")
            name = m.group(1)
            if name in sections:
                raise FormatError(path, no, indent + 2, f"duplicate section [{name}]")
            current = sections[name] = Section(name, no)
            continue
        key, sep, value = raw.partition("=")
        key = key.strip()
        if not sep:
            raise FormatError(path, no, indent + 1, "expected 'key = value'")
        if not _KEY.fullmatch(key):
            raise FormatError(path, no, indent + 1, f"invalid key {key!r}")
        if current is None:
            raise FormatError(path, no, indent + 1, "key outside of any section")
        if key in current.entries:
            raise FormatError(path, no, indent + 1,
                              f"duplicate key {key!r} in [{current.name}]")
        eq = raw.index("=")
        col = eq + 2 + len(value) - len(value.lstrip())
        current.entries[key] = Entry(value.strip(), no, col)
    return sections


def _records(path):
    """Yield ``(line_no, tokens)`` for a line-record file."""
    for no, raw in enumerate(_read_lines(path)[1:], start=2):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        yield no, raw.split()


def _expect(path, no, tokens, n, what):
    if len(tokens) != n:
        col = len(" ".join(tokens[:n])) + 2 if len(tokens) > n else 1
        msg = "trailing garbage" if len(tokens) > n else f"expected {what}"
        raise FormatError(path, no, col, msg)


def _section(path, sections, name, required=True) -> Section | None:
    s = sections.get(name)
    if s is None and required:
        raise FormatError(path, 1, 1, f"missing section [{name}]")
    return s


def _check_keys(path, section: Section, allowed):
    for key, e in section.entries.items():
        if key not in allowed:
            raise FormatError(path, e.line, 1, f"unknown key {key!r} in [{section.name}]")


@dataclass
class SchemaFile:
    node_types: list[str]
    relations: list[tuple[str, str, str]]
    target: str | None = None
    classes: tuple[str, ...] | None = None


def read_schema(path) -> SchemaFile:
    sections = parse_sections(path)
    for name, s in sections.items():
        if name not in ("network", "relations"):
            raise FormatError(path, s.line, 2, f"unknown section [{name}]")
    net = _section(path, sections, "network")
    _check_keys(path, net, ("node-types", "target", "classes"))
    if "node-types" not in net.entries:
        raise FormatError(path, net.line, 1, "[network] needs node-types")
    node_types = net.get("node-types").split()
    if len(set(node_types)) != len(node_types):
        e = net.entries["node-types"]
        raise FormatError(path, e.line, e.column, "duplicate node type name")
    target = net.get("target")
    if target is not None and target not in node_types:
        e = net.entries["target"]
        raise FormatError(path, e.line, e.column, f"unknown target type {target!r}")
    classes = net.get("classes")
    relations = []
    rel = _section(path, sections, "relations", required=False)
    for name, e in (rel.entries.items() if rel else ()):
        parts = e.value.split()
        if len(parts) != 3 or parts[1] != "->":
            raise FormatError(path, e.line, e.column, "expected '<dom> -> <rang>'")
        for t in (parts[0], parts[2]):
            if t not in node_types:
                raise FormatError(path, e.line, e.column, f"unknown node type {t!r}")
        relations.append((name, parts[0], parts[2]))
    return SchemaFile(node_types, relations, target,
                      tuple(classes.split()) if classes else None)


def write_schema(schema: SchemaFile, fh) -> None:
    fh.write(VERSION_LINE + "\n[network]\n")
    fh.write("node-types = " + " ".join(schema.node_types) + "\n")
    if schema.target:
        fh.write(f"target = {schema.target}\n")
    if schema.classes:
        fh.write("classes = " + " ".join(schema.classes) + "\n")
    fh.write("[relations]\n")
    for name, dom, rang in schema.relations:
        fh.write(f"{name} = {dom} -> {rang}\n")


def load_dataset(bundle_dir) -> DatasetBundle:
    """Read and cross-check the five bundle files."""
    d = Path(bundle_dir)
    for name in BUNDLE_FILES:
        if not (d / name).is_file():
            raise FormatError(d / name, 0, 0, "missing bundle file")
    schema = read_schema(d / "schema.txt")
    if schema.target is None:
        raise FormatError(d / "schema.txt", 1, 1, "[network] needs a target type")
    if schema.classes is None:
        raise FormatError(d / "schema.txt", 1, 1, "[network] needs classes")
    try:
        space = LabelSpace(schema.classes)
    except ValueError as exc:
        raise FormatError(d / "schema.txt", 1, 1, str(exc)) from None

    path = d / "nodes.txt"
    nodes = []
    node_lines = {}
    for no, tok in _records(path):
        _expect(path, no, tok, 2, "'<type> <id>'")
        if tok[0] not in schema.node_types:
            raise FormatError(path, no, 1, f"unknown node type {tok[0]!r}")
        if (tok[0], tok[1]) in node_lines:
            raise FormatError(path, no, len(tok[0]) + 2,
                              f"duplicate external id {tok[1]!r} for type {tok[0]!r}")
        node_lines[(tok[0], tok[1])] = no
        nodes.append((tok[0], tok[1]))

    path = d / "edges.txt"
    edges = []
    rel_names = {r[0] for r in schema.relations}
    for no, tok in _records(path):
        _expect(path, no, tok, 3, "'<relation> <source> <target>'")
        if tok[0] not in rel_names:
            raise FormatError(path, no, 1, f"unknown relation {tok[0]!r}")
        edges.append((no, tuple(tok)))
    try:
        network = build_network(schema.node_types, schema.relations, nodes, ())
    except NetworkError as exc:
        raise FormatError(d / "nodes.txt", 0, 0, str(exc)) from None
    for no, e in edges:
        try:
            _check_edge(network, e)
        except NetworkError as exc:
            raise FormatError(path, no, 1, str(exc)) from None
    try:
        network = build_network(schema.node_types, schema.relations, nodes,
                                [e for _, e in edges])
    except NetworkError as exc:
        raise FormatError(path, 0, 0, str(exc)) from None

    target = network.node_type(schema.target)
    n = network.num_nodes(target)

    path = d / "attributes.txt"
    recs = list(_records(path))
    if not recs or recs[0][1][0] != "dimension":
        raise FormatError(path, 2, 1, "expected 'dimension <d>'")
    no, tok = recs[0]
    _expect(path, no, tok, 2, "'dimension <d>'")
    try:
        dim = int(tok[1])
    except ValueError:
        raise FormatError(path, no, 11, "dimension must be an integer") from None
    if dim < 0:
        raise FormatError(path, no, 11, "dimension must be >= 0")
    X = np.zeros((n, dim))
    seen = set()
    for no, tok in recs[1:]:
        ext = tok[0]
        try:
            i = network.node(target, ext).ordinal
        except NetworkError:
            raise FormatError(path, no, 1, f"{ext!r} is not a {target.name} node") from None
        if i in seen:
            raise FormatError(path, no, 1, f"duplicate attributes for {ext!r}")
        seen.add(i)
        last = 0
        col = len(ext) + 2
        for item in tok[1:]:
            idx, sep, val = item.partition(":")
            try:
                k = int(idx)
                v = float(val)
            except ValueError:
                raise FormatError(path, no, col, f"malformed pair {item!r}") from None
            if not sep or k <= last or k > dim:
                raise FormatError(path, no, col,
                                  f"index {idx} out of order or outside 1..{dim}")
            X[i, k - 1] = v
            last = k
            col += len(item) + 1

    path = d / "labels.txt"
    labels = np.full(n, UNLABELED, dtype=np.int64)
    for no, tok in _records(path):
        _expect(path, no, tok, 2, "'<id> <class>'")
        try:
            i = network.node(target, tok[0]).ordinal
        except NetworkError:
            raise FormatError(path, no, 1, f"{tok[0]!r} is not a {target.name} node") from None
        if labels[i] != UNLABELED:
            raise FormatError(path, no, 1, f"duplicate label for {tok[0]!r}")
        if tok[1] not in space.classes:
            raise FormatError(path, no, len(tok[0]) + 2, f"unknown class {tok[1]!r}")
        labels[i] = space.index(tok[1])
    return DatasetBundle(network, target, space, X, labels)


def _check_edge(network: HeterogeneousNetwork, edge):
    rel = network.relation(edge[0])
    for ext, t in ((edge[1], rel.dom), (edge[2], rel.rang)):
        try:
            network.node(t, ext)
        except NetworkError:
            others = [o.name for o in network.node_types
                      if ext in network.external_ids(o)]
            if others:
                raise NetworkError(f"relation {rel.name!r} expects a {t.name} node "
                                   f"but {ext!r} is a {others[0]}") from None
            raise NetworkError(f"relation {rel.name!r} references undeclared "
                               f"{t.name} node {ext!r}") from None
    if rel.dom == rel.rang and edge[1] == edge[2]:
        raise NetworkError(f"self-loop on {edge[1]!r} under relation {rel.name!r}")


def _num(v: float) -> str:
    return repr(float(v))


def save_dataset(bundle: DatasetBundle, bundle_dir) -> None:
    """Write a bundle in canonical form (ordinal order, shortest float repr)."""
    d = Path(bundle_dir)
    d.mkdir(parents=True, exist_ok=True)
    net = bundle.network
    schema = SchemaFile([t.name for t in net.node_types],
                        [(r.name, r.dom.name, r.rang.name) for r in net.relations],
                        bundle.target.name, bundle.space.classes)
    with open(d / "schema.txt", "w", encoding="utf-8") as fh:
        write_schema(schema, fh)
    with open(d / "nodes.txt", "w", encoding="utf-8") as fh:
        fh.write(VERSION_LINE + "\n")
        for t in net.node_types:
            for ext in net.external_ids(t):
                fh.write(f"{t.name} {ext}\n")
    with open(d / "edges.txt", "w", encoding="utf-8") as fh:
        fh.write(VERSION_LINE + "\n")
        for r in net.relations:
            src, dst = net.external_ids(r.dom), net.external_ids(r.rang)
            for u, v in net.edges(r):
                fh.write(f"{r.name} {src[u]} {dst[v]}\n")
    ids = net.external_ids(bundle.target)
    with open(d / "attributes.txt", "w", encoding="utf-8") as fh:
        fh.write(VERSION_LINE + "\n")
        fh.write(f"dimension {bundle.X.shape[1]}\n")
        for i, ext in enumerate(ids):
            nz = np.flatnonzero(bundle.X[i])
            pairs = "".join(f" {j + 1}:{_num(bundle.X[i, j])}" for j in nz)
            fh.write(f"{ext}{pairs}\n")
    write_labels(d / "labels.txt", ids, bundle.labels, bundle.space)


def write_labels(path, ids, labels, space: LabelSpace, nodes=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(VERSION_LINE + "\n")
        order = range(len(ids)) if nodes is None else nodes
        for i, c in ((i, labels[i]) for i in order):
            if c != UNLABELED:
                fh.write(f"{ids[i]} {space.classes[c]}\n")


def _int(path, e: Entry, lo=None) -> int:
    try:
        v = int(e.value)
    except ValueError:
        raise FormatError(path, e.line, e.column, f"expected an integer, got {e.value!r}") from None
    if lo is not None and v < lo:
        raise FormatError(path, e.line, e.column, f"value must be >= {lo}")
    return v


def _float(path, e: Entry) -> float:
    try:
        return float(e.value)
    except ValueError:
        raise FormatError(path, e.line, e.column, f"expected a number, got {e.value!r}") from None


def _bool(path, e: Entry) -> bool:
    v = e.value.lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise FormatError(path, e.line, e.column, f"expected true/false, got {e.value!r}")


_SYNTH_INT = {"papers": 1, "authors": 1, "venues": 1, "classes": 2, "dimension": 1,
              "words": 1, "authors-per-paper": 0, "citations-per-paper": 0, "seed": 0}


def read_synthetic_params(path) -> SyntheticParams:
    sections = parse_sections(path)
    for name, s in sections.items():
        if name not in ("synthetic", "rho"):
            raise FormatError(path, s.line, 2, f"unknown section [{name}]")
    syn = _section(path, sections, "synthetic")
    _check_keys(path, syn, tuple(_SYNTH_INT) + ("noise", "schema"))
    kwargs = {}
    for key, lo in _SYNTH_INT.items():
        if key in syn.entries:
            kwargs[key.replace("-", "_")] = _int(path, syn.entries[key], lo)
    if "noise" in syn.entries:
        kwargs["noise"] = _float(path, syn.entries["noise"])
    if "schema" in syn.entries:
        kwargs["schema"] = syn.get("schema")
    rho_sec = sections.get("rho")
    if rho_sec is not None:
        _check_keys(path, rho_sec, tuple(RELATIONS))
        kwargs["rho"] = {k: _float(path, e) for k, e in rho_sec.entries.items()}
    try:
        return SyntheticParams(**kwargs)
    except ValueError as exc:
        raise FormatError(path, syn.line, 1, str(exc)) from None


def write_synthetic_params(params: SyntheticParams, fh) -> None:
    fh.write(VERSION_LINE + "\n[synthetic]\n")
    fh.write(f"schema = {params.schema}\n")
    for key in _SYNTH_INT:
        fh.write(f"{key} = {getattr(params, key.replace('-', '_'))}\n")
    fh.write(f"noise = {params.noise!r}\n[rho]\n")
    for key in RELATIONS:
        fh.write(f"{key} = {params.strength(key)!r}\n")


_EXPERIMENT_KEYS = ("dataset", "synthetic", "target", "lmax", "folds", "repeats",
                    "seed", "max-it", "ablation")
_METHOD_KEYS = ("kind", "path", "lmax", "vote", "strict", "max-it")


def read_experiment_config(path) -> ExperimentConfig:
    """Parse an experiment file; relative dataset paths resolve next to it."""
    path = Path(path)
    sections = parse_sections(path)
    exp = _section(path, sections, "experiment")
    _check_keys(path, exp, _EXPERIMENT_KEYS)
    base = path.parent
    kwargs = {}
    if ("dataset" in exp.entries) == ("synthetic" in exp.entries):
        raise FormatError(path, exp.line, 1, "give exactly one of dataset / synthetic")
    if "dataset" in exp.entries:
        kwargs["dataset"] = os.fspath(base / exp.get("dataset"))
    else:
        kwargs["synthetic"] = read_synthetic_params(base / exp.get("synthetic"))
    if "target" in exp.entries:
        kwargs["target"] = exp.get("target")
    for key, name, lo in (("lmax", "lmax", 1), ("folds", "k", 1), ("repeats", "repeats", 1),
                          ("seed", "seed", 0), ("max-it", "max_it", 0)):
        if key in exp.entries:
            kwargs[name] = _int(path, exp.entries[key], lo)
    if "ablation" in exp.entries:
        kwargs["ablation"] = _bool(path, exp.entries["ablation"])
    max_it = kwargs.get("max_it", 10)

    learner = sections.get("learner")
    if learner is not None:
        _check_keys(path, learner, ("lambda", "tol", "max-epochs"))
        lk = {}
        if "lambda" in learner.entries:
            lk["lam"] = _float(path, learner.entries["lambda"])
        if "tol" in learner.entries:
            lk["tol"] = _float(path, learner.entries["tol"])
        if "max-epochs" in learner.entries:
            lk["max_epochs"] = _int(path, learner.entries["max-epochs"], 1)
        kwargs["learner"] = LogisticRegression(**lk)

    paths_sec = sections.get("paths")
    if paths_sec is not None:
        kwargs["paths"] = tuple(e.value for e in paths_sec.entries.values())

    methods = []
    for name, s in sections.items():
        if name in ("experiment", "learner", "paths"):
            continue
        if not name.startswith("method."):
            raise FormatError(path, s.line, 2, f"unknown section [{name}]")
        label = name[len("method."):]
        for key, e in s.entries.items():
            if key not in _METHOD_KEYS and not key.startswith("path."):
                raise FormatError(path, e.line, 1, f"unknown key {key!r} in [{name}]")
        kind = s.get("kind")
        if kind is None:
            raise FormatError(path, s.line, 1, f"[{name}] needs a kind")
        if kind not in KINDS:
            e = s.entries["kind"]
            raise FormatError(path, e.line, e.column, f"unknown method kind {kind!r}")
        mpaths = [e.value for k, e in s.entries.items() if k == "path" or k.startswith("path.")]
        mk = dict(kind=kind, name=label, max_it=max_it,
                  paths=tuple(mpaths) if mpaths else None)
        if "lmax" in s.entries:
            mk["lmax"] = _int(path, s.entries["lmax"], 1)
        if "vote" in s.entries:
            mk["vote"] = s.get("vote")
        if "strict" in s.entries:
            mk["strict"] = _bool(path, s.entries["strict"])
        if "max-it" in s.entries:
            mk["max_it"] = _int(path, s.entries["max-it"], 0)
        try:
            methods.append(MethodSpec(**mk))
        except MethodError as exc:
            raise FormatError(path, s.line, 1, str(exc)) from None
    if not methods and not kwargs.get("ablation"):
        raise FormatError(path, 1, 1, "no [method.*] sections")
    try:
        return ExperimentConfig(methods=tuple(methods), **kwargs)
    except ValueError as exc:
        raise FormatError(path, exp.line, 1, str(exc)) from None
