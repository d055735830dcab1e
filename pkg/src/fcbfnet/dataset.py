"""Discrete datasets, ground-truth networks, ancestral sampling and counting.

Values are dense integer codes ``0..k-1``.  A :class:`Dataset` stores its
samples as an ``(N, M)`` integer matrix; a :class:`NetworkModel` stores one
conditional probability table per variable with shape ``(q, r)`` where ``r``
is the variable's cardinality and ``q`` the number of parent configurations.
Parent configurations are enumerated in C order over the ordered parent list
(the last parent varies fastest), i.e. ``np.ravel_multi_index``.
"""

from __future__ import annotations

import csv
import gzip
import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class DataFormatError(ValueError):
    """Raised for malformed CSV or schema input."""


class NetworkFormatError(ValueError):
    """Raised for malformed or inconsistent network files."""


class CycleError(NetworkFormatError):
    def __init__(self, nodes):
        self.nodes = list(nodes)
        super().__init__("parent structure contains a cycle through: " + ", ".join(map(str, self.nodes)))


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Dataset:
    variable_names: tuple[str, ...]
    cardinalities: tuple[int, ...]
    data: np.ndarray  # (N, M) integer codes, read-only

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise DataFormatError("data must be a 2-D (samples x variables) array")
        names = tuple(str(n) for n in self.variable_names)
        cards = tuple(int(c) for c in self.cardinalities)
        if len(names) != data.shape[1] or len(cards) != data.shape[1]:
            raise DataFormatError(
                f"{data.shape[1]} columns but {len(names)} names and {len(cards)} cardinalities")
        if len(set(names)) != len(names):
            raise DataFormatError("duplicate variable names")
        if any(c < 1 for c in cards):
            raise DataFormatError("cardinalities must be >= 1")
        if not np.issubdtype(data.dtype, np.integer):
            raise DataFormatError("data must be integer coded")
        data = np.ascontiguousarray(data, dtype=np.int64)
        if data.size:
            lo = data.min(axis=0)
            hi = data.max(axis=0)
            bad = np.flatnonzero((lo < 0) | (hi >= np.asarray(cards)))
            if bad.size:
                i = int(bad[0])
                raise DataFormatError(
                    f"variable {names[i]!r} has values outside [0, {cards[i]})")
        data.setflags(write=False)
        object.__setattr__(self, "variable_names", names)
        object.__setattr__(self, "cardinalities", cards)
        object.__setattr__(self, "data", data)

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_vars(self) -> int:
        return self.data.shape[1]

    @property
    def columns(self) -> list[np.ndarray]:
        return [self.data[:, i] for i in range(self.n_vars)]

    def column(self, i: int) -> np.ndarray:
        return self.data[:, i]

    def index_of(self, name: str) -> int:
        try:
            return self.variable_names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    @classmethod
    def from_array(cls, data, cardinalities=None, names=None) -> "Dataset":
        """Wrap an integer matrix; cardinalities default to ``max + 1`` per column."""
        data = np.asarray(data, dtype=np.int64)
        if data.ndim == 1:
            data = data[:, None]
        m = data.shape[1]
        if names is None:
            names = [f"X{i}" for i in range(m)]
        if cardinalities is None:
            cardinalities = _infer_cards(data)
        return cls(tuple(names), tuple(cardinalities), data)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.variable_names)
            w.writerows(self.data.tolist())


def _infer_cards(data: np.ndarray) -> list[int]:
    if data.shape[0] == 0:
        return [1] * data.shape[1]
    return [max(int(v) + 1, 1) for v in data.max(axis=0)]


def load_schema(path) -> dict[str, int]:
    """Read a ``name:cardinality`` sidecar, one entry per line."""
    schema = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, sep, card = line.rpartition(":")
            if not sep or not name.strip():
                raise DataFormatError(f"{path}:{lineno}: expected 'name:cardinality'")
            try:
                schema[name.strip()] = int(card)
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: cardinality {card.strip()!r} is not an integer") from None
    return schema


def load_csv(path, schema=None) -> Dataset:
    """Load an integer-coded CSV with a header row of variable names.

    ``schema`` may be a mapping ``name -> cardinality`` or the path of a
    sidecar file; when omitted, ``<path>.schema`` is used if it exists.
    Cardinalities not covered by a schema are inferred as ``max code + 1``.
    """
    path = Path(path)
    if schema is None:
        sidecar = path.with_name(path.name + ".schema")
        if sidecar.exists():
            schema = sidecar
    if schema is not None and not isinstance(schema, dict):
        schema = load_schema(schema)

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file (no header)") from None
        header = [h.strip() for h in header]
        rows = []
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([int(c) for c in row])
            except ValueError:
                bad = next(c for c in row if not _is_int(c))
                if bad.strip() in ("", "NA", "NaN", "nan", "?"):
                    raise DataFormatError(f"{path}:{lineno}: missing value") from None
                raise DataFormatError(f"{path}:{lineno}: non-integer cell {bad!r}") from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    data = np.array(rows, dtype=np.int64)
    if (data < 0).any():
        r, c = np.argwhere(data < 0)[0]
        raise DataFormatError(f"{path}:{r + 2}: negative code in column {header[c]!r}")
    cards = _infer_cards(data)
    if schema:
        unknown = set(schema) - set(header)
        if unknown:
            raise DataFormatError(f"schema names unknown columns: {sorted(unknown)}")
        for i, name in enumerate(header):
            if name in schema:
                if schema[name] < cards[i]:
                    raise DataFormatError(
                        f"column {name!r} has code {cards[i] - 1} but schema cardinality {schema[name]}")
                cards[i] = schema[name]
    return Dataset(tuple(header), tuple(cards), data)


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# NetworkModel
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NetworkModel:
    variable_names: tuple[str, ...]
    cardinalities: tuple[int, ...]
    parent_lists: tuple[tuple[int, ...], ...]
    cpts: tuple[np.ndarray, ...]
    state_names: tuple[tuple[str, ...], ...] | None = None
    order: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        m = len(self.variable_names)
        cards = tuple(int(c) for c in self.cardinalities)
        parents = tuple(tuple(int(p) for p in ps) for ps in self.parent_lists)
        if len(cards) != m or len(parents) != m or len(self.cpts) != m:
            raise NetworkFormatError("inconsistent number of variables")
        cpts = []
        for i, (ps, cpt) in enumerate(zip(parents, self.cpts)):
            if len(set(ps)) != len(ps) or i in ps or any(not 0 <= p < m for p in ps):
                raise NetworkFormatError(f"invalid parent list for {self.variable_names[i]!r}")
            q = int(np.prod([cards[p] for p in ps], dtype=np.int64))
            cpt = np.array(cpt, dtype=np.float64).reshape(q, cards[i])
            if (cpt < 0).any() or np.abs(cpt.sum(axis=1) - 1.0).max() > 1e-9:
                raise NetworkFormatError(
                    f"CPT rows of {self.variable_names[i]!r} are not probability vectors")
            cpt.setflags(write=False)
            cpts.append(cpt)
        object.__setattr__(self, "cardinalities", cards)
        object.__setattr__(self, "parent_lists", parents)
        object.__setattr__(self, "cpts", tuple(cpts))
        object.__setattr__(self, "order", tuple(topological_order(parents)))

    @property
    def n_vars(self) -> int:
        return len(self.variable_names)

    def edges(self) -> set[tuple[int, int]]:
        return {(p, i) for i, ps in enumerate(self.parent_lists) for p in ps}

    def children(self) -> list[set[int]]:
        ch = [set() for _ in range(self.n_vars)]
        for p, c in self.edges():
            ch[p].add(c)
        return ch

    def pc_set(self, i: int) -> set[int]:
        return set(self.parent_lists[i]) | self.children()[i]

    @classmethod
    def from_edges(cls, n, edges, cards, cpts=None, names=None, rng=None) -> "NetworkModel":
        """Build a model from an edge list; missing CPTs are drawn from ``rng`` (Dirichlet(1))."""
        parents = [sorted(p for p, c in edges if c == i) for i in range(n)]
        if names is None:
            names = [f"X{i}" for i in range(n)]
        if cpts is None:
            rng = np.random.default_rng(rng)
            cpts = []
            for i in range(n):
                q = int(np.prod([cards[p] for p in parents[i]], dtype=np.int64))
                cpts.append(rng.dirichlet(np.ones(cards[i]), size=q))
        return cls(tuple(names), tuple(cards), tuple(tuple(p) for p in parents), tuple(cpts))


def topological_order(parent_lists: Sequence[Sequence[int]]) -> list[int]:
    """Kahn's algorithm, smallest index first among ready nodes."""
    import heapq

    m = len(parent_lists)
    indeg = [len(ps) for ps in parent_lists]
    children = [[] for _ in range(m)]
    for c, ps in enumerate(parent_lists):
        for p in ps:
            children[p].append(c)
    ready = [i for i in range(m) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for c in children[i]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, c)
    if len(order) != m:
        raise CycleError(sorted(set(range(m)) - set(order)))
    return order


# ---------------------------------------------------------------------------
# BIF
# ---------------------------------------------------------------------------

_VAR_RE = re.compile(
    r"variable\s+(?P<name>[^\s{]+)\s*\{(?P<body>.*?)\}\s*(?=variable|probability|$)", re.S)
_TYPE_RE = re.compile(r"type\s+discrete\s*\[\s*(?P<k>\d+)\s*\]\s*\{(?P<states>[^}]*)\}", re.S)
_PROB_RE = re.compile(r"probability\s*\((?P<head>[^)]*)\)\s*\{(?P<body>[^}]*)\}", re.S)


def _read_text(path) -> str:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rt") as fh:
            return fh.read()
    return path.read_text()


def parse_bif(path, tol: float = 1e-6) -> NetworkModel:
    """Parse a BIF network file (plain or ``.gz``).

    State labels map to codes in declaration order.  Conditional rows are
    matched to parent configurations by label.  Rows must sum to one within
    ``tol`` and are renormalized exactly afterwards.
    """
    return parse_bif_string(_read_text(path), tol=tol, source=str(path))


def parse_bif_string(text: str, tol: float = 1e-6, source: str = "<string>") -> NetworkModel:
    text = re.sub(r"//[^\n]*", "", text)
    text = re.sub(r"/\*.*?\*/", "", text, flags=re.S)

    names, states = [], []
    for m in _VAR_RE.finditer(text):
        t = _TYPE_RE.search(m.group("body"))
        if t is None:
            raise NetworkFormatError(f"{source}: variable {m.group('name')!r} is not discrete")
        labels = [s.strip() for s in t.group("states").split(",") if s.strip()]
        if len(labels) != int(t.group("k")):
            raise NetworkFormatError(
                f"{source}: variable {m.group('name')!r} declares {t.group('k')} states but lists {len(labels)}")
        names.append(m.group("name"))
        states.append(tuple(labels))
    if not names:
        raise NetworkFormatError(f"{source}: no variables found")
    index = {n: i for i, n in enumerate(names)}
    if len(index) != len(names):
        raise NetworkFormatError(f"{source}: duplicate variable declarations")
    cards = [len(s) for s in states]

    parents: list[tuple[int, ...] | None] = [None] * len(names)
    cpts: list[np.ndarray | None] = [None] * len(names)
    for m in _PROB_RE.finditer(text):
        head = m.group("head").replace(",", " ")
        child_part, _, parent_part = head.partition("|")
        child = child_part.strip()
        pnames = parent_part.split()
        for v in [child, *pnames]:
            if v not in index:
                raise NetworkFormatError(f"{source}: probability block references unknown variable {v!r}")
        ci = index[child]
        if parents[ci] is not None:
            raise NetworkFormatError(f"{source}: duplicate probability block for {child!r}")
        ps = tuple(index[p] for p in pnames)
        r = cards[ci]
        pdims = [cards[p] for p in ps]
        q = int(np.prod(pdims, dtype=np.int64))
        cpt = np.full((q, r), np.nan)
        default = None
        for entry in m.group("body").split(";"):
            entry = entry.strip()
            if not entry:
                continue
            if entry.startswith("table"):
                vals = _floats(entry[5:], source, child)
                if len(vals) != q * r:
                    raise NetworkFormatError(f"{source}: table for {child!r} has {len(vals)} values, expected {q * r}")
                # BIF tables list the child state as the slowest index
                cpt[:] = np.asarray(vals).reshape(r, q).T
            elif entry.startswith("default"):
                default = _floats(entry[7:], source, child)
            elif entry.startswith("("):
                close = entry.index(")")
                labels = [s.strip() for s in entry[1:close].split(",")]
                vals = _floats(entry[close + 1:], source, child)
                if len(labels) != len(ps) or len(vals) != r:
                    raise NetworkFormatError(f"{source}: malformed row {entry!r} for {child!r}")
                try:
                    cfg = tuple(states[p].index(lab) for p, lab in zip(ps, labels))
                except ValueError:
                    raise NetworkFormatError(f"{source}: unknown state label in row {entry!r}") from None
                cpt[np.ravel_multi_index(cfg, pdims) if ps else 0] = vals
            # other entries (e.g. property lines) are ignored
        if default is not None:
            missing = np.isnan(cpt).any(axis=1)
            cpt[missing] = default
        if np.isnan(cpt).any():
            raise NetworkFormatError(f"{source}: incomplete CPT for {child!r}")
        sums = cpt.sum(axis=1)
        if (cpt < 0).any() or np.abs(sums - 1.0).max() > tol:
            raise NetworkFormatError(
                f"{source}: CPT rows of {child!r} do not sum to 1 (worst {sums[np.argmax(np.abs(sums - 1))]:.6g})")
        cpts[ci] = cpt / sums[:, None]
        parents[ci] = ps
    missing = [names[i] for i, p in enumerate(parents) if p is None]
    if missing:
        raise NetworkFormatError(f"{source}: no probability block for {missing}")
    topological_order(parents)  # raises CycleError
    return NetworkModel(tuple(names), tuple(cards), tuple(parents), tuple(cpts), tuple(states))


def _floats(s: str, source: str, child: str) -> list[float]:
    try:
        return [float(v) for v in s.replace(",", " ").split()]
    except ValueError:
        raise NetworkFormatError(f"{source}: non-numeric probability in block for {child!r}") from None


def write_bif(model: NetworkModel, path=None) -> str:
    """Serialize ``model`` in BIF; returns the text and writes it if ``path`` is given."""
    states = model.state_names or tuple(tuple(str(k) for k in range(c)) for c in model.cardinalities)
    out = io.StringIO()
    out.write("network unknown {\n}\n")
    for name, st in zip(model.variable_names, states):
        out.write(f"variable {name} {{\n  type discrete [ {len(st)} ] {{ {', '.join(st)} }};\n}}\n")
    for i, name in enumerate(model.variable_names):
        ps = model.parent_lists[i]
        cpt = model.cpts[i]
        if not ps:
            out.write(f"probability ( {name} ) {{\n  table {', '.join(repr(float(v)) for v in cpt[0])};\n}}\n")
            continue
        pn = ", ".join(model.variable_names[p] for p in ps)
        out.write(f"probability ( {name} | {pn} ) {{\n")
        pdims = [model.cardinalities[p] for p in ps]
        for j, cfg in enumerate(np.ndindex(*pdims)):
            labels = ", ".join(states[p][v] for p, v in zip(ps, cfg))
            out.write(f"  ({labels}) {', '.join(repr(float(v)) for v in cpt[j])};\n")
        out.write("}\n")
    text = out.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# Sampling and counting
# ---------------------------------------------------------------------------

def forward_sample(model: NetworkModel, n: int, seed: int) -> Dataset:
    """Ancestral sampling with numpy's PCG64 generator (``np.random.default_rng(seed)``).

    One block of ``n`` uniforms is drawn per variable in topological order,
    and each value is found by inverse-CDF lookup in its CPT row.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    m = model.n_vars
    data = np.zeros((n, m), dtype=np.int64)
    for i in model.order:
        ps = model.parent_lists[i]
        if ps:
            cfg = np.ravel_multi_index(tuple(data[:, p] for p in ps),
                                       [model.cardinalities[p] for p in ps])
        else:
            cfg = np.zeros(n, dtype=np.int64)
        cum = np.cumsum(model.cpts[i], axis=1)
        u = rng.random(n)
        vals = (u[:, None] >= cum[cfg]).sum(axis=1)
        data[:, i] = np.minimum(vals, model.cardinalities[i] - 1)
    return Dataset(model.variable_names, model.cardinalities, data)


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    variable_indices: tuple[int, ...]
    dims: tuple[int, ...]
    counts: np.ndarray  # flat, length prod(dims), C order over variable_indices

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def as_array(self) -> np.ndarray:
        return self.counts.reshape(self.dims) if self.dims else self.counts.reshape(())


def joint_index(ds: Dataset, vars: Sequence[int]) -> tuple[np.ndarray, int]:
    """Mixed-radix code of each row over ``vars`` (C order) and the number of codes."""
    idx = np.zeros(ds.n_samples, dtype=np.int64)
    size = 1
    for v in vars:
        card = ds.cardinalities[v]
        idx = idx * card + ds.data[:, v]
        size *= card
    return idx, size


def contingency_counts(ds: Dataset, vars: Sequence[int]) -> ContingencyTable:
    vars = tuple(int(v) for v in vars)
    if len(set(vars)) != len(vars):
        raise ValueError(f"duplicate variable index in {vars}")
    for v in vars:
        if not 0 <= v < ds.n_vars:
            raise IndexError(f"variable index {v} out of range for {ds.n_vars} variables")
    idx, size = joint_index(ds, vars)
    counts = np.bincount(idx, minlength=size).astype(np.int64)
    return ContingencyTable(vars, tuple(ds.cardinalities[v] for v in vars), counts)
