"""Partition trees of grid-aligned segments and their bookkeeping."""
from __future__ import annotations

import math
import shlex
from dataclasses import dataclass, field

import numpy as np

from ..circle import GridFunction
from ..measures import Interval, mean_on

__all__ = [
    "LEAF_CLASSES",
    "SegmentNode",
    "TraceRecord",
    "PartitionTree",
    "StellarSets",
    "potential",
    "imbalance",
    "telescoping_check",
    "classify_stellar",
    "basic_subtree",
    "stellar_energy",
    "stellar_energy_by_subtree",
    "level_mass",
    "format_trace",
    "parse_trace",
]

LEAF_CLASSES = ("small", "large", "AS", "BS", "FS", "forced")
STELLAR_MEAN = 1 / 100
STELLAR_CHAIN = 1 / 1000


@dataclass
class SegmentNode:
    id: int
    interval: Interval
    parent: int | None = None
    children: tuple[int, ...] = ()
    status: str = "alive"  # alive | leaf | split
    leaf_class: str | None = None
    depth: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.status == "leaf"

    @property
    def level(self) -> int | None:
        """``k`` with ``|I| = 2pi/2^k``, or ``None`` for non-dyadic lengths."""
        n, c = self.interval.n, self.interval.cells
        if n % c:
            return None
        ratio = n // c
        return ratio.bit_length() - 1 if ratio & (ratio - 1) == 0 else None


@dataclass
class TraceRecord:
    node: int
    interval: Interval
    rule: str
    values: dict = field(default_factory=dict)


class PartitionTree:
    """Forest of segments; children always tile their parent."""

    def __init__(self):
        self.nodes: list[SegmentNode] = []
        self.roots: list[int] = []
        self.trace: list[TraceRecord] = []

    def add_root(self, interval: Interval) -> int:
        node = SegmentNode(len(self.nodes), interval)
        self.nodes.append(node)
        self.roots.append(node.id)
        return node.id

    def split(self, node_id: int, cut: int) -> tuple[int, int]:
        """Split at grid index ``cut`` (strictly inside the segment)."""
        node = self.nodes[node_id]
        I = node.interval
        if not I.start < cut < I.stop:
            raise ValueError(f"cut {cut} not inside {I}")
        ids = []
        for sub in (I.sub(I.start, cut), I.sub(cut, I.stop)):
            child = SegmentNode(len(self.nodes), sub, parent=node_id, depth=node.depth + 1)
            self.nodes.append(child)
            ids.append(child.id)
        node.children = tuple(ids)
        node.status = "split"
        return ids[0], ids[1]

    def make_leaf(self, node_id: int, leaf_class: str):
        if leaf_class not in LEAF_CLASSES:
            raise ValueError(f"unknown leaf class {leaf_class!r}")
        node = self.nodes[node_id]
        node.status = "leaf"
        node.leaf_class = leaf_class

    def log(self, node_id: int, rule: str, **values):
        self.trace.append(TraceRecord(node_id, self.nodes[node_id].interval, rule, values))

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, node_id: int) -> SegmentNode:
        return self.nodes[node_id]

    def leaves(self, leaf_class: str | None = None) -> list[SegmentNode]:
        return [v for v in self.nodes if v.is_leaf and (leaf_class is None or v.leaf_class == leaf_class)]

    def internal(self) -> list[SegmentNode]:
        return [v for v in self.nodes if v.children]

    def descendants(self, node_id: int) -> list[int]:
        out, stack = [], [node_id]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(self.nodes[v].children)
        return out

    def check_tiling(self) -> bool:
        """Every split node is tiled by its children, and leaves tile the roots."""
        for v in self.nodes:
            if v.children:
                a, b = (self.nodes[c].interval for c in v.children)
                if not (a.start == v.interval.start and a.stop == b.start and b.stop == v.interval.stop):
                    return False
        frontier = sorted((v.interval.start, v.interval.stop) for v in self.nodes if not v.children)
        roots = sorted((self.nodes[r].interval.start, self.nodes[r].interval.stop) for r in self.roots)
        covered = sum(b - a for a, b in frontier)
        return covered == sum(b - a for a, b in roots) and all(
            x[1] <= y[0] for x, y in zip(frontier, frontier[1:]))


def potential(I: Interval, A: GridFunction) -> float:
    """``P_I = (E_I A)^2 |I|``."""
    return mean_on(I, A.real) ** 2 * I.length


def imbalance(tree: PartitionTree, node_id: int, A: GridFunction) -> float:
    """``D_I = |E_{I_1} A - E_{I_2} A|`` over the two recorded children."""
    node = tree[node_id]
    if len(node.children) != 2:
        raise ValueError(f"node {node_id} has no children; imbalance undefined")
    a, b = (tree[c].interval for c in node.children)
    return abs(mean_on(a, A.real) - mean_on(b, A.real))


def telescoping_check(tree: PartitionTree, root: int, A: GridFunction,
                      members: set[int] | None = None) -> tuple[float, float]:
    """Both sides of the telescoping identity on the subtree at ``root``.

    ``lhs = sum_internal |I|/4 D_I^2`` and ``rhs = sum_leaves P_I - P_root``;
    they agree exactly when every split halves its segment.
    ``members`` restricts to a sub-collection closed under taking parents
    (within the subtree); a member is internal when its children are members.
    """
    ids = tree.descendants(root) if members is None else members
    ids = set(ids)
    lhs = rhs = 0.0
    for v in ids:
        node = tree[v]
        if node.children and all(c in ids for c in node.children):
            lhs += node.interval.length / 4 * imbalance(tree, v, A) ** 2
        else:
            rhs += potential(node.interval, A)
    rhs -= potential(tree[root].interval, A)
    return lhs, rhs


@dataclass
class StellarSets:
    stellar: set[int]
    basic: set[int]
    final: set[int]


def classify_stellar(tree: PartitionTree, A: GridFunction) -> StellarSets:
    """Stellar, basic and final node sets, computed top-down."""
    stellar: set[int] = set()
    basic: set[int] = set()
    final: set[int] = set()
    stack = list(tree.roots)
    while stack:
        v = stack.pop()
        node = tree[v]
        mean = mean_on(node.interval, A.real)
        father_stellar = node.parent is not None and node.parent in stellar
        if mean >= STELLAR_MEAN or (mean >= STELLAR_CHAIN and father_stellar):
            stellar.add(v)
            if not father_stellar:
                basic.add(v)
        if node.is_leaf or (v not in stellar and father_stellar):
            final.add(v)
        stack.extend(node.children)
    return StellarSets(stellar, basic, final)


def basic_subtree(tree: PartitionTree, root: int, sets: StellarSets) -> set[int]:
    """``S_I``: the root plus every descendant whose father is stellar and in ``S_I``."""
    out, stack = set(), [root]
    while stack:
        v = stack.pop()
        out.add(v)
        if v in sets.stellar:
            stack.extend(tree[v].children)
    return out


def stellar_energy(tree: PartitionTree, A: GridFunction, sets: StellarSets | None = None) -> float:
    """``sum over stellar internal I of |I| D_I^2``."""
    sets = classify_stellar(tree, A) if sets is None else sets
    return float(sum(tree[v].interval.length * imbalance(tree, v, A) ** 2
                     for v in sets.stellar if tree[v].children))


def stellar_energy_by_subtree(tree: PartitionTree, A: GridFunction,
                              sets: StellarSets | None = None) -> dict[int, float]:
    """Energy of each basic subtree via telescoping, ``4 (sum_leaves P - P_root)``."""
    sets = classify_stellar(tree, A) if sets is None else sets
    out = {}
    for b in sorted(sets.basic):
        _, rhs = telescoping_check(tree, b, A, basic_subtree(tree, b, sets))
        out[b] = 4 * rhs
    return out


def level_mass(tree: PartitionTree, k: int, A: GridFunction, threshold: float = STELLAR_MEAN) -> float:
    """Total length of level-``k`` nodes whose mean of ``A`` exceeds ``threshold``."""
    return float(sum(v.interval.length for v in tree.nodes
                     if v.level == k and mean_on(v.interval, A.real) > threshold))


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


def format_trace(tree: PartitionTree) -> str:
    """Line-oriented trace: ``node=.. start=.. stop=.. n=.. rule=.. key=value ...``."""
    lines = []
    for rec in tree.trace:
        I = rec.interval
        parts = [f"node={rec.node}", f"start={I.start}", f"stop={I.stop}", f"n={I.n}", f"rule={rec.rule}"]
        parts += [f"{k}={shlex.quote(_fmt(v))}" for k, v in rec.values.items()]
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def _parse_value(s: str):
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    if s in ("True", "False"):
        return s == "True"
    return s


def parse_trace(text: str) -> list[TraceRecord]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        kv = dict(tok.split("=", 1) for tok in shlex.split(line))
        I = Interval(int(kv.pop("start")), int(kv.pop("stop")), int(kv.pop("n")))
        node, rule = int(kv.pop("node")), kv.pop("rule")
        out.append(TraceRecord(node, I, rule, {k: _parse_value(v) for k, v in kv.items()}))
    return out
