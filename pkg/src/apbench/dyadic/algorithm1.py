"""Stopping-time partition for an indicator function."""
from __future__ import annotations

import heapq
import logging

from ..circle import GridFunction
from ..measures import Interval, mean_on
from .tree import PartitionTree

__all__ = ["run_algorithm1", "LARGE_MEAN"]

log = logging.getLogger(__name__)

LARGE_MEAN = 1 / 10


def run_algorithm1(A: GridFunction, C: float, roots: list[Interval] | None = None) -> PartitionTree:
    """Halve segments until the mean of ``A`` is at most ``1/C^2`` (small leaf)
    or at least ``1/10`` (large leaf).

    Segments are processed longest first, leftmost among equal lengths.  A
    one-cell segment that still satisfies neither rule becomes a forced leaf,
    tagged by whichever threshold is nearer on a log scale, and is logged.
    """
    if not C > 1:
        raise ValueError(f"C must exceed 1, got {C}")
    small = 1 / C**2
    tree = PartitionTree()
    roots = [Interval(0, A.n, A.n)] if roots is None else roots
    heap = []
    for I in roots:
        v = tree.add_root(I)
        heapq.heappush(heap, (-I.cells, I.start, v))
    while heap:
        _, _, v = heapq.heappop(heap)
        I = tree[v].interval
        m = mean_on(I, A.real)
        if m <= small:
            tree.make_leaf(v, "small")
            tree.log(v, "small", mean=m)
        elif m >= LARGE_MEAN:
            tree.make_leaf(v, "large")
            tree.log(v, "large", mean=m)
        elif I.cells < 2:
            tag = "large" if m * m >= small * LARGE_MEAN else "small"
            tree.make_leaf(v, tag)
            tree.log(v, "forced", mean=m, tag=tag)
            log.warning("grid floor reached at %s (mean %.3g), forced %s leaf", I, m, tag)
        else:
            a, b = tree.split(v, I.start + I.cells // 2)
            tree.log(v, "split", mean=m)
            for c in (a, b):
                J = tree[c].interval
                heapq.heappush(heap, (-J.cells, J.start, c))
    return tree
