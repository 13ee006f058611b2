"""Fixture generators: indicator sets, smooth pairs and random dyadic trees."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..circle import CircleGrid, GridFunction, Spectrum, synthesize
from ..dyadic import PartitionTree
from ..lemma_lt import PolynomialPair, load_pair
from ..measures import Interval
from .config import ConfigError, ExperimentConfig

__all__ = [
    "single_interval",
    "union_of_intervals",
    "fat_cantor",
    "bump_pair",
    "pair_functions",
    "random_halving_tree",
    "indicator_fixture",
    "pair_fixture",
]


def _mask_to_function(grid: CircleGrid, mask: np.ndarray) -> GridFunction:
    return grid.function(mask.astype(float))


def single_interval(grid: CircleGrid, C: float, offset: float = 0.0) -> GridFunction:
    """Indicator of an arc of length ``pi/C`` (rounded to cells) starting at ``offset``."""
    cells = max(1, round(grid.n / (2 * C)))
    start = round(offset / grid.step) % grid.n
    mask = np.zeros(grid.n, dtype=bool)
    mask[:cells] = True
    return _mask_to_function(grid, np.roll(mask, start))


def union_of_intervals(grid: CircleGrid, spans) -> GridFunction:
    """Indicator of a union of arcs ``[lo, hi)`` given in radians."""
    mask = np.zeros(grid.n, dtype=bool)
    for lo, hi in spans:
        I = Interval.from_angles(lo, hi, grid.n)
        mask[I.start:I.stop] = True
    return _mask_to_function(grid, mask)


def fat_cantor(grid: CircleGrid, C: float, stages: int = 5, offset: float = 0.0) -> GridFunction:
    """Smith-Volterra-Cantor type set of measure close to ``pi/C``.

    Stage ``j`` removes the middle ``4^-j`` fraction of every piece; the base
    arc is sized so that the surviving measure is ``pi/C`` before rounding.
    Pieces shorter than two cells are kept whole.
    """
    keep = math.prod(1 - 4.0**-j for j in range(1, stages + 1))
    base = max(2, round(grid.n / (2 * C) / keep))
    if base > grid.n:
        raise ConfigError("fat Cantor base arc exceeds the circle")
    pieces = [(0, base)]
    for j in range(1, stages + 1):
        nxt = []
        for a, b in pieces:
            L = b - a
            g = round(L * 4.0**-j)
            if g < 1 or L - g < 2:
                nxt.append((a, b))
                continue
            left = (L - g) // 2
            nxt += [(a, a + left), (a + left + g, b)]
        pieces = nxt
    mask = np.zeros(grid.n, dtype=bool)
    for a, b in pieces:
        mask[a:b] = True
    return _mask_to_function(grid, np.roll(mask, round(offset / grid.step) % grid.n))


def bump_pair(grid: CircleGrid, height: float = 0.03, width: float = 0.05, osc: float = 0.3,
              center: float = 2.0) -> tuple[GridFunction, GridFunction]:
    """``A`` a small periodic Gaussian bump, ``B = 1 + osc cos 3x``."""
    x = grid.points
    d = np.angle(np.exp(1j * (x - center)))  # periodic distance
    A = grid.function(height * np.exp(-(d / width) ** 2))
    B = grid.function(1 + osc * np.cos(3 * x))
    return A, B


def pair_functions(pair: PolynomialPair, grid: CircleGrid) -> tuple[GridFunction, GridFunction]:
    """``(1 - P, 1 - Q)`` sampled on ``grid``."""
    if max(pair.P.degree, pair.Q.degree) >= grid.n // 2:
        raise ConfigError("grid too coarse for the polynomial degrees")
    one = Spectrum.from_dict({0: 1})
    return synthesize(one - pair.P, grid), synthesize(one - pair.Q, grid)


def random_halving_tree(rng: np.random.Generator, n: int, max_depth: int = 8,
                        split_prob: float = 0.7) -> PartitionTree:
    """Random tree on the full circle; every split halves its segment."""
    tree = PartitionTree()
    stack = [tree.add_root(Interval(0, n, n))]
    while stack:
        v = stack.pop()
        I = tree[v].interval
        if tree[v].depth < max_depth and I.cells >= 2 and (tree[v].depth == 0 or rng.random() < split_prob):
            stack.extend(tree.split(v, I.start + I.cells // 2))
        else:
            tree.make_leaf(v, "small")
    return tree


def indicator_fixture(cfg: ExperimentConfig, grid: CircleGrid, C: float) -> tuple[GridFunction, str]:
    fx = cfg.fixture
    kind = fx["kind"]
    offset = float(fx.get("offset", 0.0))
    if kind == "interval":
        return single_interval(grid, C, offset), f"interval length pi/{C:g} at {offset:g}"
    if kind == "intervals":
        spans = fx.get("spans")
        if not spans:
            raise ConfigError("fixture 'intervals' needs a non-empty 'spans' list")
        return union_of_intervals(grid, spans), f"{len(spans)} intervals"
    if kind == "fat_cantor":
        stages = int(fx.get("stages", 5))
        return fat_cantor(grid, C, stages, offset), f"fat Cantor, {stages} stages"
    raise ConfigError(f"fixture kind {kind!r} does not give an indicator")


def pair_fixture(cfg: ExperimentConfig, grid: CircleGrid) -> tuple[GridFunction, GridFunction, PolynomialPair | None]:
    """``(A, B)`` on ``grid`` and the polynomial pair when the fixture has one."""
    fx = cfg.fixture
    if fx["kind"] == "pair":
        try:
            pair = load_pair(Path(fx["P"]), Path(fx["Q"]))
        except (KeyError, OSError, ValueError) as exc:
            raise ConfigError(f"cannot load polynomial pair: {exc}") from exc
        A, B = pair_functions(pair, grid)
        return A, B, pair
    if fx["kind"] == "bump_pair":
        A, B = bump_pair(grid, cfg.get("bump_height"), cfg.get("bump_width"), cfg.get("osc_amplitude"),
                         float(fx.get("center", 2.0)))
        return A, B, None
    raise ConfigError(f"fixture kind {fx['kind']!r} does not give a pair")
