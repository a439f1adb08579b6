"""Quotient pseudometrics, gluing, collapse and orbit quotients.

All constructions reduce to one computation: close the relation into
classes, weight each pair of classes by the smallest distance between their
members, take shortest paths over the class graph and finally merge classes
that end up at (numerically) zero distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .config import DEFAULTS
from .errors import StructuralError
from .metric import FiniteMetricSpace


class UnionFind:
    """Disjoint sets over arbitrary hashable keys, with path halving."""

    def __init__(self, items: Iterable[Hashable] = ()):
        self.parent: dict = {}
        self.rank: dict = {}
        for it in items:
            self.add(it)

    def add(self, item):
        if item not in self.parent:
            self.parent[item] = item
            self.rank[item] = 0

    def find(self, item):
        self.add(item)
        parent = self.parent
        while parent[item] != item:
            parent[item] = parent[parent[item]]
            item = parent[item]
        return item

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True

    def groups(self, order: Sequence) -> list[list]:
        """Classes listed by first appearance in ``order``, members in order."""
        by_root: dict = {}
        for it in order:
            by_root.setdefault(self.find(it), []).append(it)
        return list(by_root.values())


@dataclass(frozen=True)
class QuotientResult:
    """A quotient space over class ids plus the projection of original points.

    A class is named after its first member in the input order.
    """

    space: FiniteMetricSpace
    class_map: Mapping[str, str]

    @property
    def connected(self) -> bool:
        return bool(np.isfinite(self.space.dist).all())

    def members(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {c: [] for c in self.space.points}
        for p, c in self.class_map.items():
            out[c].append(p)
        return out


def floyd_warshall(W: np.ndarray) -> np.ndarray:
    D = np.array(W, dtype=float, copy=True)
    for k in range(D.shape[0]):
        np.minimum(D, D[:, k, None] + D[None, k, :], out=D)
    return D


def _block_min(D: np.ndarray, groups: list[list[int]]) -> np.ndarray:
    """Smallest entry of ``D`` between each pair of index groups."""
    perm = [i for g in groups for i in g]
    starts = np.cumsum([0] + [len(g) for g in groups[:-1]])
    P = D[np.ix_(perm, perm)]
    P = np.minimum.reduceat(P, starts, axis=0)
    return np.minimum.reduceat(P, starts, axis=1)


def collapse_classes(
    ids: Sequence[str],
    weights: np.ndarray,
    groups: list[list[int]],
    zero_tol: float,
) -> tuple[list[str], np.ndarray, list[list[int]]]:
    """Chain-infimum metric on ``groups`` of ``ids`` with zero-distance merging.

    Returns the surviving class names, their distance table and the member
    indices of each class (indices into ``ids``).
    """
    if not groups:
        return [], np.zeros((0, 0)), []
    W = _block_min(weights, groups)
    np.fill_diagonal(W, 0.0)
    W = np.minimum(W, W.T)
    D = floyd_warshall(W)
    while True:
        uf = UnionFind(range(len(groups)))
        for i, j in np.argwhere(np.triu(D <= zero_tol, 1)):
            uf.union(int(i), int(j))
        merged = uf.groups(range(len(groups)))
        if len(merged) == len(groups):
            break
        groups = [sorted(m for g in block for m in groups[g]) for block in merged]
        D = _block_min(D, merged)
        np.fill_diagonal(D, 0.0)
        D = floyd_warshall(D)
    # order classes by their first original member
    order = sorted(range(len(groups)), key=lambda g: groups[g][0])
    groups = [groups[g] for g in order]
    D = D[np.ix_(order, order)]
    np.fill_diagonal(D, 0.0)
    return [ids[g[0]] for g in groups], D, groups


def _zero_tol(space: FiniteMetricSpace, zero_tol: float | None) -> float:
    if zero_tol is None:
        return DEFAULTS["zero_rel_tol"] * space.diameter
    return float(zero_tol)


def quotient_metric(
    space: FiniteMetricSpace,
    pairs: Iterable[tuple[str, str]] = (),
    zero_tol: float | None = None,
) -> QuotientResult:
    """Quotient of ``space`` by the equivalence relation generated by ``pairs``."""
    uf = UnionFind(range(len(space)))
    for a, b in pairs:
        uf.union(space.index(a), space.index(b))
    groups = uf.groups(range(len(space)))
    names, D, members = collapse_classes(space.points, space.dist, groups, _zero_tol(space, zero_tol))
    class_map = {space.points[i]: names[c] for c, g in enumerate(members) for i in g}
    return QuotientResult(FiniteMetricSpace(tuple(names), D), class_map)


def disjoint_union(
    x: FiniteMetricSpace, y: FiniteMetricSpace, tags: tuple[str, str] = ("x", "y")
) -> FiniteMetricSpace:
    """Disjoint union with infinite cross distances; ids become ``tag:id``."""
    n, m = len(x), len(y)
    D = np.full((n + m, n + m), np.inf)
    D[:n, :n] = x.dist
    D[n:, n:] = y.dist
    pts = tuple(f"{tags[0]}:{p}" for p in x.points) + tuple(f"{tags[1]}:{p}" for p in y.points)
    return FiniteMetricSpace(pts, D)


def glue(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    f: Mapping[str, str],
    tags: tuple[str, str] = ("x", "y"),
    zero_tol: float | None = None,
) -> QuotientResult:
    """Glue ``x`` and ``y`` along the bijection ``f: A -> B``.

    Result ids carry the tags of :func:`disjoint_union`. When ``f`` is empty
    the result is disconnected (``connected`` is False) and cross distances
    stay infinite.
    """
    if len(set(f.values())) != len(f):
        raise StructuralError("gluing map is not injective")
    for a, b in f.items():
        x.index(a)
        y.index(b)
    z = disjoint_union(x, y, tags)
    if zero_tol is None:
        zero_tol = DEFAULTS["zero_rel_tol"] * max(x.diameter, y.diameter)
    pairs = [(f"{tags[0]}:{a}", f"{tags[1]}:{b}") for a, b in f.items()]
    return quotient_metric(z, pairs, zero_tol)


def collapse_subset(
    space: FiniteMetricSpace, subset: Iterable[str], zero_tol: float | None = None
) -> QuotientResult:
    """Identify all points of ``subset`` to a single point."""
    subset = list(subset)
    if not subset:
        raise StructuralError("cannot collapse an empty subset")
    first = subset[0]
    return quotient_metric(space, [(first, s) for s in subset[1:]] + [(first, first)], zero_tol)


def orbits(space: FiniteMetricSpace, generators: Iterable[Mapping[str, str]]) -> list[list[str]]:
    """Orbits of the group generated by point permutations, in point order."""
    uf = UnionFind(space.points)
    pts = set(space.points)
    for n, g in enumerate(generators):
        if set(g) != pts or set(g.values()) != pts or len(g) != len(pts):
            raise StructuralError(f"generator {n} is not a bijection of the point set")
        for a, b in g.items():
            uf.union(a, b)
    return uf.groups(space.points)


def orbit_quotient(
    space: FiniteMetricSpace,
    generators: Iterable[Mapping[str, str]],
    zero_tol: float | None = None,
) -> QuotientResult:
    """Quotient by the orbits of a group acting on the points."""
    pairs = [(o[0], p) for o in orbits(space, generators) for p in o[1:]]
    return quotient_metric(space, pairs, zero_tol)
