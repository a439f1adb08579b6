"""Discrete foliated complexes and their Hausdorff leaf spaces.

A :class:`FoliatedComplex` is a weighted graph whose vertices are labeled by
leaves. Edges inside a leaf are *tangential*, edges between leaves are
*transverse*. Accumulation of one leaf onto another is modeled by short
transverse edges, so every bound stated for a complex is a multiple of its
declared ``mesh``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .config import DEFAULTS
from .errors import NotSegmentLike, StructuralError
from .metric import FiniteMetricSpace, _adjacency, all_pairs_shortest
from .quotient import UnionFind, _block_min, collapse_classes

TANGENTIAL = "tangential"
TRANSVERSE = "transverse"
KINDS = (TANGENTIAL, TRANSVERSE)


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    length: float
    kind: str

    def as_tuple(self):
        return (self.u, self.v, self.length, self.kind)


@dataclass(frozen=True)
class FoliatedComplex:
    """Leaf-labeled weighted graph standing in for a foliated manifold.

    ``compact_leaves`` lists boundary or compact leaves; their vertices are
    exempt from the mesh contract (each other vertex needs a transverse
    neighbor within ``mesh``). ``leaf_tags`` is free-form provenance.
    """

    vertices: tuple[str, ...]
    leaf_of: Mapping[str, str]
    edges: tuple[Edge, ...]
    mesh: float
    compact_leaves: frozenset = frozenset()
    leaf_tags: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        verts = tuple(str(v) for v in self.vertices)
        if len(set(verts)) != len(verts):
            raise StructuralError("duplicate vertex ids")
        leaf_of = {}
        for v in verts:
            if v not in self.leaf_of:
                raise StructuralError(f"vertex {v!r} has no leaf")
            leaf_of[v] = str(self.leaf_of[v])
        extra = set(self.leaf_of) - set(verts)
        if extra:
            raise StructuralError(f"leaf_of names unknown vertices {sorted(extra)[:3]}")
        edges = []
        for e in self.edges:
            e = e if isinstance(e, Edge) else Edge(*e)
            u, v, length, kind = str(e.u), str(e.v), float(e.length), str(e.kind)
            if u not in leaf_of or v not in leaf_of:
                raise StructuralError(f"edge ({u!r},{v!r}) references an unknown vertex")
            if kind not in KINDS:
                raise StructuralError(f"edge ({u!r},{v!r}) has unknown kind {kind!r}")
            if not length > 0:
                raise StructuralError(f"edge ({u!r},{v!r}) has nonpositive length {length}")
            same = leaf_of[u] == leaf_of[v]
            if kind == TANGENTIAL and not same:
                raise StructuralError(f"tangential edge ({u!r},{v!r}) joins different leaves")
            if kind == TRANSVERSE and same:
                raise StructuralError(f"transverse edge ({u!r},{v!r}) stays inside leaf {leaf_of[u]!r}")
            edges.append(Edge(u, v, length, kind))
        if not self.mesh > 0:
            raise StructuralError("mesh must be positive")
        leaves = set(leaf_of.values())
        compact = frozenset(str(c) for c in self.compact_leaves)
        if compact - leaves:
            raise StructuralError(f"unknown compact leaves {sorted(compact - leaves)[:3]}")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "leaf_of", leaf_of)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "mesh", float(self.mesh))
        object.__setattr__(self, "compact_leaves", compact)
        object.__setattr__(self, "leaf_tags", {str(k): str(t) for k, t in self.leaf_tags.items()})

    @property
    def leaves(self) -> tuple[str, ...]:
        """Leaf ids in order of first vertex."""
        return tuple(dict.fromkeys(self.leaf_of[v] for v in self.vertices))

    def leaf_vertices(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {l: [] for l in self.leaves}
        for v in self.vertices:
            out[self.leaf_of[v]].append(v)
        return out

    def weighted_edges(self) -> list[tuple[str, str, float]]:
        return [(e.u, e.v, e.length) for e in self.edges]

    @property
    def connected(self) -> bool:
        if not self.vertices:
            return True
        n, _ = connected_components(_adjacency(self.vertices, self.weighted_edges()), directed=False)
        return n == 1

    def geodesic_table(self) -> np.ndarray:
        return all_pairs_shortest(self.vertices, self.weighted_edges(), "complex")


def check_complex(k: FoliatedComplex) -> list[str]:
    """Contract problems of ``k`` (empty when the complex is valid)."""
    problems = []
    if not k.connected:
        problems.append("underlying graph is disconnected")
    by_leaf = k.leaf_vertices()
    tangential: dict[str, list] = {l: [] for l in by_leaf}
    for e in k.edges:
        if e.kind == TANGENTIAL:
            tangential[k.leaf_of[e.u]].append((e.u, e.v, e.length))
    for leaf, verts in by_leaf.items():
        if len(verts) > 1:
            n, _ = connected_components(_adjacency(verts, tangential[leaf]), directed=False)
            if n != 1:
                problems.append(f"leaf {leaf!r} is not tangentially connected")
    near = {v: np.inf for v in k.vertices}
    for e in k.edges:
        if e.kind == TRANSVERSE:
            near[e.u] = min(near[e.u], e.length)
            near[e.v] = min(near[e.v], e.length)
    slack = 1e-12 * k.mesh
    for v in k.vertices:
        if k.leaf_of[v] not in k.compact_leaves and near[v] > k.mesh + slack:
            problems.append(f"vertex {v!r} has no transverse neighbor within mesh {k.mesh:g}")
    return problems


def validate_complex(k: FoliatedComplex) -> FoliatedComplex:
    problems = check_complex(k)
    if problems:
        raise StructuralError("; ".join(problems[:5]))
    return k


# -- leaf space -------------------------------------------------------------


@dataclass(frozen=True)
class HlsSpace:
    """Leaf space: a strict metric over leaf classes and the projection maps."""

    space: FiniteMetricSpace
    class_of_leaf: Mapping[str, str]
    class_of_vertex: Mapping[str, str]

    def members(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {c: [] for c in self.space.points}
        for leaf, c in self.class_of_leaf.items():
            out[c].append(leaf)
        return out


def leaf_distance_matrix(k: FoliatedComplex) -> FiniteMetricSpace:
    """Set distances between leaves (a symmetric table, not a metric)."""
    by_leaf = k.leaf_vertices()
    index = {v: i for i, v in enumerate(k.vertices)}
    groups = [[index[v] for v in verts] for verts in by_leaf.values()]
    D = k.geodesic_table()
    W = _block_min(D, groups)
    np.fill_diagonal(W, 0.0)
    return FiniteMetricSpace(tuple(by_leaf), np.minimum(W, W.T))


def hls(k: FoliatedComplex, zero_tol: float | None = None) -> HlsSpace:
    """Hausdorff leaf space of ``k``.

    The chain infimum over leaf sequences is a shortest-path problem on the
    complete leaf graph weighted by set distances; leaves at zero chain
    distance are then merged.
    """
    W = leaf_distance_matrix(k)
    if zero_tol is None:
        zero_tol = DEFAULTS["zero_rel_tol"] * W.diameter
    groups = [[i] for i in range(len(W))]
    names, D, members = collapse_classes(W.points, W.dist, groups, zero_tol)
    class_of_leaf = {W.points[i]: names[c] for c, g in enumerate(members) for i in g}
    class_of_vertex = {v: class_of_leaf[k.leaf_of[v]] for v in k.vertices}
    return HlsSpace(FiniteMetricSpace(tuple(names), D), class_of_leaf, class_of_vertex)


# -- warping ----------------------------------------------------------------


@dataclass(frozen=True)
class WarpSpec:
    """A basic function: one positive scale per leaf."""

    values: Mapping[str, float]

    def __post_init__(self):
        vals = {str(k): float(v) for k, v in self.values.items()}
        for leaf, v in vals.items():
            if not v > 0 or not np.isfinite(v):
                raise StructuralError(f"warp value for leaf {leaf!r} must be positive, got {v}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, k: FoliatedComplex, value: float) -> "WarpSpec":
        return cls({leaf: value for leaf in k.leaves})


def warp(k: FoliatedComplex, f: WarpSpec | Mapping[str, float]) -> FoliatedComplex:
    """Scale each tangential edge by the warp value of its leaf."""
    values = f.values if isinstance(f, WarpSpec) else WarpSpec(f).values
    missing = [leaf for leaf in k.leaves if leaf not in values]
    if missing:
        raise StructuralError(f"warp has no value for leaf {missing[0]!r}")
    edges = tuple(
        Edge(e.u, e.v, e.length * values[k.leaf_of[e.u]], e.kind) if e.kind == TANGENTIAL else e
        for e in k.edges
    )
    return FoliatedComplex(k.vertices, k.leaf_of, edges, k.mesh, k.compact_leaves, k.leaf_tags)


# -- gluing -----------------------------------------------------------------


def prefixed(k: FoliatedComplex, prefix: str) -> FoliatedComplex:
    """Copy of ``k`` with every vertex and leaf id prefixed."""
    if not prefix:
        return k
    return FoliatedComplex(
        tuple(prefix + v for v in k.vertices),
        {prefix + v: prefix + l for v, l in k.leaf_of.items()},
        tuple(Edge(prefix + e.u, prefix + e.v, e.length, e.kind) for e in k.edges),
        k.mesh,
        frozenset(prefix + c for c in k.compact_leaves),
        {prefix + l: t for l, t in k.leaf_tags.items()},
    )


def union_complexes(parts: Sequence[FoliatedComplex]) -> FoliatedComplex:
    """Disjoint union; ids must already be distinct."""
    verts: list[str] = []
    leaf_of: dict[str, str] = {}
    edges: list[Edge] = []
    compact: set[str] = set()
    tags: dict[str, str] = {}
    leaf_owner: dict[str, int] = {}
    for n, k in enumerate(parts):
        clash = set(k.leaf_of) & set(leaf_of)
        if clash:
            raise StructuralError(f"vertex id {sorted(clash)[0]!r} occurs in two complexes")
        for leaf in k.leaves:
            if leaf_owner.setdefault(leaf, n) != n:
                raise StructuralError(f"leaf id {leaf!r} occurs in two complexes")
        verts.extend(k.vertices)
        leaf_of.update(k.leaf_of)
        edges.extend(k.edges)
        compact |= k.compact_leaves
        tags.update(k.leaf_tags)
    mesh = max(k.mesh for k in parts)
    return FoliatedComplex(tuple(verts), leaf_of, tuple(edges), mesh, frozenset(compact), tags)


def merge_vertices(
    k: FoliatedComplex, pairs: Iterable[tuple[str, str]], mode: str = TANGENTIAL
) -> tuple[FoliatedComplex, dict[str, str], dict[str, str]]:
    """Identify vertex pairs of ``k``.

    Returns the merged complex together with the maps old vertex -> new
    vertex and old leaf -> new leaf (leaves that lose all their vertices are
    absent from the second map). Tangential mode merges the leaves of
    identified vertices and requires the identification to send leaves onto
    leaves. Transverse mode never merges leaves: a merged vertex keeps the
    leaf of its first representative and edges are re-typed accordingly.
    """
    if mode not in KINDS:
        raise StructuralError(f"unknown gluing mode {mode!r}")
    pairs = list(pairs)
    for a, b in pairs:
        for w in (a, b):
            if w not in k.leaf_of:
                raise StructuralError(f"gluing references unknown vertex {w!r}")

    vuf = UnionFind(k.vertices)
    for a, b in pairs:
        vuf.union(a, b)
    vgroups = vuf.groups(k.vertices)
    vmap = {v: g[0] for g in vgroups for v in g}

    luf = UnionFind(k.leaves)
    if mode == TANGENTIAL:
        image: dict[str, str] = {}
        for a, b in pairs:
            la, lb = k.leaf_of[a], k.leaf_of[b]
            if image.setdefault(la, lb) != lb:
                raise StructuralError(
                    f"gluing does not respect leaves: pair ({a!r},{b!r}) sends leaf {la!r} "
                    f"to {lb!r}, already sent to {image[la]!r}"
                )
            luf.union(la, lb)
        lgroups = luf.groups(k.leaves)
        lrep = {l: g[0] for g in lgroups for l in g}
        new_leaf_of = {g[0]: lrep[k.leaf_of[g[0]]] for g in vgroups}
    else:
        new_leaf_of = {g[0]: k.leaf_of[g[0]] for g in vgroups}

    best: dict[tuple[str, str, str], float] = {}
    for e in k.edges:
        u, v = vmap[e.u], vmap[e.v]
        if u == v:
            continue
        kind = TANGENTIAL if new_leaf_of[u] == new_leaf_of[v] else TRANSVERSE
        key = (u, v, kind) if u < v else (v, u, kind)
        if key not in best or e.length < best[key]:
            best[key] = e.length
    order = {v: i for i, v in enumerate(k.vertices)}
    edges = tuple(
        Edge(u, v, length, kind)
        for (u, v, kind), length in sorted(best.items(), key=lambda it: (order[it[0][0]], order[it[0][1]], it[0][2]))
    )
    new_vertices = tuple(g[0] for g in vgroups)
    surviving = set(new_leaf_of.values())
    if mode == TANGENTIAL:
        leaf_map = {l: lrep[l] for l in k.leaves}
    else:
        leaf_map = {l: l for l in k.leaves if l in surviving}
    compact = frozenset(leaf_map[c] for c in k.compact_leaves if c in leaf_map)
    tags: dict[str, str] = {}
    for l, t in k.leaf_tags.items():
        if l in leaf_map:
            tags.setdefault(leaf_map[l], t)
    merged = FoliatedComplex(new_vertices, new_leaf_of, edges, k.mesh, compact, tags)
    return merged, vmap, leaf_map


def glue_complexes(
    k1: FoliatedComplex,
    k2: FoliatedComplex,
    f: Mapping[str, str],
    mode: str = TANGENTIAL,
    prefixes: tuple[str, str] | None = None,
) -> FoliatedComplex:
    """Glue ``k2`` to ``k1`` by identifying ``v`` with ``f[v]``.

    ``f`` maps vertices of ``k1`` to vertices of ``k2`` (ids before any
    prefixing). The result is flagged through ``connected`` when ``f`` is
    empty.
    """
    if len(set(f.values())) != len(f):
        raise StructuralError("gluing map is not injective")
    p1, p2 = prefixes or ("", "")
    for a, b in f.items():
        if a not in k1.leaf_of:
            raise StructuralError(f"gluing domain vertex {a!r} is not in the first complex")
        if b not in k2.leaf_of:
            raise StructuralError(f"gluing image vertex {b!r} is not in the second complex")
    union = union_complexes([prefixed(k1, p1), prefixed(k2, p2)])
    merged, _, _ = merge_vertices(union, [(p1 + a, p2 + b) for a, b in f.items()], mode)
    return merged


def fuse_leaves(k: FoliatedComplex, leaves: Sequence[str]) -> FoliatedComplex:
    """Fuse the leaves met by a transversal into one compact leaf.

    ``leaves`` must be connected through transverse edges among themselves.
    This is the leaf-space effect of turbulizing along a closed transversal
    (or spinning along a transverse boundary component): the fused leaf
    carries the first id in ``leaves``.
    """
    leaves = list(dict.fromkeys(leaves))
    if not leaves:
        raise StructuralError("nothing to fuse")
    known = set(k.leaves)
    for leaf in leaves:
        if leaf not in known:
            raise StructuralError(f"unknown leaf {leaf!r}")
    chosen = set(leaves)
    uf = UnionFind(leaves)
    for e in k.edges:
        lu, lv = k.leaf_of[e.u], k.leaf_of[e.v]
        if e.kind == TRANSVERSE and lu in chosen and lv in chosen:
            uf.union(lu, lv)
    if len(uf.groups(leaves)) != 1:
        raise StructuralError("fused leaves are not joined by a transversal")
    target = leaves[0]
    leaf_of = {v: (target if l in chosen else l) for v, l in k.leaf_of.items()}
    edges = tuple(
        Edge(e.u, e.v, e.length, TANGENTIAL if leaf_of[e.u] == leaf_of[e.v] else TRANSVERSE)
        for e in k.edges
    )
    compact = frozenset(target if c in chosen else c for c in k.compact_leaves) | {target}
    tags = {l: t for l, t in k.leaf_tags.items() if l not in chosen or l == target}
    return FoliatedComplex(k.vertices, leaf_of, edges, k.mesh, compact, tags)


# -- segments ---------------------------------------------------------------


def segment_parameter(h: HlsSpace, base_class: str, tol: float | None = None) -> dict[str, float]:
    """Distance from ``base_class``, checked to be an isometry onto a segment.

    Raises :class:`NotSegmentLike` if two classes share a parameter value or
    if ``|d(a) - d(b)|`` differs from the class distance by more than ``tol``.
    """
    space = h.space
    b = space.index(base_class)
    if tol is None:
        tol = 1e-9 * max(space.diameter, 1e-300)
    values = space.dist[b]
    order = np.argsort(values, kind="stable")
    gaps = np.diff(values[order])
    if (gaps <= tol).any():
        i = int(np.flatnonzero(gaps <= tol)[0])
        p, q = space.points[order[i]], space.points[order[i + 1]]
        raise NotSegmentLike(f"not a segment-like HLS: classes {p!r} and {q!r} share d = {values[order[i]]:.6g}")
    err = np.abs(np.abs(values[:, None] - values[None, :]) - space.dist)
    if err.max() > tol:
        i, j = np.unravel_index(int(np.argmax(err)), err.shape)
        raise NotSegmentLike(
            f"not a segment-like HLS: |d({space.points[i]!r}) - d({space.points[j]!r})| misses "
            f"their distance by {err[i, j]:.3g}"
        )
    return {p: float(v) for p, v in zip(space.points, values)}
