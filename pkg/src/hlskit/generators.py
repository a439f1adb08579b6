"""Example foliations as discrete complexes, and graph realization.

Every generator returns a complex satisfying :func:`check_complex`. Lengths
are chosen so that each bound the examples are known for (segment leaf
space, single-point leaf space) holds at a multiple of ``mesh``.
"""

from __future__ import annotations

import math
from typing import Any

from .errors import StructuralError
from .foliation import (
    TANGENTIAL,
    TRANSVERSE,
    Edge,
    FoliatedComplex,
    merge_vertices,
    prefixed,
    union_complexes,
)
from .graph import MetricGraph

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def product_ibundle(d: float, n: int, m: int, spacing: float | None = None, prefix: str = "") -> FoliatedComplex:
    """Product I-bundle ``[0, d] x fiber``: ``n`` leaves of ``m`` vertices.

    Leaf ``L{i}`` sits at parameter ``i*d/(n-1)``; rungs of length ``mesh``
    join consecutive leaves at every fiber position. Tangential spacing
    defaults to ``mesh``. The two end leaves are compact.
    """
    if not d > 0 or n < 2 or m < 1:
        raise StructuralError("product I-bundle needs d > 0, n >= 2 leaves, m >= 1 vertices")
    mesh = d / (n - 1)
    spacing = mesh if spacing is None else float(spacing)
    if not spacing > 0:
        raise StructuralError("tangential spacing must be positive")
    vid = lambda i, j: f"v{i}_{j}"  # noqa: E731
    vertices = tuple(vid(i, j) for i in range(n) for j in range(m))
    leaf_of = {vid(i, j): f"L{i}" for i in range(n) for j in range(m)}
    edges = []
    for i in range(n):
        for j in range(m):
            if j + 1 < m:
                edges.append(Edge(vid(i, j), vid(i, j + 1), spacing, TANGENTIAL))
            if i + 1 < n:
                edges.append(Edge(vid(i, j), vid(i + 1, j), mesh, TRANSVERSE))
    tags = {f"L{i}": f"param:{i}/{n - 1}" for i in range(n)}
    k = FoliatedComplex(vertices, leaf_of, tuple(edges), mesh, frozenset({"L0", f"L{n - 1}"}), tags)
    return prefixed(k, prefix)


def kronecker_torus(r: int, winding: int | None = None, prefix: str = "") -> FoliatedComplex:
    """Linear foliation of the unit torus with golden-ratio slope.

    ``r`` leaves start at heights ``i/r`` on a meridian and wind ``winding``
    times (default ``2r``). Vertices are the crossings with the meridian;
    consecutive crossings of a leaf are joined tangentially by one turn of
    the line, and neighboring crossings of different leaves along the
    meridian are joined transversely. Every leaf passes within the crossing
    gap of every other.
    """
    if r < 2:
        raise StructuralError("Kronecker torus needs r >= 2 leaves")
    w = 2 * r if winding is None else int(winding)
    if w < 1:
        raise StructuralError("winding must be positive")
    turn = math.sqrt(1.0 + GOLDEN**2)
    points = []  # (height, leaf, t)
    for i in range(r):
        for t in range(w + 1):
            points.append(((i / r + GOLDEN * t) % 1.0, i, t))
    vertices = tuple(f"k{i}_{t}" for _, i, t in sorted(points, key=lambda p: (p[1], p[2])))
    leaf_of = {f"k{i}_{t}": f"K{i}" for _, i, t in points}
    edges = [Edge(f"k{i}_{t}", f"k{i}_{t + 1}", turn, TANGENTIAL) for i in range(r) for t in range(w)]
    ring = sorted(points)
    size = len(ring)
    for a in range(size):
        h, i, t = ring[a]
        for step in range(1, size):
            h2, i2, t2 = ring[(a + step) % size]
            if i2 != i:
                gap = (h2 - h) % 1.0
                if gap > 0:
                    edges.append(Edge(f"k{i}_{t}", f"k{i2}_{t2}", gap, TRANSVERSE))
                break
    k = FoliatedComplex(vertices, leaf_of, tuple(edges), 1.0 / r, frozenset(), {f"K{i}": "kronecker" for i in range(r)})
    return prefixed(k, prefix)


def reeb_annulus(r: int, prefix: str = "") -> FoliatedComplex:
    """Reeb annulus: a compact boundary leaf and ``r`` spiralling interior leaves.

    The boundary leaf ``B`` is a cycle of ``r`` vertices (circumference 1).
    Interior leaf ``I{j}`` is a path of ``r + 1`` vertices, one per angle
    ``k/r``, whose radial offset ``(j+1)/r * (1 - k/(r+1))`` shrinks as it
    winds, so its last vertex lies within ``(j+1)/(r(r+1)) <= 1/r`` of ``B``.
    """
    if r < 2:
        raise StructuralError("Reeb annulus needs r >= 2")
    h = 1.0 / r
    radius = lambda j, k: (j + 1) * h * (1.0 - k / (r + 1))  # noqa: E731
    vertices = [f"b{k}" for k in range(r)]
    leaf_of = {f"b{k}": "B" for k in range(r)}
    edges = [Edge(f"b{k}", f"b{(k + 1) % r}", h, TANGENTIAL) for k in range(r)]
    for j in range(r):
        for k in range(r + 1):
            v = f"i{j}_{k}"
            vertices.append(v)
            leaf_of[v] = f"I{j}"
            if k:
                edges.append(Edge(f"i{j}_{k - 1}", v, h, TANGENTIAL))
            below = f"b{k % r}" if j == 0 else f"i{j - 1}_{k}"
            edges.append(Edge(v, below, radius(j, k) - (radius(j - 1, k) if j else 0.0), TRANSVERSE))
        if j:
            edges.append(Edge(f"i{j}_{r}", "b0", radius(j, r), TRANSVERSE))
    tags = {"B": "reeb:boundary", **{f"I{j}": "reeb:interior" for j in range(r)}}
    k = FoliatedComplex(tuple(vertices), leaf_of, tuple(edges), h, frozenset({"B"}), tags)
    return prefixed(k, prefix)


def star_block(k: int, r: int, fiber: int = 3, prefix: str = "") -> FoliatedComplex:
    """Block with ``k`` compact boundary leaves and a one-point leaf space.

    Boundary leaf ``B{a}`` is a path of ``fiber`` vertices with spacing
    ``1/r``. Each of the ``r`` interior leaves ``I{j}`` has one contact vertex
    per boundary leaf, at transverse distance ``(j+1)/(r(r+1))`` from it, and
    interior leaves are stacked ``1/(r(r+1))`` apart, so every interior leaf
    accumulates on every boundary leaf within mesh.
    """
    if k < 1 or r < 1 or fiber < 1:
        raise StructuralError("star block needs k >= 1, r >= 1, fiber >= 1")
    h = 1.0 / r
    gap = 1.0 / (r * (r + 1))
    vertices: list[str] = []
    leaf_of: dict[str, str] = {}
    edges: list[Edge] = []
    for a in range(k):
        for j in range(fiber):
            v = f"b{a}_{j}"
            vertices.append(v)
            leaf_of[v] = f"B{a}"
            if j:
                edges.append(Edge(f"b{a}_{j - 1}", v, h, TANGENTIAL))
    for j in range(r):
        for a in range(k):
            v = f"c{j}_{a}"
            vertices.append(v)
            leaf_of[v] = f"I{j}"
            if a:
                edges.append(Edge(f"c{j}_{a - 1}", v, h, TANGENTIAL))
            edges.append(Edge(v, f"b{a}_0", (j + 1) * gap, TRANSVERSE))
            if j:
                edges.append(Edge(v, f"c{j - 1}_{a}", gap, TRANSVERSE))
    compact = frozenset(f"B{a}" for a in range(k))
    tags = {**{f"B{a}": f"star:boundary:{a}" for a in range(k)}, **{f"I{j}": "star:interior" for j in range(r)}}
    block = FoliatedComplex(tuple(vertices), leaf_of, tuple(edges), h, compact, tags)
    return prefixed(block, prefix)


FAMILIES = {
    "ProductIBundle": product_ibundle,
    "KroneckerTorus": kronecker_torus,
    "ReebAnnulus": reeb_annulus,
    "StarBlock": star_block,
}


def generate(family: str, **params: Any) -> FoliatedComplex:
    """Build a named example: ``ProductIBundle(d, n, m)``, ``KroneckerTorus(r)``,
    ``ReebAnnulus(r)`` or ``StarBlock(k, r)``."""
    try:
        build = FAMILIES[family]
    except KeyError:
        raise StructuralError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    try:
        return build(**params)
    except TypeError as exc:
        raise StructuralError(f"bad parameters for {family}: {exc}") from None


def realize_graph(g: MetricGraph, r: int, fiber: int = 3) -> FoliatedComplex:
    """Foliated complex whose leaf space is isometric to ``g`` up to mesh.

    Nodes of degree at least two (or an isolated node) become star blocks
    with one boundary leaf per incident edge end; each edge of length ``d``
    becomes a product I-bundle with ``ceil(d*r) + 1`` leaves. End leaves are
    glued tangentially onto the boundary leaves of the blocks they meet;
    ends at degree-one nodes stay free. Leaf tags record provenance as
    ``node:<id>`` or ``edge:<index>:<i>/<n-1>``.
    """
    if r < 1:
        raise StructuralError("resolution must be positive")
    deg = g.degree()
    node_pos = {n: i for i, n in enumerate(g.nodes)}
    blocks = {}
    for n in g.nodes:
        if deg[n] >= 2 or deg[n] == 0:
            blocks[n] = star_block(max(deg[n], 1), r, fiber, prefix=f"n{node_pos[n]}.")
    bundles = []
    for ei, (u, v, length) in enumerate(g.edges):
        leaves = max(2, math.ceil(length * r - 1e-9) + 1)
        bundles.append(product_ibundle(length, leaves, fiber, prefix=f"e{ei}."))

    slot = {n: 0 for n in g.nodes}
    pairs = []
    for ei, (u, v, _) in enumerate(g.edges):
        last = len(bundles[ei].leaves) - 1
        for node, i in ((u, 0), (v, last)):
            if node not in blocks:
                continue
            a = slot[node]
            slot[node] += 1
            p = f"n{node_pos[node]}."
            pairs += [(f"{p}b{a}_{j}", f"e{ei}.v{i}_{j}") for j in range(fiber)]

    union = union_complexes(list(blocks.values()) + bundles)
    merged, _, leaf_map = merge_vertices(union, pairs, TANGENTIAL)

    tags: dict[str, str] = {}
    for ei, bundle in enumerate(bundles):
        last = len(bundle.leaves) - 1
        for i in range(last + 1):
            tags.setdefault(leaf_map[f"e{ei}.L{i}"], f"edge:{ei}:{i}/{last}")
    for n, block in blocks.items():
        for leaf in block.leaves:
            tags.setdefault(leaf_map[leaf], f"node:{n}")
    return FoliatedComplex(
        merged.vertices, merged.leaf_of, merged.edges, merged.mesh, merged.compact_leaves, tags
    )


def realization_pairs(g: MetricGraph, h, k: FoliatedComplex, sample) -> list[tuple[str, str]]:
    """Pairs (leaf-space class, sample point) read off the leaf provenance tags.

    ``h`` is the leaf space of ``k = realize_graph(g, ...)`` and ``sample``
    comes from :func:`sample_graph`. Each tagged leaf is sent to the sample
    point nearest its position on ``g``.
    """
    parts: dict[int, int] = {}
    for label in (sample.labels or {}).values():
        if label.startswith("edge:"):
            _, ei, frac = label.split(":")
            parts[int(ei)] = int(frac.split("/")[1])
    out = []
    for leaf, tag in k.leaf_tags.items():
        kind, _, rest = tag.partition(":")
        if kind == "node":
            point = rest
        elif kind == "edge":
            ei, frac = rest.split(":")
            ei = int(ei)
            i, last = (int(t) for t in frac.split("/"))
            p = parts.get(ei, 1)
            step = round(i / last * p)
            u, v, _ = g.edges[ei]
            point = u if step == 0 else v if step == p else f"e{ei}.{step}"
        else:
            continue
        out.append((h.class_of_leaf[leaf], point))
    return out


def realization_regions(h, k: FoliatedComplex) -> list[tuple[list[str], str]]:
    """Node/segment decomposition of ``h = hls(k)`` read off the provenance tags.

    Block leaves form one node region per graph node and each bundle forms a
    segment region. Free bundle ends at degree-one nodes stay in their
    segment; extraction turns them into nodes.
    """
    regions: dict[tuple[str, str], set[str]] = {}
    for leaf, tag in k.leaf_tags.items():
        kind, _, rest = tag.partition(":")
        if kind == "node":
            key = ("node", rest)
        elif kind == "edge":
            key = ("segment", rest.split(":")[0])
        else:
            continue
        regions.setdefault(key, set()).add(h.class_of_leaf[leaf])
    taken: set[str] = set()
    out = []
    for (kind, _), classes in sorted(regions.items(), key=lambda kv: kv[0][0]):
        # node regions first, so a class shared with a segment stays a node
        fresh = sorted(classes - taken)
        taken |= classes
        if fresh:
            out.append((fresh, kind))
    return out
