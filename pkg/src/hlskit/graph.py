"""Finite metric graphs: sampling, gluing, ball measures and extraction."""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import DisconnectedError, NotSegmentLike, StructuralError
from .foliation import HlsSpace, segment_parameter
from .metric import FiniteMetricSpace, WeightedGraphSpace, _adjacency, geodesic_metric
from .quotient import UnionFind


@dataclass(frozen=True)
class MetricGraph:
    """Nodes and positive-length edges; loops and multi-edges are allowed."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]

    def __post_init__(self):
        nodes = tuple(str(n) for n in self.nodes)
        if not nodes:
            raise StructuralError("a metric graph needs at least one node")
        if len(set(nodes)) != len(nodes):
            raise StructuralError("duplicate node ids")
        known = set(nodes)
        edges = []
        for u, v, length in self.edges:
            u, v, length = str(u), str(v), float(length)
            for w in (u, v):
                if w not in known:
                    raise StructuralError(f"edge references unknown node {w!r}")
            if not length > 0 or not math.isfinite(length):
                raise StructuralError(f"edge ({u!r},{v!r}) needs a positive length, got {length}")
            edges.append((u, v, length))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(edges))
        n, labels = connected_components(
            _adjacency(nodes, [(u, v, 1.0) for u, v, _ in edges]), directed=False
        )
        if n > 1:
            a = nodes[0]
            b = nodes[int(np.flatnonzero(labels != labels[0])[0])]
            raise DisconnectedError(a, b, "metric graph")

    def degree(self) -> dict[str, int]:
        """Edge ends at each node; a loop counts twice."""
        deg = {n: 0 for n in self.nodes}
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    @property
    def total_length(self) -> float:
        return sum(length for _, _, length in self.edges)

    @classmethod
    def path(cls, k: int, length: float = 1.0) -> "MetricGraph":
        nodes = tuple(f"p{i}" for i in range(k + 1))
        return cls(nodes, tuple((nodes[i], nodes[i + 1], length) for i in range(k)))

    @classmethod
    def star(cls, k: int, length: float = 1.0) -> "MetricGraph":
        nodes = ("hub",) + tuple(f"s{i}" for i in range(k))
        return cls(nodes, tuple(("hub", f"s{i}", length) for i in range(k)))

    @classmethod
    def cycle(cls, k: int, length: float = 1.0) -> "MetricGraph":
        nodes = tuple(f"c{i}" for i in range(k))
        return cls(nodes, tuple((nodes[i], nodes[(i + 1) % k], length) for i in range(k)))

    @classmethod
    def theta(cls, length: float = 1.0) -> "MetricGraph":
        return cls(("a", "b"), tuple(("a", "b", length) for _ in range(3)))


def point_label(edge: int, k: int, parts: int) -> str:
    return f"edge:{edge}:{k}/{parts}"


def sample_graph(g: MetricGraph, step: float) -> FiniteMetricSpace:
    """Subdivide every edge into ``ceil(length/step)`` equal parts.

    Points are the nodes plus the interior subdivision points, with the
    geodesic metric of the subdivided graph. Labels record positions as
    ``node:<id>`` or ``edge:<index>:<k>/<parts>``.
    """
    if not step > 0:
        raise StructuralError("sampling step must be positive")
    vertices = list(g.nodes)
    labels = {n: f"node:{n}" for n in g.nodes}
    edges = []
    for ei, (u, v, length) in enumerate(g.edges):
        parts = max(1, math.ceil(length / step - 1e-12))
        piece = length / parts
        chain = [u]
        for k in range(1, parts):
            pid = f"e{ei}.{k}"
            vertices.append(pid)
            labels[pid] = point_label(ei, k, parts)
            chain.append(pid)
        chain.append(v)
        for a, b in zip(chain, chain[1:]):
            if a == b:
                continue
            edges.append((a, b, piece))
    space = geodesic_metric(WeightedGraphSpace(tuple(vertices), tuple(edges)))
    return FiniteMetricSpace(space.points, space.dist, labels)


def sample_positions(space: FiniteMetricSpace) -> dict[str, tuple]:
    """Position of each sample point: ``("node", id)`` or ``("edge", index, Fraction)``."""
    out = {}
    for p, label in (space.labels or {}).items():
        kind, _, rest = label.partition(":")
        if kind == "node":
            out[p] = ("node", rest)
        elif kind == "edge":
            ei, frac = rest.split(":")
            out[p] = ("edge", int(ei), Fraction(frac))
    return out


def matched_points(a: FiniteMetricSpace, b: FiniteMetricSpace) -> list[tuple[str, str]]:
    """Pair each point of sample ``a`` with the point of ``b`` nearest it on the same edge.

    Both spaces must be samples of one graph. The pairing is injective when
    ``b`` subdivides every edge at least as finely as ``a``.
    """
    pos_b = sample_positions(b)
    nodes = {pos[1]: q for q, pos in pos_b.items() if pos[0] == "node"}
    parts: dict[int, int] = {}
    on_edge: dict[tuple[int, int], str] = {}
    for q, label in (b.labels or {}).items():
        if label.startswith("edge:"):
            _, ei, frac = label.split(":")
            k, total = (int(t) for t in frac.split("/"))
            parts[int(ei)] = total
            on_edge[(int(ei), k)] = q
    out = []
    for p, pos in sample_positions(a).items():
        if pos[0] == "node":
            out.append((p, nodes[pos[1]]))
            continue
        ei, t = pos[1], pos[2]
        total = parts.get(ei, 1)
        k = math.floor(t * total + Fraction(1, 2))
        if k == 0 or k == total:
            raise StructuralError(f"sample point {p!r} has no interior partner on edge {ei}")
        out.append((p, on_edge[(ei, k)]))
    return out


def glue_graphs(
    g1: MetricGraph,
    g2: MetricGraph,
    pairs: Iterable[tuple[str, str]],
    prefixes: tuple[str, str] | None = None,
) -> MetricGraph:
    """Union of two graphs with the node pairs ``(a in g1, b in g2)`` identified.

    Identified classes keep the id of their first ``g1`` member. Ids shared by
    both graphs are an error unless ``prefixes`` disambiguate them.
    """
    p1, p2 = prefixes or ("", "")
    n1 = [p1 + n for n in g1.nodes]
    n2 = [p2 + n for n in g2.nodes]
    if set(n1) & set(n2):
        raise StructuralError(f"node id {sorted(set(n1) & set(n2))[0]!r} occurs in both graphs")
    uf = UnionFind(n1 + n2)
    for a, b in pairs:
        if a not in g1.nodes:
            raise StructuralError(f"dangling node id {a!r} (not in the first graph)")
        if b not in g2.nodes:
            raise StructuralError(f"dangling node id {b!r} (not in the second graph)")
        uf.union(p1 + a, p2 + b)
    rep = {n: grp[0] for grp in uf.groups(n1 + n2) for n in grp}
    nodes = tuple(dict.fromkeys(rep[n] for n in n1 + n2))
    edges = [(rep[p1 + u], rep[p1 + v], l) for u, v, l in g1.edges]
    edges += [(rep[p2 + u], rep[p2 + v], l) for u, v, l in g2.edges]
    return MetricGraph(nodes, tuple(edges))


# -- ball measures ------------------------------------------------------------


def _node_distances(g: MetricGraph, center) -> tuple[np.ndarray, int | None, float]:
    """Distances from ``center`` to every node.

    ``center`` is a node id or ``(edge index, offset from the edge's first node)``.
    Returns the distances plus the center's edge and offset (``None`` for a node).
    """
    index = {n: i for i, n in enumerate(g.nodes)}
    verts = list(g.nodes)
    edges = [(u, v, l) for u, v, l in g.edges]
    on_edge, offset = None, 0.0
    if isinstance(center, str):
        src = index[center]
    else:
        on_edge, offset = int(center[0]), float(center[1])
        u, v, l = g.edges[on_edge]
        if not 0 <= offset <= l:
            raise StructuralError(f"offset {offset} outside edge {on_edge} of length {l}")
        verts.append("__center__")
        src = len(verts) - 1
        for w, dist in ((u, offset), (v, l - offset)):
            if dist > 0:
                edges.append(("__center__", w, dist))
            else:
                src = index[w]
    D = dijkstra(_adjacency(verts, edges), directed=False, indices=src)
    return D[: len(g.nodes)], on_edge, offset


def _union_length(intervals: list[tuple[float, float]]) -> float:
    total, cur_a, cur_b = 0.0, None, None
    for a, b in sorted(i for i in intervals if i[1] > i[0]):
        if cur_b is None or a > cur_b:
            if cur_b is not None:
                total += cur_b - cur_a
            cur_a, cur_b = a, b
        else:
            cur_b = max(cur_b, b)
    if cur_b is not None:
        total += cur_b - cur_a
    return total


def ball_measure(g: MetricGraph, center, eta: float) -> float:
    """Lebesgue length of the open ball ``B(center, eta)``, computed exactly."""
    dn, on_edge, offset = _node_distances(g, center)
    index = {n: i for i, n in enumerate(g.nodes)}
    total = 0.0
    for ei, (u, v, l) in enumerate(g.edges):
        du, dv = dn[index[u]], dn[index[v]]
        pieces = [(0.0, min(l, eta - du)), (max(0.0, l - (eta - dv)), l)]
        if ei == on_edge:
            pieces.append((max(0.0, offset - eta), min(l, offset + eta)))
        total += _union_length(pieces)
    return total


@dataclass
class MeasureReport:
    beta: float
    eta0: float
    min_ratio: float
    max_ratio: float
    samples: int
    worst_low: tuple
    worst_high: tuple

    @property
    def passed(self) -> bool:
        return self.min_ratio >= 1 / self.beta - 1e-12 and self.max_ratio <= self.beta + 1e-12


def measure_ball_check(g: MetricGraph) -> MeasureReport:
    """Check ``eta/beta <= mu(B(x, eta)) <= beta*eta`` on a grid of centers.

    ``beta = max(2, max degree)`` and ``eta0 = min edge length / 2``; centers
    are all nodes plus the midpoint and quarter points of every edge, radii
    ``eta0/2, eta0/4, eta0/8``.
    """
    if not g.edges:
        raise StructuralError("measure check needs at least one edge")
    beta = float(max(2, max(g.degree().values())))
    eta0 = 0.5 * min(l for _, _, l in g.edges)
    centers: list = list(g.nodes)
    for ei, (_, _, l) in enumerate(g.edges):
        centers += [(ei, 0.25 * l), (ei, 0.5 * l), (ei, 0.75 * l)]
    lo, hi = np.inf, -np.inf
    worst_low = worst_high = ()
    count = 0
    for c in centers:
        for eta in (eta0 / 2, eta0 / 4, eta0 / 8):
            ratio = ball_measure(g, c, eta) / eta
            count += 1
            if ratio < lo:
                lo, worst_low = ratio, (c, eta)
            if ratio > hi:
                hi, worst_high = ratio, (c, eta)
    return MeasureReport(beta, eta0, float(lo), float(hi), count, worst_low, worst_high)


# -- extraction from a leaf space -------------------------------------------------


def extract_graph(
    h: HlsSpace,
    decomposition: Sequence[tuple[Iterable[str], str]],
    tol: float,
) -> MetricGraph:
    """Read a metric graph off a leaf space, given its node/segment regions.

    Node regions (HLS diameter at most ``tol``) become nodes. Segment regions
    must parametrize isometrically onto a segment (checked at the default
    relative tolerance of :func:`segment_parameter`); each becomes an edge whose
    length is the region's diameter, attached at both extreme classes to the
    nearest node region within ``tol``. An end with no node region that close
    gets a new degree-one node.
    """
    space = h.space
    regions = [(list(r), kind) for r, kind in decomposition]
    seen: dict[str, int] = {}
    for n, (r, kind) in enumerate(regions):
        if kind not in ("node", "segment"):
            raise StructuralError(f"region {n} has unknown kind {kind!r}")
        if not r:
            raise StructuralError(f"region {n} is empty")
        for c in r:
            space.index(c)
            if c in seen:
                raise StructuralError(f"class {c!r} lies in regions {seen[c]} and {n}")
            seen[c] = n
    if len(seen) != len(space):
        missing = [c for c in space.points if c not in seen]
        raise StructuralError(f"regions do not cover class {missing[0]!r}")

    nodes: list[str] = []
    node_idx: list[list[int]] = []
    for n, (r, kind) in enumerate(regions):
        if kind != "node":
            continue
        idx = [space.index(c) for c in r]
        diam = space.dist[np.ix_(idx, idx)].max()
        if diam > tol:
            raise StructuralError(f"node region {n} has diameter {diam:.4g} > tolerance {tol:.4g}")
        nodes.append(f"v{n}")
        node_idx.append(idx)
    edges = []
    for n, (r, kind) in enumerate(regions):
        if kind != "segment":
            continue
        idx = [space.index(c) for c in r]
        sub = space.dist[np.ix_(idx, idx)]
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        length = float(sub[i, j])
        if length <= 0:
            raise StructuralError(f"segment region {n} has zero length")
        region_space = HlsSpace(space.subspace(r), {}, {})
        try:
            segment_parameter(region_space, r[i])
        except NotSegmentLike as exc:
            raise StructuralError(f"segment region {n}: {exc}") from None
        ends = []
        for side, end in enumerate((idx[i], idx[j])):
            gaps = [space.dist[end, nid].min() for nid in node_idx]
            if gaps and min(gaps) <= tol:
                ends.append(nodes[int(np.argmin(gaps))])
            else:
                # a free end becomes its own degree-one node
                nodes.append(f"v{n}.{side}")
                ends.append(nodes[-1])
        edges.append((ends[0], ends[1], length))
    return MetricGraph(tuple(nodes), tuple(edges))
