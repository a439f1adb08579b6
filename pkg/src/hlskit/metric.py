"""Finite metric spaces, graph metrics, epsilon-nets and isometry search."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .config import DEFAULTS
from .errors import DisconnectedError, SearchBudgetError, StructuralError


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Points with a symmetric table of nonnegative distances.

    Only the structure is checked on construction (square, nonnegative, no
    NaN). Whether the table satisfies the metric axioms is the business of
    :func:`validate_metric`. ``+inf`` entries are allowed so that disconnected
    quotients can still be represented.
    """

    points: tuple[str, ...]
    dist: np.ndarray
    labels: Mapping[str, str] | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(str(p) for p in self.points)
        d = np.array(self.dist, dtype=float, copy=True)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise StructuralError(f"distance table must be square, got shape {d.shape}")
        if d.shape[0] != len(pts):
            raise StructuralError(f"{len(pts)} points but a {d.shape[0]}x{d.shape[0]} table")
        if len(set(pts)) != len(pts):
            raise StructuralError("duplicate point ids")
        if np.isnan(d).any():
            raise StructuralError("distance table contains NaN")
        if (d < 0).any():
            i, j = np.argwhere(d < 0)[0]
            raise StructuralError(f"negative distance d({pts[i]!r},{pts[j]!r}) = {d[i, j]}")
        d.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(pts)})
        if self.labels is not None:
            object.__setattr__(self, "labels", dict(self.labels))

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.points == other.points and np.array_equal(self.dist, other.dist)

    __hash__ = None

    def index(self, point: str) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise StructuralError(f"unknown point id {point!r}") from None

    def d(self, a: str, b: str) -> float:
        return float(self.dist[self.index(a), self.index(b)])

    @property
    def diameter(self) -> float:
        finite = self.dist[np.isfinite(self.dist)]
        return float(finite.max()) if finite.size else 0.0

    def subspace(self, ids: Iterable[str]) -> "FiniteMetricSpace":
        ids = list(ids)
        idx = [self.index(p) for p in ids]
        labels = None
        if self.labels is not None:
            labels = {p: self.labels[p] for p in ids if p in self.labels}
        return FiniteMetricSpace(tuple(ids), self.dist[np.ix_(idx, idx)], labels)

    def relabel(self, mapping: Mapping[str, str]) -> "FiniteMetricSpace":
        pts = tuple(mapping.get(p, p) for p in self.points)
        labels = None
        if self.labels is not None:
            labels = {mapping.get(p, p): t for p, t in self.labels.items()}
        return FiniteMetricSpace(pts, self.dist, labels)

    def permuted(self, order: Sequence[int]) -> "FiniteMetricSpace":
        order = list(order)
        return FiniteMetricSpace(
            tuple(self.points[i] for i in order), self.dist[np.ix_(order, order)], self.labels
        )


@dataclass(frozen=True)
class WeightedGraphSpace:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]

    def __post_init__(self):
        verts = tuple(str(v) for v in self.vertices)
        if len(set(verts)) != len(verts):
            raise StructuralError("duplicate vertex ids")
        known = set(verts)
        edges = []
        for u, v, length in self.edges:
            u, v, length = str(u), str(v), float(length)
            for w in (u, v):
                if w not in known:
                    raise StructuralError(f"edge references unknown vertex {w!r}")
            if not length > 0:
                raise StructuralError(f"edge ({u!r},{v!r}) has nonpositive length {length}")
            edges.append((u, v, length))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple(edges))


@dataclass
class Violation:
    axiom: str  # "diagonal" | "symmetry" | "separation" | "triangle"
    points: tuple[str, ...]
    amount: float

    def __str__(self):
        return f"{self.axiom} violated at {self.points} by {self.amount:.3g}"


@dataclass
class ValidationReport:
    mode: str
    tol: float
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_metric(
    space: FiniteMetricSpace,
    mode: str = "strict",
    tol: float | None = None,
    check_triangle: bool = True,
) -> ValidationReport:
    """Check the metric axioms, listing every violation with its witnesses.

    ``mode`` is ``"strict"`` (distinct points at positive distance) or
    ``"pseudo"``. ``tol`` defaults to ``tri_rel_tol`` times the diameter and
    is used as additive slack for symmetry and the triangle inequality.
    """
    if mode not in ("strict", "pseudo"):
        raise StructuralError(f"unknown validation mode {mode!r}")
    d = space.dist
    pts = space.points
    if tol is None:
        tol = DEFAULTS["tri_rel_tol"] * space.diameter
    out: list[Violation] = []

    for i in np.flatnonzero(np.diag(d) != 0):
        out.append(Violation("diagonal", (pts[i],), float(d[i, i])))
    asym = np.abs(d - d.T)
    with np.errstate(invalid="ignore"):
        bad = np.triu((asym > tol) | (np.isinf(d) != np.isinf(d.T)), 1)
    for i, j in np.argwhere(bad):
        out.append(Violation("symmetry", (pts[i], pts[j]), float(asym[i, j])))
    if mode == "strict":
        sep = np.triu(d <= 0, 1) | np.triu(d.T <= 0, 1)
        for i, j in np.argwhere(sep):
            out.append(Violation("separation", (pts[i], pts[j]), 0.0))
    if check_triangle:
        n = len(pts)
        with np.errstate(invalid="ignore"):
            for k in range(n):
                excess = d - (d[:, k, None] + d[None, k, :])
                hits = np.argwhere(excess > tol)
                for i, j in hits:
                    if i < j and k != i and k != j:
                        out.append(
                            Violation("triangle", (pts[i], pts[k], pts[j]), float(excess[i, j]))
                        )
    return ValidationReport(mode, float(tol), out)


def _adjacency(vertices: Sequence[str], edges: Iterable[tuple[str, str, float]]) -> csr_matrix:
    index = {v: i for i, v in enumerate(vertices)}
    best: dict[tuple[int, int], float] = {}
    for u, v, length in edges:
        a, b = index[u], index[v]
        if a == b:
            continue
        key = (a, b) if a < b else (b, a)
        if key not in best or length < best[key]:
            best[key] = length
    n = len(vertices)
    if not best:
        return csr_matrix((n, n))
    rows, cols = zip(*best)
    return csr_matrix((list(best.values()), (rows, cols)), shape=(n, n))


def all_pairs_shortest(vertices: Sequence[str], edges, what: str = "graph") -> np.ndarray:
    """Dense all-pairs shortest path lengths; raises on disconnection."""
    n = len(vertices)
    if n == 0:
        return np.zeros((0, 0))
    D = shortest_path(_adjacency(vertices, edges), method="D", directed=False)
    if np.isinf(D).any():
        i, j = np.argwhere(np.isinf(D))[0]
        raise DisconnectedError(vertices[i], vertices[j], what)
    return D


def geodesic_metric(g: WeightedGraphSpace) -> FiniteMetricSpace:
    """Shortest-path metric of a connected weighted graph."""
    D = all_pairs_shortest(g.vertices, g.edges)
    np.fill_diagonal(D, 0.0)
    return FiniteMetricSpace(g.vertices, np.minimum(D, D.T))


# -- epsilon nets -----------------------------------------------------------


@dataclass(frozen=True)
class EpsNet:
    host: FiniteMetricSpace
    members: tuple[str, ...]
    radius: float

    def __len__(self):
        return len(self.members)


def covering_radius(space: FiniteMetricSpace, members: Iterable[str]) -> float:
    idx = [space.index(m) for m in members]
    if not idx:
        return float("inf")
    return float(space.dist[:, idx].min(axis=1).max())


def _seed_start(n: int, seed: int) -> int:
    return int(np.random.default_rng(seed).integers(n))


def farthest_point_order(dist: np.ndarray, start: int, count: int) -> tuple[list[int], float]:
    """Greedy farthest-point sequence of ``count`` indices and its covering radius."""
    n = dist.shape[0]
    count = min(count, n)
    chosen = [start]
    reach = dist[start].copy()
    while len(chosen) < count:
        nxt = int(np.argmax(reach))
        if reach[nxt] <= 0:
            # everything is already covered at radius 0; pad with unchosen points
            rest = [i for i in range(n) if i not in set(chosen)]
            nxt = rest[0]
        chosen.append(nxt)
        reach = np.minimum(reach, dist[nxt])
    return chosen, float(reach.max())


def eps_net(
    space: FiniteMetricSpace, target_radius: float, seed: int = 0, start: str | None = None
) -> EpsNet:
    """Farthest-point net whose covering radius is at most ``target_radius``.

    The first member is drawn from ``seed`` unless ``start`` names it.
    """
    if not target_radius >= 0:
        raise StructuralError("target radius must be nonnegative")
    n = len(space)
    if n == 0:
        return EpsNet(space, (), 0.0)
    first = space.index(start) if start is not None else _seed_start(n, seed)
    chosen = [first]
    reach = space.dist[first].copy()
    while reach.max() > target_radius:
        nxt = int(np.argmax(reach))
        chosen.append(nxt)
        reach = np.minimum(reach, space.dist[nxt])
    return EpsNet(space, tuple(space.points[i] for i in chosen), float(reach.max()))


def k_net(space: FiniteMetricSpace, k: int, seed: int = 0) -> EpsNet:
    """Farthest-point net with exactly ``min(k, |space|)`` members."""
    n = len(space)
    chosen, radius = farthest_point_order(space.dist, _seed_start(n, seed), k)
    return EpsNet(space, tuple(space.points[i] for i in chosen), radius)


# -- isometry ---------------------------------------------------------------


def _profile_compatibility(Dx: np.ndarray, Dy: np.ndarray, tol: float) -> np.ndarray:
    px = np.sort(Dx, axis=1)
    py = np.sort(Dy, axis=1)
    n = Dx.shape[0]
    out = np.empty((n, n), dtype=bool)
    step = max(1, 4_000_000 // max(1, n * n))
    for s in range(0, n, step):
        gap = np.abs(px[s : s + step, None, :] - py[None, :, :]).max(axis=2)
        out[s : s + step] = gap <= tol
    return out


def find_isometry(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    tol: float = 0.0,
    cap: int | None = None,
    node_budget: int | None = None,
) -> dict[str, str] | None:
    """Search for a bijection ``x -> y`` distorting no distance by more than ``tol``.

    Branch and bound over assignments whose sorted distance profiles agree
    within ``tol``. The search is exhaustive for spaces of at most ``cap``
    points; larger ones get ``node_budget`` search nodes and raise
    :class:`SearchBudgetError` if that runs out undecided.
    """
    n = len(x)
    if n != len(y):
        return None
    if n == 0:
        return {}
    cap = DEFAULTS["iso_exhaustive_cap"] if cap is None else cap
    if node_budget is None:
        node_budget = DEFAULTS["iso_node_budget"]
    limit = None if n <= cap else node_budget

    Dx, Dy = x.dist, y.dist
    compat = _profile_compatibility(Dx, Dy, tol)
    counts = compat.sum(axis=1)
    if (counts == 0).any():
        return None
    # x points with few candidates first; ties by position
    order = sorted(range(n), key=lambda i: (counts[i], i))
    cand_lists = []
    for i in order:
        c = np.flatnonzero(compat[i])
        # try the same position first so aligned inputs resolve immediately
        c = sorted(c, key=lambda j: (j != i, j))
        cand_lists.append(np.array(c, dtype=int))

    assigned_x: list[int] = []
    assigned_y: list[int] = []
    used = np.zeros(n, dtype=bool)
    stack: list[tuple[np.ndarray, int]] = []
    nodes = 0

    def viable(depth: int) -> np.ndarray:
        i = order[depth]
        c = cand_lists[depth]
        c = c[~used[c]]
        if assigned_x and c.size:
            err = np.abs(Dx[i, assigned_x][None, :] - Dy[np.ix_(c, assigned_y)])
            c = c[(err <= tol).all(axis=1)]
        return c

    stack.append((viable(0), 0))
    while stack:
        cands, pos = stack[-1]
        depth = len(stack) - 1
        if pos >= cands.size:
            stack.pop()
            if assigned_x:
                assigned_x.pop()
                used[assigned_y.pop()] = False
            continue
        stack[-1] = (cands, pos + 1)
        j = int(cands[pos])
        nodes += 1
        if limit is not None and nodes > limit:
            raise SearchBudgetError(
                f"isometry search exceeded {limit} nodes on {n}-point spaces"
            )
        # undo the sibling assignment at this depth before trying j
        if len(assigned_x) > depth:
            assigned_x.pop()
            used[assigned_y.pop()] = False
        assigned_x.append(order[depth])
        assigned_y.append(j)
        used[j] = True
        if depth + 1 == n:
            return {x.points[a]: y.points[b] for a, b in zip(assigned_x, assigned_y)}
        stack.append((viable(depth + 1), 0))
    return None


def max_discrepancy(x: FiniteMetricSpace, y: FiniteMetricSpace, f: Mapping[str, str]) -> float:
    """Largest ``|d_x(a,b) - d_y(f(a),f(b))|`` over the domain of ``f``."""
    a = [x.index(p) for p in f]
    b = [y.index(f[p]) for p in f]
    if not a:
        return 0.0
    return float(np.abs(x.dist[np.ix_(a, a)] - y.dist[np.ix_(b, b)]).max())
