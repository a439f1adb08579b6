"""Gromov-Hausdorff distance between finite metric spaces.

Everything here works with correspondences: relations between the two point
sets that cover both sides. Half the distortion of any correspondence is an
upper bound; the minimum over all of them is the distance itself.

Estimators put their inputs in a canonical order (by a content hash) before
doing any seeded work, so swapping the arguments gives identical numbers.
"""

from __future__ import annotations

import hashlib
import itertools
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import DEFAULTS, threads
from .errors import OracleCapError, StructuralError
from .metric import FiniteMetricSpace, covering_radius, farthest_point_order, k_net, max_discrepancy


@dataclass(frozen=True)
class Correspondence:
    """A covering relation between the points of two spaces."""

    pairs: tuple[tuple[str, str], ...]
    distortion: float

    def flipped(self) -> "Correspondence":
        return Correspondence(tuple((b, a) for a, b in self.pairs), self.distortion)

    def to_json(self):
        return {"pairs": [list(p) for p in self.pairs], "distortion": self.distortion}


@dataclass(frozen=True)
class GhEstimate:
    lower: float
    upper: float
    method: str
    witness: object = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 <= self.lower <= self.upper):
            raise ValueError(f"inconsistent estimate: lower={self.lower}, upper={self.upper}")

    def to_json(self):
        w = self.witness
        if isinstance(w, Correspondence):
            w = w.to_json()
        return {"lower": self.lower, "upper": self.upper, "method": self.method, "witness": w}


def _require_finite(*spaces: FiniteMetricSpace):
    for s in spaces:
        if len(s) == 0:
            raise StructuralError("Gromov-Hausdorff distance needs nonempty spaces")
        if not np.isfinite(s.dist).all():
            raise StructuralError("Gromov-Hausdorff distance needs finite distances (connected spaces)")


def _content_key(s: FiniteMetricSpace) -> bytes:
    h = hashlib.sha256()
    h.update(len(s).to_bytes(8, "little"))
    h.update(np.ascontiguousarray(s.dist, dtype=float).tobytes())
    h.update("\x00".join(s.points).encode())
    return h.digest()


def _canonical(x, y) -> bool:
    """True when ``(x, y)`` should be swapped before seeded work."""
    return _content_key(x) > _content_key(y)


def distortion_idx(Dx: np.ndarray, Dy: np.ndarray, px: np.ndarray, py: np.ndarray) -> float:
    if len(px) == 0:
        return 0.0
    return float(np.abs(Dx[np.ix_(px, px)] - Dy[np.ix_(py, py)]).max())


def distortion(x: FiniteMetricSpace, y: FiniteMetricSpace, pairs: Iterable[tuple[str, str]]) -> float:
    pairs = list(pairs)
    px = np.array([x.index(a) for a, _ in pairs], dtype=int)
    py = np.array([y.index(b) for _, b in pairs], dtype=int)
    return distortion_idx(x.dist, y.dist, px, py)


def correspondence(
    x: FiniteMetricSpace, y: FiniteMetricSpace, pairs: Iterable[tuple[str, str]], complete: bool = False
) -> Correspondence:
    """Check (or, with ``complete``, repair) that ``pairs`` covers both spaces.

    Completion adds, for each uncovered point, the partner that raises the
    distortion the least.
    """
    _require_finite(x, y)
    pairs = list(dict.fromkeys((str(a), str(b)) for a, b in pairs))
    px = [x.index(a) for a, _ in pairs]
    py = [y.index(b) for _, b in pairs]
    for side, space, used in (("x", x, px), ("y", y, py)):
        missing = sorted(set(range(len(space))) - set(used))
        if missing and not complete:
            raise StructuralError(f"relation misses point {space.points[missing[0]]!r} of {side}")
    Dx, Dy = x.dist, y.dist
    for i in sorted(set(range(len(x))) - set(px)):
        if px:
            cost = np.abs(Dx[i, px][None, :] - Dy[:, py]).max(axis=1)
            j = int(np.argmin(cost))
        else:
            j = 0
        px.append(i)
        py.append(j)
        pairs.append((x.points[i], y.points[j]))
    for j in sorted(set(range(len(y))) - set(py)):
        cost = np.abs(Dx[:, px] - Dy[j, py][None, :]).max(axis=1)
        i = int(np.argmin(cost))
        px.append(i)
        py.append(j)
        pairs.append((x.points[i], y.points[j]))
    d = distortion_idx(Dx, Dy, np.array(px), np.array(py))
    return Correspondence(tuple(pairs), d)


# -- lower bounds -----------------------------------------------------------


def _eccentricities(s: FiniteMetricSpace) -> np.ndarray:
    return s.dist.max(axis=1)


def lower_bounds(x: FiniteMetricSpace, y: FiniteMetricSpace) -> float:
    """Largest of the cheap lower bounds.

    * half the diameter gap;
    * half the Hausdorff distance between the two sets of eccentricities
      (a pair ``(a, b)`` of a correspondence with distortion ``t`` has
      ``|ecc a - ecc b| <= t``).
    """
    _require_finite(x, y)
    ex, ey = np.sort(_eccentricities(x)), np.sort(_eccentricities(y))
    diam = abs(ex[-1] - ey[-1]) / 2
    gap = np.abs(ex[:, None] - ey[None, :])
    ecc = max(gap.min(axis=1).max(), gap.min(axis=0).max()) / 2
    return float(max(diam, ecc, 0.0))


# -- exact oracle -----------------------------------------------------------


def _exact_masks(Dx: np.ndarray, Dy: np.ndarray):
    n, m = len(Dx), len(Dy)
    N = n * m
    ii, jj = np.divmod(np.arange(N), m)
    G = np.abs(Dx[np.ix_(ii, ii)] - Dy[np.ix_(jj, jj)])
    masks = np.arange(1 << N, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(N)) & 1).astype(bool)
    dist = np.zeros(1 << N)
    for b in range(N):
        lo = 1 << b
        sub = masks[:lo]
        row = np.where(bits[:lo, :b], G[b, :b], 0.0).max(axis=1) if b else np.zeros(lo)
        dist[lo : 2 * lo] = np.maximum(dist[sub], row)
    total = np.ones(1 << N, dtype=bool)
    for i in range(n):
        total &= bits[:, i * m : (i + 1) * m].any(axis=1)
    for j in range(m):
        total &= bits[:, j::m].any(axis=1)
    valid = np.flatnonzero(total)
    best = valid[np.argmin(dist[valid])]
    pairs = [(int(ii[k]), int(jj[k])) for k in range(N) if bits[best, k]]
    return float(dist[best]), pairs


def gh_exact(
    x: FiniteMetricSpace, y: FiniteMetricSpace, cap: int | None = None, witness: bool = False
):
    """Exact distance by enumerating every correspondence.

    Refuses when ``|x| * |y|`` exceeds ``cap`` (default 16); use
    :func:`gh_estimate` for larger inputs.
    """
    _require_finite(x, y)
    cap = DEFAULTS["gh_exact_cap"] if cap is None else cap
    if len(x) * len(y) > cap:
        raise OracleCapError(
            f"|x|*|y| = {len(x) * len(y)} exceeds the exact cap {cap}; use gh_estimate instead"
        )
    swap = _canonical(x, y)
    a, b = (y, x) if swap else (x, y)
    dis, idx = _exact_masks(a.dist, b.dist)
    value = dis / 2
    if not witness:
        return value
    c = Correspondence(tuple((a.points[i], b.points[j]) for i, j in idx), dis)
    return value, (c.flipped() if swap else c)


# -- net bound -------------------------------------------------------------


def _match_exhaustive(Da: np.ndarray, Db: np.ndarray) -> tuple[np.ndarray, float]:
    k = len(Da)
    perms = np.array(list(itertools.permutations(range(k))), dtype=int)
    best_p, best = None, np.inf
    for chunk in np.array_split(perms, max(1, len(perms) // 5000)):
        sub = Db[chunk[:, :, None], chunk[:, None, :]]
        err = np.abs(sub - Da[None]).reshape(len(chunk), -1).max(axis=1)
        i = int(np.argmin(err))
        if err[i] < best:
            best, best_p = float(err[i]), chunk[i]
    return best_p, best


def _greedy_extend(Da, Db, anchor_a: int, anchor_b: int, order: Sequence[int]) -> np.ndarray:
    k = len(Da)
    perm = -np.ones(k, dtype=int)
    perm[anchor_a] = anchor_b
    used = np.zeros(len(Db), dtype=bool)
    used[anchor_b] = True
    done = [anchor_a]
    for a in order:
        if perm[a] >= 0:
            continue
        cost = np.abs(Db[:, perm[done]] - Da[a, done][None, :]).max(axis=1)
        cost[used] = np.inf
        b = int(np.argmin(cost))
        perm[a] = b
        used[b] = True
        done.append(a)
    return perm


def _swap_search(Da, Db, perm: np.ndarray, max_rounds: int = 200) -> tuple[np.ndarray, float]:
    perm = perm.copy()

    def score(p):
        E = np.abs(Da - Db[np.ix_(p, p)])
        return E.max(), E.sum(), E

    cur_max, cur_sum, E = score(perm)
    for _ in range(max_rounds):
        i, j = np.unravel_index(int(np.argmax(E)), E.shape)
        improved = False
        for s in (int(i), int(j)):
            best = None
            for t in range(len(perm)):
                if t == s:
                    continue
                q = perm.copy()
                q[s], q[t] = q[t], q[s]
                mx, sm, Eq = score(q)
                if (mx, sm) < (cur_max, cur_sum) and (best is None or (mx, sm) < best[:2]):
                    best = (mx, sm, Eq, q)
            if best is not None:
                cur_max, cur_sum, E, perm = best
                improved = True
                break
        if not improved:
            break
    return perm, float(cur_max)


def match_nets(Da: np.ndarray, Db: np.ndarray, anchors: int = 3) -> tuple[np.ndarray, float]:
    """Bijection between two equal-size point sets minimizing max discrepancy.

    Exhaustive up to ``net_exhaustive_k`` points; otherwise greedy extension
    from several anchor pairs followed by a pairwise-swap local search.
    """
    k = len(Da)
    if k <= DEFAULTS["net_exhaustive_k"]:
        return _match_exhaustive(Da, Db)
    best_p, best = None, np.inf
    for a in range(min(anchors, k)):
        order, _ = farthest_point_order(Da, a, k)
        for b in range(k):
            p = _greedy_extend(Da, Db, a, b, order)
            err = float(np.abs(Da - Db[np.ix_(p, p)]).max())
            if err < best:
                best, best_p = err, p
    return _swap_search(Da, Db, best_p)


def gromov_net_bound(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    k: int | None = None,
    seed: int = 0,
    pairs: Sequence[tuple[str, str]] | None = None,
) -> GhEstimate:
    """Upper bound ``3 * max(r_X, r_Y, delta)`` from matched farthest-point nets.

    ``k`` defaults to the smaller space size and is clamped to it with a
    warning when larger. Passing ``pairs`` uses those matched nets instead
    of searching: their members form the nets and the pairing is the
    bijection.
    """
    _require_finite(x, y)
    if pairs is not None:
        return _given_nets(x, y, list(pairs))
    if k is not None and k < 1:
        raise StructuralError("net size must be at least 1")
    limit = min(len(x), len(y))
    if k is None:
        k = limit
    elif k > limit:
        warnings.warn(f"net size {k} clamped to {limit}", stacklevel=2)
        k = limit
    swap = _canonical(x, y)
    a, b = (y, x) if swap else (x, y)
    na, nb = k_net(a, k, seed), k_net(b, k, seed)
    ia = [a.index(p) for p in na.members]
    ib = [b.index(p) for p in nb.members]
    perm, delta = match_nets(a.dist[np.ix_(ia, ia)], b.dist[np.ix_(ib, ib)])
    eps = max(na.radius, nb.radius, delta)
    matched = [(na.members[i], nb.members[perm[i]]) for i in range(k)]
    if swap:
        matched = [(q, p) for p, q in matched]
        rx, ry = nb.radius, na.radius
    else:
        rx, ry = na.radius, nb.radius
    lower = min(lower_bounds(x, y), 3 * eps)
    return GhEstimate(
        lower,
        3 * eps,
        "net",
        {"pairs": matched, "r_x": rx, "r_y": ry, "delta": delta},
        {"k": k, "r_x": rx, "r_y": ry, "delta": delta},
    )


def _given_nets(x, y, pairs) -> GhEstimate:
    a = [p for p, _ in pairs]
    b = [q for _, q in pairs]
    if not pairs or len(set(a)) != len(a) or len(set(b)) != len(b):
        raise StructuralError("matched nets must be a nonempty bijection")
    rx, ry = covering_radius(x, a), covering_radius(y, b)
    delta = max_discrepancy(x, y, dict(pairs))
    eps = max(rx, ry, delta)
    lower = min(lower_bounds(x, y), 3 * eps)
    info = {"k": len(pairs), "r_x": rx, "r_y": ry, "delta": delta}
    return GhEstimate(lower, 3 * eps, "net", {"pairs": list(pairs), **info}, info)


# -- correspondence search --------------------------------------------------


class _Search:
    """Local search over correspondences of the form graph(phi) + graph(psi)."""

    def __init__(self, Dx: np.ndarray, Dy: np.ndarray):
        self.Dx, self.Dy = Dx, Dy
        self.n, self.m = len(Dx), len(Dy)

    def greedy(self, rng: np.random.Generator, a0: int, b0: int):
        Dx, Dy = self.Dx, self.Dy
        order, _ = farthest_point_order(Dx, a0, self.n)
        px, py = [a0], [b0]
        for a in order[1:]:
            cost = np.abs(Dy[:, py] - Dx[a, px][None, :]).max(axis=1)
            ties = np.flatnonzero(cost <= cost.min() + 1e-15)
            px.append(a)
            py.append(int(rng.choice(ties)))
        return self.fill_psi(px, py)

    def fill_psi(self, px, py, psi: Mapping[int, int] | None = None):
        Dx, Dy = self.Dx, self.Dy
        psi = dict(psi or {})
        phi_x, phi_y = list(px), list(py)
        ox, oy = [], []
        for b in range(self.m):
            if b in psi:
                a = psi[b]
            else:
                cost = np.abs(Dx[:, phi_x + ox] - Dy[b, phi_y + oy][None, :]).max(axis=1)
                a = int(np.argmin(cost))
            ox.append(a)
            oy.append(b)
        # first n entries are phi pairs (x side fixed), next m are psi pairs (y side fixed)
        return np.array(phi_x + ox, dtype=int), np.array(phi_y + oy, dtype=int)

    def improve(self, PX: np.ndarray, PY: np.ndarray, rounds: int):
        Dx, Dy = self.Dx, self.Dy
        nphi = self.n
        PX, PY = PX.copy(), PY.copy()
        E = np.abs(Dx[np.ix_(PX, PX)] - Dy[np.ix_(PY, PY)])
        cur = (E.max(), E.sum())
        for _ in range(rounds):
            p, q = np.unravel_index(int(np.argmax(E)), E.shape)
            moved = False
            for s in (int(p), int(q)):
                keep = np.ones(len(PX), dtype=bool)
                keep[s] = False
                rest = E[np.ix_(keep, keep)]
                base_max, base_sum = rest.max(initial=0.0), rest.sum()
                if s < nphi:
                    rows = np.abs(Dx[PX[s], PX][None, :] - Dy[:, PY])
                    rows[:, s] = 0.0
                else:
                    rows = np.abs(Dx[:, PX] - Dy[PY[s], PY][None, :])
                    rows[:, s] = 0.0
                mx = np.maximum(base_max, rows.max(axis=1))
                sm = base_sum + 2 * rows.sum(axis=1)
                c = int(np.lexsort((sm, mx))[0])
                if (mx[c], sm[c]) < cur:
                    if s < nphi:
                        PY[s] = c
                    else:
                        PX[s] = c
                    E[s, :] = E[:, s] = rows[c]
                    E[s, s] = 0.0
                    cur = (mx[c], sm[c])
                    moved = True
                    break
            if not moved:
                break
        return PX, PY, float(cur[0])


def _heuristic_run(search: _Search, seq: np.random.SeedSequence, anchor: tuple[int, int], rounds: int):
    rng = np.random.default_rng(seq)
    PX, PY = search.greedy(rng, *anchor)
    return search.improve(PX, PY, rounds)


def gh_heuristic(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    budget: int | None = None,
    seed: int = 0,
    init: Iterable[tuple[str, str]] | None = None,
) -> GhEstimate:
    """Best correspondence found by seeded greedy construction plus local moves.

    ``budget`` is the number of restarts. Each restart anchors one point of
    the first space to a candidate of the second (candidates ranked by
    eccentricity gap), extends greedily and then repairs the worst pair until
    no move lowers ``(max, sum)`` of the distortion table. ``init`` adds a
    warm-started run from a given relation.
    """
    _require_finite(x, y)
    budget = DEFAULTS["heuristic_budget"] if budget is None else int(budget)
    if budget < 1:
        raise StructuralError("heuristic budget must be at least 1")
    swap = _canonical(x, y)
    a, b = (y, x) if swap else (x, y)
    search = _Search(a.dist, b.dist)
    rounds = 4 * (len(a) + len(b))

    ea, eb = _eccentricities(a), _eccentricities(b)
    start_rng = np.random.default_rng(seed)
    a0 = int(start_rng.integers(len(a)))
    ranked = np.argsort(np.abs(eb - ea[a0]), kind="stable")
    anchors = [(a0, int(ranked[r % len(b)])) for r in range(budget)]
    seqs = np.random.SeedSequence(seed).spawn(budget)

    jobs = list(zip(seqs, anchors))
    workers = min(threads(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda j: _heuristic_run(search, j[0], j[1], rounds), jobs))
    else:
        results = [_heuristic_run(search, s, an, rounds) for s, an in jobs]

    if init is not None:
        init = [(q, p) for p, q in init] if swap else list(init)
        phi: dict[int, int] = {}
        psi: dict[int, int] = {}
        for p, q in init:
            i, j = a.index(p), b.index(q)
            phi.setdefault(i, j)
            psi.setdefault(j, i)
        if len(phi) == len(a):
            px = list(range(len(a)))
            py = [phi[i] for i in px]
            PX, PY = search.fill_psi(px, py, psi)
            results.append(search.improve(PX, PY, rounds))

    best = min(range(len(results)), key=lambda r: (results[r][2], r))
    PX, PY, dis = results[best]
    pairs = tuple(dict.fromkeys((a.points[i], b.points[j]) for i, j in zip(PX, PY)))
    c = Correspondence(pairs, dis)
    if swap:
        c = c.flipped()
    upper = dis / 2
    return GhEstimate(min(lower_bounds(x, y), upper), upper, "heuristic", c, {"budget": budget})


# -- combination ------------------------------------------------------------


def combine(*estimates: GhEstimate) -> GhEstimate:
    """Tightest sandwich from several estimates; witness from the best upper."""
    best = min(estimates, key=lambda e: e.upper)
    lower = min(max(e.lower for e in estimates), best.upper)
    method = "+".join(dict.fromkeys(e.method for e in estimates))
    details: dict = {}
    for e in estimates:
        details.update(e.details)
    return GhEstimate(lower, best.upper, method, best.witness, details)


def from_correspondence(x: FiniteMetricSpace, y: FiniteMetricSpace, c: Correspondence, method="witness") -> GhEstimate:
    upper = c.distortion / 2
    return GhEstimate(min(lower_bounds(x, y), upper), upper, method, c)


def gh_estimate(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    k: int | None = None,
    budget: int | None = None,
    seed: int = 0,
    init: Iterable[tuple[str, str]] | None = None,
) -> GhEstimate:
    """Exact value when within the oracle cap, otherwise net bound and heuristic combined."""
    _require_finite(x, y)
    if len(x) * len(y) <= DEFAULTS["gh_exact_cap"]:
        value, c = gh_exact(x, y, witness=True)
        return GhEstimate(value, value, "exact", c)
    return combine(gromov_net_bound(x, y, k, seed), gh_heuristic(x, y, budget, seed, init))
