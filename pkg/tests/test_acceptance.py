"""Acceptance criteria 1-11, one test each.

Every test prints a single PASS/FAIL line with its measured numbers and
asserts its runtime limit.
"""

import time

import numpy as np
import pytest

from conftest import euclidean, ids
from hlskit.convergence import WarpSequence, iff_audit, run_convergence
from hlskit.foliation import TANGENTIAL, TRANSVERSE, WarpSpec, fuse_leaves, glue_complexes, hls, warp
from hlskit.generators import (
    kronecker_torus,
    product_ibundle,
    realization_pairs,
    realize_graph,
    reeb_annulus,
    star_block,
)
from hlskit.gh import (
    combine,
    correspondence,
    from_correspondence,
    gh_exact,
    gh_heuristic,
    gromov_net_bound,
    lower_bounds,
)
from hlskit.graph import MetricGraph, glue_graphs, measure_ball_check, sample_graph
from hlskit.metric import FiniteMetricSpace, find_isometry
from hlskit.quotient import collapse_subset, glue, quotient_metric
from oracles import chain_infimum, equivalence_classes

pytestmark = pytest.mark.acceptance


class Clock:
    def __init__(self):
        self.start = time.perf_counter()

    @property
    def elapsed(self):
        return time.perf_counter() - self.start


def report(number, ok, clock, limit, detail):
    status = "PASS" if ok and clock.elapsed < limit else "FAIL"
    print(f"\ncriterion {number}: {status} ({detail}; {clock.elapsed:.2f} s of {limit} s)")


def tau_zero(*spaces):
    return 1e-9 * max(max(s.diameter for s in spaces), 1e-300)


def random_complex(rng):
    pick = int(rng.integers(5))
    if pick == 0:
        return product_ibundle(float(rng.choice([0.5, 1.0, 2.0])), int(rng.integers(3, 10)), int(rng.integers(1, 4)))
    if pick == 1:
        return star_block(int(rng.integers(1, 5)), int(rng.integers(2, 7)), int(rng.integers(2, 4)))
    if pick == 2:
        return reeb_annulus(int(rng.integers(3, 9)))
    if pick == 3:
        return kronecker_torus(int(rng.integers(3, 9)))
    g = [MetricGraph.path(1), MetricGraph.star(2), MetricGraph.cycle(3)][int(rng.integers(3))]
    return realize_graph(g, int(rng.integers(2, 5)))


def test_criterion_01_quotient_oracle():
    clock, rng = Clock(), np.random.default_rng(101)
    worst, cases = 0.0, 200
    for _ in range(cases):
        n = int(rng.integers(1, 8))
        s = euclidean(rng.integers(0, 5, size=(n, 2)))
        pairs = [tuple(int(t) for t in rng.integers(0, n, 2)) for _ in range(int(rng.integers(0, 6)))]
        q = quotient_metric(s, [(s.points[a], s.points[b]) for a, b in pairs], zero_tol=0.0)
        classes = equivalence_classes(n, pairs)
        ref = chain_infimum(s.dist.tolist(), classes)
        for a, ca in enumerate(classes):
            for b, cb in enumerate(classes):
                got = q.space.d(q.class_map[s.points[ca[0]]], q.class_map[s.points[cb[0]]])
                worst = max(worst, abs(got - ref[a][b]) / max(abs(ref[a][b]), 1e-300) if got != ref[a][b] else 0.0)
    ok = worst <= 1e-12
    report(1, ok, clock, 10, f"{cases} cases, worst relative error {worst:.2e}")
    assert ok
    assert clock.elapsed < 10


def test_criterion_02_bundle_is_segment():
    clock, results = Clock(), []
    for d in (0.5, 1.0, 2.0):
        for n in (6, 11, 21):
            k = product_ibundle(d, n, 3)
            seg = sample_graph(MetricGraph(("u", "v"), (("u", "v", d),)), k.mesh)
            est = gromov_net_bound(hls(k).space, seg)
            results.append((d, n, est.upper, 3 * k.mesh))
    ok = all(upper <= bound for *_, upper, bound in results)
    worst = max(upper / bound for *_, upper, bound in results)
    report(2, ok, clock, 5, f"9 bundles, worst upper/(3 mesh) = {worst:.3f}")
    assert ok
    assert clock.elapsed < 5


def test_criterion_03_singleton_leaf_spaces():
    clock, results = Clock(), []
    for k in [kronecker_torus(32), reeb_annulus(32)] + [star_block(j, 32) for j in (2, 3, 4)]:
        results.append((hls(k).space.diameter, 2 * k.mesh))
    ok = all(d <= bound for d, bound in results)
    report(3, ok, clock, 5, "diameters " + ", ".join(f"{d:.4f}<={b:.4f}" for d, b in results))
    assert ok
    assert clock.elapsed < 5


def _glue_case(rng, mode):
    if mode == TANGENTIAL:
        # glue along compact (boundary) leaves, so redraw complexes without one
        k1 = k2 = None
        while k1 is None or not k1.compact_leaves:
            k1 = random_complex(rng)
        while k2 is None or not k2.compact_leaves:
            k2 = random_complex(rng)
        a = k1.leaf_vertices()[sorted(k1.compact_leaves)[int(rng.integers(len(k1.compact_leaves)))]]
        b = k2.leaf_vertices()[sorted(k2.compact_leaves)[int(rng.integers(len(k2.compact_leaves)))]]
        m = int(rng.integers(1, min(len(a), len(b)) + 1))
        return k1, k2, dict(zip(a[:m], b[:m]))
    n, d = int(rng.integers(3, 10)), float(rng.choice([0.5, 1.0, 2.0]))
    m1, m2 = int(rng.integers(2, 5)), int(rng.integers(2, 5))
    k1, k2 = product_ibundle(d, n, m1), product_ibundle(d, n, m2)
    return k1, k2, {f"v{i}_{m1 - 1}": f"v{i}_0" for i in range(n)}


def test_criterion_04_gluing():
    clock, rng, rows = Clock(), np.random.default_rng(404), []
    for mode in (TANGENTIAL, TRANSVERSE):
        for _ in range(10):
            k1, k2, f = _glue_case(rng, mode)
            glued = glue_complexes(k1, k2, f, mode, ("a.", "b."))
            H, h1, h2 = hls(glued), hls(k1), hls(k2)
            Q = glue(h1.space, h2.space, {h1.class_of_vertex[p]: h2.class_of_vertex[q] for p, q in f.items()})
            # provenance: every original vertex survives under its own id or its partner's
            inverse = {q: p for p, q in f.items()}
            kept = set(glued.vertices)
            pairs = [(H.class_of_vertex["a." + p], Q.class_map["x:" + h1.class_of_vertex[p]]) for p in k1.vertices]
            for q in k2.vertices:
                v = "b." + q if "b." + q in kept else "a." + inverse[q]
                pairs.append((H.class_of_vertex[v], Q.class_map["y:" + h2.class_of_vertex[q]]))
            c = correspondence(H.space, Q.space, pairs, complete=True)
            est = combine(from_correspondence(H.space, Q.space, c), gh_heuristic(H.space, Q.space, 8, 0, c.pairs))
            rows.append((mode, est.upper, 2 * max(k1.mesh, k2.mesh)))
    ok = all(upper <= bound for _, upper, bound in rows)
    worst = max(upper / bound for _, upper, bound in rows)
    report(4, ok, clock, 30, f"20 gluings, worst upper/(2 max mesh) = {worst:.3f}")
    assert ok
    assert clock.elapsed < 30


def _transversal(k, rng):
    """Random leaf set grown along transverse edges from a random leaf."""
    adj = {leaf: set() for leaf in k.leaves}
    for e in k.edges:
        if e.kind == TRANSVERSE:
            a, b = k.leaf_of[e.u], k.leaf_of[e.v]
            adj[a].add(b)
            adj[b].add(a)
    start = k.leaves[int(rng.integers(len(k.leaves)))]
    chosen, frontier = [start], sorted(adj[start])
    target = int(rng.integers(2, max(3, len(k.leaves) // 2)))
    while frontier and len(chosen) < target:
        nxt = frontier.pop(int(rng.integers(len(frontier))))
        if nxt not in chosen:
            chosen.append(nxt)
            frontier += sorted(adj[nxt] - set(chosen))
    return chosen


def test_criterion_05_turbulization_collapse():
    clock, rng, found = Clock(), np.random.default_rng(505), 0
    for _ in range(20):
        k = random_complex(rng)
        leaves = _transversal(k, rng)
        fused = hls(fuse_leaves(k, leaves)).space
        h = hls(k)
        collapsed = collapse_subset(h.space, [h.class_of_leaf[l] for l in leaves]).space
        found += find_isometry(fused, collapsed, tol=tau_zero(fused, collapsed)) is not None
    ok = found == 20
    report(5, ok, clock, 10, f"{found}/20 isometries found")
    assert ok
    assert clock.elapsed < 10


def test_criterion_06_graph_realization():
    clock, rows = Clock(), []
    graphs = {"path": MetricGraph.path(1), "star3": MetricGraph.star(3), "triangle": MetricGraph.cycle(3),
              "theta": MetricGraph.theta()}
    for name, g in graphs.items():
        k = realize_graph(g, 16)
        h = hls(k)
        s = sample_graph(g, 1 / 16)
        c = correspondence(h.space, s, realization_pairs(g, h, k, s), complete=True)
        est = combine(
            from_correspondence(h.space, s, c),
            gromov_net_bound(h.space, s),
            gh_heuristic(h.space, s, 4, 0, c.pairs),
        )
        rows.append((name, est.upper))
    ok = all(upper <= 3 / 16 for _, upper in rows)
    report(6, ok, clock, 60, "uppers " + ", ".join(f"{n}={u:.4f}" for n, u in rows) + " vs 0.1875")
    assert ok
    assert clock.elapsed < 60


def test_criterion_07_convergence():
    clock, rows = Clock(), []
    for name, k in (("bundle", product_ibundle(1.0, 11, 4)), ("star3", realize_graph(MetricGraph.star(3), 16))):
        rep = run_convergence(WarpSequence(k), [1, 2, 4, 8, 16])
        rows.append((name, rep.monotone_within_gap(), rep.rows[-1].gh_upper, rep.tau_conv))
    ok = all(mono and final <= tau for _, mono, final, tau in rows)
    detail = ", ".join(f"{n}: monotone={m} final={f:.4f} tau={t:.4f}" for n, m, f, t in rows)
    report(7, ok, clock, 60, detail)
    assert ok
    assert clock.elapsed < 60


def test_criterion_08_iff_condition():
    clock = Clock()
    ns = [1, 2, 4, 8, 16, 32, 64]
    grid = [0.5, 0.2]
    positive = iff_audit(WarpSequence(product_ibundle(1.0, 11, 4)), grid, ns)
    wide = product_ibundle(1.0, 11, 11)
    negative = iff_audit(WarpSequence(wide, "leaf_decay", leaves=("L0",)), grid, ns)
    min_lower = min(r.gh_lower for r in negative.convergence.rows)
    ok = (
        positive.agree and positive.condition_holds
        and negative.agree and not negative.condition_holds
        and min_lower > 0.1
    )
    report(8, ok, clock, 60, f"positive {positive.note}, negative {negative.note}, negative min lower {min_lower:.4f}")
    assert ok
    assert clock.elapsed < 60


def test_criterion_09_gromov_sandwich():
    clock, rng = Clock(), np.random.default_rng(909)
    sandwich = iff = 0
    for case in range(100):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 16 // n + 1))
        x = euclidean(rng.choice(13, size=(n, 2)) + rng.random((n, 2)) * 0.5)
        if case % 3 == 0:
            perm = rng.permutation(n)
            y = FiniteMetricSpace(ids(n, "q"), x.dist[np.ix_(perm, perm)])
        else:
            y = euclidean(rng.choice(13, size=(min(m, 4), 2)) + rng.random((min(m, 4), 2)) * 0.5)
        exact = gh_exact(x, y)
        lo = lower_bounds(x, y)
        net = gromov_net_bound(x, y, seed=case).upper
        heur = gh_heuristic(x, y, seed=case).upper
        sandwich += lo <= exact + 1e-12 and exact <= net + 1e-12 and exact <= heur + 1e-12
        tz = tau_zero(x, y)
        iff += (exact <= tz) == (find_isometry(x, y, 2 * tz * len(x)) is not None)
    ok = sandwich == 100 and iff == 100
    report(9, ok, clock, 30, f"sandwich {sandwich}/100, zero iff isometry {iff}/100")
    assert ok
    assert clock.elapsed < 30


def test_criterion_10_measure_bounds():
    clock, rng, passed = Clock(), np.random.default_rng(1010), 0
    for i in range(20):
        g = MetricGraph.path(1, float(rng.uniform(0.25, 2.0)))
        for j in range(int(rng.integers(1, 6))):
            seg = MetricGraph.path(1, float(rng.uniform(0.25, 2.0)))
            pairs = [(g.nodes[int(rng.integers(len(g.nodes)))], "p0")]
            if rng.random() < 0.3:
                pairs.append((g.nodes[int(rng.integers(len(g.nodes)))], "p1"))
            g = glue_graphs(g, seg, pairs, ("", f"s{j}."))
        passed += measure_ball_check(g).passed
    ok = passed == 20
    report(10, ok, clock, 5, f"{passed}/20 graphs within [1/beta, beta]")
    assert ok
    assert clock.elapsed < 5


def test_criterion_11_warping_invariance():
    clock, rng, found = Clock(), np.random.default_rng(1111), 0
    for _ in range(50):
        k = random_complex(rng)
        f = WarpSpec({leaf: float(rng.uniform(0.05, 3.0)) for leaf in k.leaves})
        a, b = hls(warp(k, f)).space, hls(k).space
        found += find_isometry(a, b, tol=tau_zero(a, b)) is not None
    ok = found == 50
    report(11, ok, clock, 10, f"{found}/50 isometries found")
    assert ok
    assert clock.elapsed < 10
