import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import connected_graphs, euclidean, ids, metric_spaces
from hlskit.errors import DisconnectedError, SearchBudgetError, StructuralError
from hlskit.metric import (
    FiniteMetricSpace,
    WeightedGraphSpace,
    covering_radius,
    eps_net,
    find_isometry,
    geodesic_metric,
    k_net,
    max_discrepancy,
    validate_metric,
)
from oracles import min_net_size, simple_path_distances


def space(points, rows):
    return FiniteMetricSpace(tuple(points), np.array(rows, dtype=float))


class TestConstruction:
    def test_non_square_is_structural(self):
        with pytest.raises(StructuralError):
            FiniteMetricSpace(("a", "b"), np.zeros((2, 3)))

    def test_negative_entry_is_structural(self):
        with pytest.raises(StructuralError, match="negative"):
            space("ab", [[0, -1], [-1, 0]])

    def test_nan_and_duplicates_rejected(self):
        with pytest.raises(StructuralError):
            space("ab", [[0, np.nan], [np.nan, 0]])
        with pytest.raises(StructuralError):
            space("aa", [[0, 1], [1, 0]])

    def test_table_is_read_only(self):
        s = space("ab", [[0, 1], [1, 0]])
        with pytest.raises(ValueError):
            s.dist[0, 1] = 3

    def test_subspace_and_lookup(self):
        s = euclidean([(0, 0), (3, 0), (3, 4)])
        sub = s.subspace(["p2", "p0"])
        assert sub.points == ("p2", "p0")
        assert sub.d("p0", "p2") == 5.0
        assert s.diameter == 5.0

    def test_graph_rejects_nonpositive_length(self):
        with pytest.raises(StructuralError):
            WeightedGraphSpace(("a", "b"), (("a", "b", 0.0),))


class TestValidate:
    def test_two_point_metric(self):
        assert validate_metric(space("ab", [[0, 1], [1, 0]])).ok

    def test_triangle_violation_names_triple(self):
        rep = validate_metric(space("abc", [[0, 1, 5], [1, 0, 1], [5, 1, 0]]))
        assert not rep.ok
        tri = [v for v in rep.violations if v.axiom == "triangle"]
        assert tri and tri[0].points == ("a", "b", "c")
        assert tri[0].amount == pytest.approx(3.0)

    def test_pseudo_vs_strict(self):
        s = space("abc", [[0, 0, 1], [0, 0, 1], [1, 1, 0]])
        assert validate_metric(s, "pseudo").ok
        strict = validate_metric(s, "strict")
        assert [v.axiom for v in strict.violations] == ["separation"]

    def test_asymmetry_and_diagonal(self):
        rep = validate_metric(space("ab", [[1, 1], [2, 0]]), "pseudo")
        assert {v.axiom for v in rep.violations} == {"diagonal", "symmetry"}

    def test_unknown_mode(self):
        with pytest.raises(StructuralError):
            validate_metric(space("a", [[0]]), "loose")


class TestGeodesic:
    def test_path(self):
        g = WeightedGraphSpace("abc", (("a", "b", 1), ("b", "c", 1)))
        assert geodesic_metric(g).d("a", "c") == 2

    def test_four_cycle(self):
        g = WeightedGraphSpace("abcd", tuple((u, v, 1) for u, v in ("ab", "bc", "cd", "da")))
        assert geodesic_metric(g).d("a", "c") == 2

    def test_disconnected_names_vertices(self):
        g = WeightedGraphSpace("abc", (("a", "b", 1.0),))
        with pytest.raises(DisconnectedError) as err:
            geodesic_metric(g)
        assert set(err.value.pair) == {"a", "c"}

    @given(connected_graphs(max_size=8))
    def test_matches_simple_path_enumeration(self, g):
        D = geodesic_metric(g).dist
        ref = np.array(simple_path_distances(g.vertices, g.edges))
        np.testing.assert_allclose(D, ref, rtol=1e-12)

    @given(connected_graphs(max_size=8))
    def test_result_is_strict_metric(self, g):
        assert validate_metric(geodesic_metric(g), "strict").ok


class TestNets:
    segment = euclidean([(i, 0) for i in range(5)])

    def test_large_radius_single_member(self):
        assert len(eps_net(self.segment, self.segment.diameter)) == 1

    def test_zero_radius_whole_space(self):
        net = eps_net(self.segment, 0.0)
        assert sorted(net.members) == sorted(self.segment.points)
        assert net.radius == 0

    def test_segment_radius_one(self):
        net = eps_net(self.segment, 1.0, start="p0")
        assert net.members == ("p0", "p4", "p2")
        assert covering_radius(self.segment, net.members) <= 1.0
        # a smallest 1-net has 2 members; farthest-point sampling may use more
        assert len(net) >= min_net_size(self.segment.dist.tolist(), 1.0) == 2

    @given(metric_spaces(max_size=7), st.floats(0, 10), st.integers(0, 5))
    def test_covering_property(self, s, r, seed):
        net = eps_net(s, r, seed=seed)
        assert net.radius <= r + 1e-12
        assert covering_radius(s, net.members) <= net.radius + 1e-12

    def test_k_net_size_and_seed_determinism(self):
        s = euclidean([(i, i * i % 7) for i in range(12)])
        a, b = k_net(s, 5, seed=3), k_net(s, 5, seed=3)
        assert len(a) == 5 and a == b
        assert len(k_net(s, 50)) == 12


class TestIsometry:
    def test_self(self):
        s = euclidean([(0, 0), (1, 0), (0, 2)])
        f = find_isometry(s, s)
        assert f is not None and max_discrepancy(s, s, f) == 0

    def test_different_distances(self):
        a = space("ab", [[0, 1], [1, 0]])
        b = space("ab", [[0, 2], [2, 0]])
        assert find_isometry(a, b, tol=0.5) is None

    def test_size_mismatch_is_absent(self):
        assert find_isometry(space("a", [[0]]), space("ab", [[0, 1], [1, 0]])) is None

    def test_relabeled_seven_points(self):
        rng = np.random.default_rng(11)
        x = euclidean(rng.random((7, 2)))
        perm = rng.permutation(7)
        y = FiniteMetricSpace(ids(7, "q"), x.dist[np.ix_(perm, perm)])
        f = find_isometry(x, y)
        assert f is not None and max_discrepancy(x, y, f) == 0

    @given(metric_spaces(max_size=9), st.randoms(use_true_random=False))
    def test_permuted_copy_always_found(self, x, rnd):
        perm = list(range(len(x)))
        rnd.shuffle(perm)
        assert find_isometry(x, x.permuted(perm)) is not None

    @given(metric_spaces(max_size=6), metric_spaces(max_size=6), st.sampled_from([0.0, 0.5, 2.0]))
    def test_symmetric_success(self, x, y, tol):
        assert (find_isometry(x, y, tol) is None) == (find_isometry(y, x, tol) is None)

    def test_budget_above_cap(self):
        # every point looks alike, so pruning cannot help; no isometry exists
        n = 14
        D = np.ones((n, n)) - np.eye(n)
        D2 = D.copy()
        D2[0, 1] = D2[1, 0] = 1.5
        with pytest.raises(SearchBudgetError):
            find_isometry(FiniteMetricSpace(ids(n), D), FiniteMetricSpace(ids(n), D2), node_budget=1000)
