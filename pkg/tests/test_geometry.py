import itertools
import math

import numpy as np
import pytest

from src.aeq_search.constructions import larman_rogers, moser_spindle, named_graph, two_simplex_construction
from src.aeq_search.errors import PointSetError
from src.aeq_search.geometry import (
    Arithmetic,
    PointSet,
    clique_sphere,
    dump_point_set,
    is_almost_equidistant,
    load_point_set,
    parse_point_set,
    realizes,
    squared_distance,
    unit_distance_graph,
)
from src.aeq_search.graphcore import Graph, complement, has_triangle

UNIT_SQUARE = [[0, 0], [1, 0], [1, 1], [0, 1]]


class TestSquaredDistance:
    def test_exact_scaled(self):
        assert squared_distance((1, 1, 1, 1, 1), (1, 1, 1, -1, -1), Arithmetic.exact(8)) == 8

    def test_weighted_axes(self):
        assert squared_distance((0, 1), (0, -1), Arithmetic.exact(8, [1, 3])) == 12

    def test_same_point(self):
        assert squared_distance((2, 5), (2, 5)) == 0

    def test_floating(self):
        assert squared_distance((0, 0), (3, 4)) == 25.0

    def test_dimension_mismatch(self):
        with pytest.raises(PointSetError):
            squared_distance((0, 0), (0, 0, 0))


class TestPointSet:
    def test_rejects_duplicates(self):
        with pytest.raises(PointSetError, match="coincide"):
            PointSet.floating([[0, 0], [1, 0], [0, 0]])

    def test_rejects_nearly_coincident_points(self):
        with pytest.raises(PointSetError):
            PointSet.floating([[0, 0], [1e-6, 0]], tolerance=1e-9)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_rejects_non_finite_coordinates(self, bad):
        with pytest.raises(PointSetError, match="non-finite"):
            PointSet.floating([[bad], [0.0], [1.0]])

    def test_rejects_ragged_points(self):
        with pytest.raises(PointSetError, match="coordinates"):
            PointSet.build([[0, 0], [1, 0, 0]], Arithmetic.floating())

    def test_exact_mode_needs_integers(self):
        with pytest.raises(PointSetError, match="non-integer"):
            PointSet.build([[0, 0.5], [1, 0]], Arithmetic.exact(4))

    def test_too_many_points(self):
        with pytest.raises(PointSetError):
            PointSet.floating([[float(i)] for i in range(65)])

    def test_default_tolerance(self):
        assert PointSet.floating(UNIT_SQUARE).arithmetic.tolerance == 1e-9

    def test_to_floating_keeps_the_unit_graph(self):
        ps = larman_rogers(6)
        assert unit_distance_graph(ps.to_floating()) == unit_distance_graph(ps)


class TestUnitDistanceGraph:
    def test_moser_spindle(self):
        g = unit_distance_graph(moser_spindle())
        assert (g.n, g.edge_count) == (7, 11)
        assert g.is_isomorphic(named_graph("moser_spindle"))

    def test_larman_rogers_complement_is_triangle_free(self):
        g = unit_distance_graph(larman_rogers(5))
        assert g.n == 16
        assert not has_triangle(complement(g))

    def test_two_far_points(self):
        assert unit_distance_graph(PointSet.floating([[0, 0], [2, 0]])) == Graph.empty(2)


class TestIsAlmostEquidistant:
    def test_two_simplex_construction(self):
        report = is_almost_equidistant(two_simplex_construction(3))
        assert report.ok and report.witness is None
        assert report.stats.points == 10

    def test_larman_rogers_24(self):
        assert is_almost_equidistant(larman_rogers(8)).ok

    def test_collinear_points(self):
        report = is_almost_equidistant(PointSet.floating([[0.0], [2.0], [4.0]]))
        assert not report.ok
        assert report.witness == (0, 1, 2)

    def test_witness_is_lexicographically_first(self):
        # 0, 1, 2 form a unit triangle; 3 and 4 are far from everything
        points = [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2], [10, 0], [20, 0]]
        report = is_almost_equidistant(PointSet.floating(points))
        assert report.witness == (0, 3, 4)

    def test_agrees_with_brute_force(self, rng):
        lattice = list(itertools.product(range(-1, 2), repeat=4))
        arithmetic = Arithmetic.exact(2)
        for _ in range(200):
            size = int(rng.integers(1, 9))
            chosen = [list(lattice[i]) for i in rng.choice(len(lattice), size=size, replace=False)]
            ps = PointSet.build(chosen, arithmetic)
            triples = [
                t for t in itertools.combinations(range(size), 3)
                if not any(ps.is_unit_pair(a, b) for a, b in itertools.combinations(t, 2))
            ]
            report = is_almost_equidistant(ps)
            assert report.ok == (not triples)
            assert report.ok == (not has_triangle(complement(unit_distance_graph(ps))))
            if triples:
                assert report.witness == triples[0]


class TestCliqueSphere:
    def test_two_points_in_the_plane(self):
        sphere = clique_sphere(PointSet.floating([[0, 0], [1, 0]]), [0, 1])
        assert sphere.radius == pytest.approx(math.sqrt(3) / 2)
        assert (sphere.sphere_dim, sphere.carrier_dim) == (0, 1)
        assert sphere.center == pytest.approx([0.5, 0.0])

    def test_full_clique_gives_two_points_not_at_unit_distance(self):
        for d in range(2, 7):
            ps = PointSet.exact(np.eye(d, dtype=int).tolist(), scale=2)
            sphere = clique_sphere(ps, range(d))
            assert sphere.sphere_dim == 0
            center = np.asarray(sphere.center)
            axis = np.asarray(sphere.directions[0])
            ends = np.array([center + sphere.radius * axis, center - sphere.radius * axis])
            for p in ends:
                assert np.allclose(np.linalg.norm(ps.coordinates() - p, axis=1), 1.0)
            assert np.linalg.norm(ends[0] - ends[1]) == pytest.approx(2 * math.sqrt((d + 1) / (2 * d)))
            assert np.linalg.norm(ends[0] - ends[1]) > 1.0

    def test_triangle_in_space(self):
        sphere = clique_sphere(PointSet.exact(np.eye(3, dtype=int).tolist(), scale=2), [0, 1, 2])
        assert sphere.radius == pytest.approx(math.sqrt(2 / 3))

    def test_sampled_points_are_at_unit_distance(self, rng):
        for d in range(2, 7):
            for k in range(2, d + 1):
                ps = PointSet.exact(np.eye(d, dtype=int)[:k].tolist(), scale=2)
                sphere = clique_sphere(ps, range(k))
                clique = ps.coordinates()
                for p in sphere.sample(100, rng):
                    assert np.allclose(np.linalg.norm(clique - p, axis=1), 1.0, atol=1e-9)
                centroid_distance = np.linalg.norm(clique - np.asarray(sphere.center), axis=1)
                assert np.allclose(centroid_distance, math.sqrt((k - 1) / (2 * k)), atol=1e-12)

    def test_rejects_non_unit_clique(self):
        with pytest.raises(PointSetError, match="unit distance"):
            clique_sphere(PointSet.floating(UNIT_SQUARE), [0, 2])

    def test_rejects_clique_larger_than_dimension(self):
        with pytest.raises(PointSetError):
            clique_sphere(PointSet.floating([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]), [0, 1, 2])


class TestRealizes:
    def test_moser_spindle(self):
        assert realizes(moser_spindle(), named_graph("moser_spindle"))

    def test_edgeless_graph(self):
        assert realizes(PointSet.floating(UNIT_SQUARE), Graph.empty(4))

    def test_square_is_not_k4(self):
        assert not realizes(PointSet.floating(UNIT_SQUARE), Graph.complete(4))

    def test_size_mismatch(self):
        with pytest.raises(PointSetError):
            realizes(PointSet.floating(UNIT_SQUARE), Graph.complete(3))


class TestPointFiles:
    def test_exact_file_round_trip(self, tmp_path):
        ps = larman_rogers(7)
        target = tmp_path / "lr7.json"
        dump_point_set(ps, target)
        loaded = load_point_set(target)
        assert loaded == ps
        assert all(isinstance(x, int) for p in loaded.points for x in p)

    def test_floating_values_survive_exactly(self, tmp_path):
        ps = two_simplex_construction(4)
        target = tmp_path / "ts4.json"
        dump_point_set(ps, target)
        assert load_point_set(target).points == ps.points

    def test_syntax_error_reports_position(self):
        with pytest.raises(PointSetError, match="line 3 column"):
            parse_point_set('{\n  "dimension": 2,\n  oops\n}')

    def test_validation_error_reports_field(self):
        text = '{"dimension": 2, "arithmetic": {"mode": "floating"}, "points": [[0, 0], [1, 0, 0]]}'
        with pytest.raises(PointSetError, match="Point 1"):
            parse_point_set(text)

    def test_unknown_mode(self):
        with pytest.raises(PointSetError, match="arithmetic.mode"):
            parse_point_set('{"dimension": 1, "arithmetic": {"mode": "symbolic"}, "points": [[0]]}')

    def test_nan_coordinates_are_rejected(self):
        text = '{"dimension": 1, "arithmetic": {"mode": "floating"}, "points": [[NaN], [0.0], [1.0]]}'
        with pytest.raises(PointSetError, match="Point 0"):
            parse_point_set(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(PointSetError):
            load_point_set(tmp_path / "missing.json")
