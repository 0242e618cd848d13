import math

import numpy as np
import pytest

from src.aeq_search.constructions import moser_spindle, named_graph, two_simplex_construction
from src.aeq_search.embed import Declared, EmbedConfig, EmbeddingResult, embed, stress, stress_gradient
from src.aeq_search.geometry import realizes, unit_distance_graph
from src.aeq_search.graphcore import Graph
from tests.conftest import cycle, random_graph

UNIT_SQUARE = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]


class TestStress:
    def test_zero_on_a_realization(self):
        ps = moser_spindle()
        assert stress(ps.coordinates(), named_graph("moser_spindle")) < 1e-20

    def test_square_against_k4(self):
        # both diagonals have squared length 2
        assert stress(UNIT_SQUARE, Graph.complete(4)) == pytest.approx(2.0)

    def test_matches_edge_loop(self, rng):
        g = random_graph(rng, 9, p=0.5)
        x = rng.standard_normal((9, 3))
        expected = sum((float(np.sum((x[i] - x[j]) ** 2)) - 1.0) ** 2 for i, j in g.edges())
        assert stress(x, g) == pytest.approx(expected)

    def test_edgeless_graph(self, rng):
        x = rng.standard_normal((5, 2))
        assert stress(x, Graph.empty(5)) == 0.0
        assert not stress_gradient(x, Graph.empty(5)).any()

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            stress([[0.0, 0.0]], Graph.complete(2))


class TestStressGradient:
    def test_vanishes_at_a_realization(self):
        grad = stress_gradient(moser_spindle().coordinates(), named_graph("moser_spindle"))
        assert np.allclose(grad, 0.0, atol=1e-9)

    def test_matches_finite_differences(self, rng):
        h = 1e-6
        for _ in range(100):
            n, d = int(rng.integers(2, 8)), int(rng.integers(1, 5))
            g = random_graph(rng, n, p=0.6)
            x = rng.standard_normal((n, d))
            grad = stress_gradient(x, g)
            numeric = np.zeros_like(x)
            for i in range(n):
                for k in range(d):
                    step = np.zeros_like(x)
                    step[i, k] = h
                    numeric[i, k] = (stress(x + step, g) - stress(x - step, g)) / (2 * h)
            assert np.linalg.norm(grad - numeric) <= 1e-6 * max(1.0, float(np.linalg.norm(grad)))


class TestEmbed:
    def test_realizes_the_moser_spindle(self):
        g = named_graph("moser_spindle")
        result = embed(g, EmbedConfig(d=2, restarts=50))
        assert result.realized
        assert result.residual < 1e-10
        ps = result.to_point_set(tolerance=1e-4)
        assert realizes(ps, g)

    def test_realizes_a_cycle(self):
        result = embed(cycle(5), EmbedConfig(d=2, restarts=5))
        assert result.declared is Declared.REALIZED

    def test_k4_in_the_plane_is_inconclusive(self):
        result = embed(Graph.complete(4), EmbedConfig(d=2, restarts=10))
        assert result.declared is Declared.INCONCLUSIVE
        assert result.residual > 1e-3

    def test_result_bookkeeping(self):
        result = embed(Graph.complete(4), EmbedConfig(d=2, restarts=6, max_iters=200))
        assert len(result.restart_residuals) == 6
        eligible = [f for i, f in enumerate(result.restart_residuals) if i not in result.degenerate_restarts]
        assert result.residual == min(eligible)
        assert result.restart_residuals.index(result.residual) == result.best_restart
        assert np.asarray(result.coordinates).shape == (4, 2)

    def test_deterministic_for_a_seed(self):
        cfg = EmbedConfig(d=3, restarts=4, max_iters=300, rng_seed=7)
        g = named_graph("G11")
        assert embed(g, cfg) == embed(g, cfg)

    def test_seed_changes_the_starts(self):
        g = named_graph("G11")
        first = embed(g, EmbedConfig(d=3, restarts=1, max_iters=5, rng_seed=0))
        second = embed(g, EmbedConfig(d=3, restarts=1, max_iters=5, rng_seed=1))
        assert first.coordinates != second.coordinates

    def test_residuals_never_increase(self):
        result = embed(named_graph("square_antiprism"), EmbedConfig(d=2, restarts=3, max_iters=500, record_history=True))
        assert len(result.histories) == 3
        for history in result.histories:
            assert all(b <= a for a, b in zip(history, history[1:]))

    def test_worker_pool_gives_the_same_result(self):
        g = named_graph("antiprism_minus_vertex")
        cfg = EmbedConfig(d=2, restarts=4, max_iters=400)
        assert embed(g, cfg.model_copy(update={"jobs": 2})) == embed(g, cfg)

    def test_restarts_default_from_settings(self, monkeypatch):
        monkeypatch.setenv("AEQ_EMBED_RESTARTS", "12")
        assert EmbedConfig(d=2).restarts == 12

    def test_collapsed_restart_is_not_a_realization(self):
        # this start folds G10 onto a smaller graph with zero stress
        result = embed(named_graph("G10"), EmbedConfig(d=4, restarts=1, rng_seed=25))
        assert result.degenerate_restarts == [0]
        assert result.declared is Declared.INCONCLUSIVE

    def test_realized_points_are_distinct(self):
        result = embed(named_graph("moser_spindle"), EmbedConfig(d=2, restarts=50))
        assert result.realized
        assert result.best_restart not in result.degenerate_restarts
        x = np.asarray(result.coordinates)
        gaps = [float(np.sum((x[i] - x[j]) ** 2)) for i in range(len(x)) for j in range(i + 1, len(x))]
        assert min(gaps) > EmbedConfig(d=2).min_separation

    def test_distinct_restart_beats_a_collapsed_one(self):
        result = EmbeddingResult(
            coordinates=[[0.0], [1.0]], residual=1e-12, restart_residuals=[0.0, 1e-12], best_restart=1,
            declared=Declared.REALIZED, success_threshold=1e-10, degenerate_restarts=[0],
        )
        assert result.realized

    def test_collapsed_best_restart_cannot_be_declared_realized(self):
        with pytest.raises(ValueError):
            EmbeddingResult(
                coordinates=[[0.0], [0.0]], residual=0.0, restart_residuals=[0.0], best_restart=0,
                declared=Declared.REALIZED, success_threshold=1e-10, degenerate_restarts=[0],
            )

    def test_inconsistent_result_is_rejected(self):
        with pytest.raises(ValueError):
            EmbeddingResult(
                coordinates=[[0.0]], residual=1.0, restart_residuals=[0.5, 1.0], best_restart=1,
                declared=Declared.INCONCLUSIVE, success_threshold=1e-10,
            )


@pytest.mark.slow
def test_realizes_the_two_simplex_graph():
    g = unit_distance_graph(two_simplex_construction(3))
    result = embed(g, EmbedConfig(d=3, restarts=50))
    assert result.realized
    assert stress(result.coordinates, g) < 1e-10


@pytest.mark.slow
def test_k4_stays_inconclusive_over_many_restarts():
    result = embed(Graph.complete(4), EmbedConfig(d=2, restarts=100))
    assert not result.realized
    assert result.residual > 1e-3


@pytest.mark.slow
@pytest.mark.parametrize("name,d", [("G11", 3), ("G14", 4), ("G10", 4), ("antiprism_minus_vertex", 2)])
def test_non_realizable_fixtures_stay_inconclusive(name, d):
    result = embed(named_graph(name), EmbedConfig(d=d, restarts=100, jobs=4))
    assert result.declared is Declared.INCONCLUSIVE
    assert math.isfinite(result.residual)
    distinct = [f for i, f in enumerate(result.restart_residuals) if i not in result.degenerate_restarts]
    assert all(f > 1e-4 for f in distinct)
