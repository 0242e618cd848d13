"""
Numerical search for unit-distance realizations of a graph.

Minimises the edge stress sum over edges (|p_i - p_j|^2 - 1)^2 by gradient descent
from many random starts. A residual below the success threshold on pairwise
distinct points is reported as "realized"; anything else is "inconclusive",
never a proof of non-realizability.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.spatial.distance import pdist

from src.aeq_search.config import get_settings
from src.aeq_search.geometry import PointSet
from src.aeq_search.graphcore import Graph

logger = logging.getLogger(__name__)


class Declared(str, Enum):
    REALIZED = "realized"
    INCONCLUSIVE = "inconclusive"


class EmbedConfig(BaseModel):
    d: int = Field(..., ge=1, description="Target dimension")
    restarts: int = Field(default_factory=lambda: get_settings().embed_restarts, ge=1)
    max_iters: int = Field(3000, ge=1, description="Descent steps per restart")
    initial_step: float = Field(0.05, gt=0)
    min_step: float = Field(1e-10, gt=0)
    max_step: float = Field(10.0, gt=0)
    armijo: float = Field(1e-4, gt=0, lt=1, description="Sufficient-decrease constant of the line search")
    shrink: float = Field(0.5, gt=0, lt=1, description="Step reduction per backtracking step")
    max_backtracks: int = Field(40, ge=1)
    gradient_tolerance: float = Field(1e-10, gt=0)
    success_threshold: float = Field(1e-10, gt=0, description="Residual below which a realization is declared")
    min_separation: float = Field(
        1e-6, gt=0, description="Squared distance below which two vertices of a restart count as coincident"
    )
    rng_seed: int = 0
    jobs: int = Field(1, ge=1, description="Worker processes for the restarts")
    record_history: bool = Field(False, description="Keep every accepted residual of every restart")


class EmbeddingResult(BaseModel):
    coordinates: List[List[float]]
    residual: float
    restart_residuals: List[float]
    best_restart: int
    declared: Declared
    success_threshold: float
    degenerate_restarts: List[int] = Field(
        default_factory=list, description="Restarts that ended with two vertices on the same point"
    )
    histories: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _consistent(self):
        if not 0 <= self.best_restart < len(self.restart_residuals):
            raise ValueError("best_restart must index restart_residuals")
        if self.residual != self.restart_residuals[self.best_restart]:
            raise ValueError("residual must be the residual of the best restart")
        if self.residual != min(_eligible_residuals(self.restart_residuals, self.degenerate_restarts)):
            raise ValueError("residual must be the minimum over the non-degenerate restarts")
        realized = self.residual < self.success_threshold and self.best_restart not in self.degenerate_restarts
        if (self.declared is Declared.REALIZED) != realized:
            raise ValueError("declared must be realized exactly when a non-degenerate restart is below the threshold")
        return self

    @property
    def realized(self) -> bool:
        return self.declared is Declared.REALIZED

    def to_point_set(self, tolerance: Optional[float] = None) -> PointSet:
        """
        Raises:
            PointSetError: If two of the best coordinates coincide
        """
        return PointSet.floating(self.coordinates, tolerance)


def _eligible_residuals(residuals: List[float], degenerate: List[int]) -> List[float]:
    # falls back to every restart when all of them collapsed
    eligible = [f for i, f in enumerate(residuals) if i not in degenerate]
    return eligible or residuals


def _min_separation(x: np.ndarray) -> float:
    if x.shape[0] < 2:
        return float("inf")
    return float(pdist(x, "sqeuclidean").min())


def _edge_array(g: Graph) -> np.ndarray:
    edges = g.edges()
    return np.array(edges, dtype=np.intp).reshape(len(edges), 2)


def _stress(x: np.ndarray, edges: np.ndarray) -> float:
    diff = x[edges[:, 0]] - x[edges[:, 1]]
    residuals = np.einsum("ij,ij->i", diff, diff) - 1.0
    return float(residuals @ residuals)


def _stress_gradient(x: np.ndarray, edges: np.ndarray) -> np.ndarray:
    diff = x[edges[:, 0]] - x[edges[:, 1]]
    residuals = np.einsum("ij,ij->i", diff, diff) - 1.0
    pull = 4.0 * residuals[:, None] * diff
    grad = np.zeros_like(x)
    np.add.at(grad, edges[:, 0], pull)
    np.add.at(grad, edges[:, 1], -pull)
    return grad


def _coords(coords, g: Graph) -> np.ndarray:
    x = np.asarray(coords, dtype=float)
    if x.ndim != 2 or x.shape[0] != g.n:
        raise ValueError(f"Expected coordinates of shape ({g.n}, d), got {x.shape}")
    return x


def stress(coords, g: Graph) -> float:
    """Sum over the edges of (|p_i - p_j|^2 - 1)^2."""
    return _stress(_coords(coords, g), _edge_array(g))


def stress_gradient(coords, g: Graph) -> np.ndarray:
    """Analytic gradient of stress: the row of p_i is sum over edges ij of 4(|p_i - p_j|^2 - 1)(p_i - p_j)."""
    return _stress_gradient(_coords(coords, g), _edge_array(g))


def _descend(edges: np.ndarray, n: int, cfg: EmbedConfig, index: int) -> Tuple[np.ndarray, float, List[float]]:
    """One restart: Barzilai-Borwein trial steps with Armijo backtracking, so residuals never increase."""
    rng = np.random.default_rng(cfg.rng_seed + index)
    x = rng.uniform(-1.0, 1.0, size=(n, cfg.d))
    f = _stress(x, edges)
    grad = _stress_gradient(x, edges)
    history = [f]
    step = cfg.initial_step
    prev_x: Optional[np.ndarray] = None
    prev_grad: Optional[np.ndarray] = None

    for _ in range(cfg.max_iters):
        gg = float(np.vdot(grad, grad))
        if f < cfg.success_threshold / 100 or np.sqrt(gg) < cfg.gradient_tolerance:
            break
        if prev_x is not None:
            s = (x - prev_x).ravel()
            y = (grad - prev_grad).ravel()
            sy = float(s @ y)
            if sy > 0:
                step = min(max(float(s @ s) / sy, cfg.min_step), cfg.max_step)

        t = step
        accepted = False
        for _ in range(cfg.max_backtracks):
            candidate = x - t * grad
            f_candidate = _stress(candidate, edges)
            if f_candidate <= f - cfg.armijo * t * gg:
                accepted = True
                break
            t *= cfg.shrink
        if not accepted:
            break

        prev_x, prev_grad = x, grad
        x, f = candidate, f_candidate
        grad = _stress_gradient(x, edges)
        history.append(f)
    return x, f, history


def _run_restart(edges: np.ndarray, n: int, cfg: EmbedConfig, index: int) -> Tuple[np.ndarray, float, List[float]]:
    x, f, history = _descend(edges, n, cfg, index)
    logger.debug("restart %d: residual %.3e after %d steps", index, f, len(history) - 1)
    return x, f, history


def embed(g: Graph, cfg: EmbedConfig) -> EmbeddingResult:
    """
    Multi-start search for coordinates in R^d putting every edge of g at unit length.

    Restart i starts from coordinates drawn uniformly from [-1, 1]^d with seed
    rng_seed + i. A restart whose vertices come within min_separation (squared)
    of each other is degenerate and only wins when every restart is. The best
    remaining restart wins; ties go to the lowest index.

    Args:
        g: Graph to realize
        cfg: Dimension, restart count, step control and threshold

    Returns:
        EmbeddingResult with the best coordinates and every restart's residual
    """
    started = time.monotonic()
    edges = _edge_array(g)
    indices = range(cfg.restarts)
    if cfg.jobs > 1 and cfg.restarts > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as executor:
            outcomes = list(executor.map(_run_restart, *zip(*((edges, g.n, cfg, i) for i in indices))))
    else:
        outcomes = [_run_restart(edges, g.n, cfg, i) for i in indices]

    residuals = [f for _, f, _ in outcomes]
    degenerate = [i for i, (x, _, _) in enumerate(outcomes) if _min_separation(x) <= cfg.min_separation]
    candidates = [i for i in range(len(outcomes)) if i not in degenerate] or list(range(len(outcomes)))
    best = min(candidates, key=lambda i: (residuals[i], i))
    realized = residuals[best] < cfg.success_threshold and best not in degenerate
    declared = Declared.REALIZED if realized else Declared.INCONCLUSIVE
    if degenerate:
        logger.debug("restarts %s collapsed two vertices onto one point", degenerate)
    logger.info(
        "embedding n=%d m=%d in R^%d: best residual %.3e (restart %d of %d, %d degenerate), %s in %.1fs",
        g.n, len(edges), cfg.d, residuals[best], best, cfg.restarts, len(degenerate), declared.value,
        time.monotonic() - started,
    )
    return EmbeddingResult(
        coordinates=outcomes[best][0].tolist(),
        residual=residuals[best],
        restart_residuals=residuals,
        best_restart=best,
        declared=declared,
        success_threshold=cfg.success_threshold,
        degenerate_restarts=degenerate,
        histories=[h for _, _, h in outcomes] if cfg.record_history else None,
    )
