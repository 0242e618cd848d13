"""
Generators for the named point sets and fixture graphs.

Point sets come from explicit constructions (the regular simplex, the two-simplex
construction with 2d+4 points, the Larman-Rogers cube sets, the Moser spindle).
Pure graph fixtures are transcribed in data/fixtures.json, whose SHA-256 is
checked on load.
"""
import hashlib
import itertools
import json
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator
from scipy.linalg import null_space

from src.aeq_search.errors import GraphError, UnsupportedDimensionError
from src.aeq_search.geometry import PointSet, unit_distance_graph
from src.aeq_search.graphcore import Graph

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
FIXTURE_FILE = DATA_DIR / "fixtures.json"
FIXTURE_CHECKSUM_FILE = DATA_DIR / "fixtures.json.sha256"

# Larman-Rogers sets live on the lattice scaled by 1/sqrt(8)
LARMAN_ROGERS_SCALE = 8

# weights of the extra axes per dimension; extension points take every sign pattern +-1 on them
LARMAN_ROGERS_EXTENSIONS = {
    5: [],
    6: [3],
    7: [2, 1],
    8: [1, 1, 1],
}


class FixtureSpec(BaseModel):
    description: str = ""
    n: int = Field(..., ge=1, le=64)
    dimension: int = Field(..., ge=2, description="Dimension in which the graph is abstract almost-equidistant")
    realizable: bool = Field(..., description="Whether the graph has a unit-distance realization in that dimension")
    edges: Optional[List[List[int]]] = None
    circulant: Optional[List[int]] = Field(None, description="Connection set of a circulant graph on Z_n")

    @model_validator(mode="after")
    def _one_edge_source(self):
        if (self.edges is None) == (self.circulant is None):
            raise ValueError("A fixture gives exactly one of edges or circulant")
        return self

    def graph(self) -> Graph:
        if self.circulant is not None:
            pairs = {tuple(sorted((i, (i + s) % self.n))) for i in range(self.n) for s in self.circulant}
            return Graph.from_edges(self.n, sorted(pairs))
        return Graph.from_edges(self.n, [tuple(edge) for edge in self.edges])


class FixtureFile(BaseModel):
    version: int
    fixtures: Dict[str, FixtureSpec]


@dataclass(frozen=True)
class NamedFixture:
    name: str
    graph: Graph
    point_set: Optional[PointSet] = None
    dimension: Optional[int] = None
    realizable: Optional[bool] = None


@lru_cache(maxsize=1)
def load_fixture_file() -> FixtureFile:
    """
    Read and checksum-verify the fixture file.

    Raises:
        GraphError: If the checksum does not match or the file does not validate
    """
    raw = FIXTURE_FILE.read_bytes()
    expected = FIXTURE_CHECKSUM_FILE.read_text(encoding="ascii").split()[0]
    actual = hashlib.sha256(raw).hexdigest()
    if actual != expected:
        raise GraphError(f"{FIXTURE_FILE.name} checksum mismatch: expected {expected}, got {actual}")
    try:
        return FixtureFile.model_validate(json.loads(raw))
    except ValidationError as e:
        raise GraphError(f"{FIXTURE_FILE.name} is malformed: {e.errors()[0]['msg']}") from e


def simplex_points(d: int) -> PointSet:
    """
    Vertices of a regular unit d-simplex.

    The simplex sits in the hyperplane sum(x) = 1/sqrt(2) of R^(d+1) as the points
    e_i / sqrt(2), stored exactly as the unit vectors e_i with scale 2.
    """
    if d < 1:
        raise UnsupportedDimensionError(f"A simplex needs d >= 1, got {d}")
    return PointSet.exact(np.eye(d + 1, dtype=int).tolist(), scale=2)


def hyperplane_basis(d: int) -> np.ndarray:
    """Orthonormal basis of {x in R^(d+1): sum(x) = 0} as a (d+1, d) array."""
    return null_space(np.ones((1, d + 1)))


@dataclass
class TwoSimplexFrame:
    """Intermediate quantities of the 2d+4 point construction, in R^(d+1) coordinates."""

    d: int
    simplex: np.ndarray
    reflections: np.ndarray
    o: np.ndarray
    c: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    radius: float
    theta: float

    def rotate(self, p: np.ndarray) -> np.ndarray:
        """Rotate p about o by theta in the plane spanned by u1 and u2; the orthogonal part is fixed."""
        v = p - self.o
        a, b = v @ self.u1, v @ self.u2
        rest = v - a * self.u1 - b * self.u2
        cos, sin = math.cos(self.theta), math.sin(self.theta)
        return self.o + rest + (a * cos - b * sin) * self.u1 + (a * sin + b * cos) * self.u2

    def rotated(self) -> np.ndarray:
        return np.array([self.rotate(p) for p in self.simplex])

    def points(self) -> np.ndarray:
        """The simplex, its rotated copy, and the reflections of x0 and x1, in R^(d+1)."""
        return np.vstack([self.simplex, self.rotated(), self.reflections[:2]])


def two_simplex_frame(d: int, sign: int = 1) -> TwoSimplexFrame:
    if d < 3:
        raise UnsupportedDimensionError(f"The two-simplex construction needs d >= 3, got {d}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be 1 or -1, got {sign}")
    simplex = np.eye(d + 1) / math.sqrt(2)
    total = simplex.sum(axis=0)
    # reflection of x_i in the hyperplane of the opposite facet
    reflections = (2 / d) * total - (1 + 2 / d) * simplex
    o = (reflections[0] + reflections[1]) / 2
    c = (simplex[0] + simplex[1]) / 2

    radius = float(np.linalg.norm(c - o))
    u1 = (c - o) / radius
    w = simplex[2] - o
    w = w - (w @ u1) * u1
    u2 = w / np.linalg.norm(w)
    theta = sign * 2 * math.asin(1 / (2 * radius))
    return TwoSimplexFrame(
        d=d, simplex=simplex, reflections=reflections, o=o, c=c, u1=u1, u2=u2, radius=radius, theta=theta,
    )


def two_simplex_construction(d: int, sign: int = 1, tolerance: Optional[float] = None) -> PointSet:
    """
    Almost-equidistant set of 2d+4 points in R^d.

    A regular simplex S, its image under a rotation that moves x0 and x1 by
    exactly 1 and fixes the line through the reflections x0' and x1', and those
    two reflections.

    Args:
        d: Dimension, at least 3
        sign: Direction of the rotation
        tolerance: Floating tolerance of the returned point set

    Returns:
        Floating PointSet in R^d, ordered S, rotated S, x0', x1'
    """
    frame = two_simplex_frame(d, sign)
    coordinates = (frame.points() - frame.o) @ hyperplane_basis(d)
    return PointSet.floating(coordinates, tolerance)


def larman_rogers(d: int) -> PointSet:
    """
    Larman-Rogers almost-equidistant sets for d = 5..8, exact with scale 8.

    The base is the 16 vertices of {+-1}^5 with an odd number of positive signs.
    The extensions add points on extra axes that are at unit distance from every
    cube vertex: +-sqrt(3/8) e6 for d=6, (+-1/2, +-1/sqrt(8)) for d=7 and
    {+-1/sqrt(8)}^3 for d=8.
    """
    if d not in LARMAN_ROGERS_EXTENSIONS:
        raise UnsupportedDimensionError(f"Larman-Rogers sets are available for d in 5..8, got {d}")
    extra = LARMAN_ROGERS_EXTENSIONS[d]
    cube = [list(signs) for signs in itertools.product((1, -1), repeat=5) if signs.count(1) % 2 == 1]
    points = [p + [0] * len(extra) for p in cube]
    if extra:
        points += [[0] * 5 + list(signs) for signs in itertools.product((1, -1), repeat=len(extra))]
    return PointSet.exact(points, scale=LARMAN_ROGERS_SCALE, axis_weights=[1] * 5 + extra)


def moser_spindle() -> PointSet:
    """
    The Moser spindle, built from two rhombi of unit triangles sharing the apex A.

    Each rhombus A, B, C, D has its long diagonal AD of length sqrt(3); the second
    is the first rotated about A until the far vertices are at distance 1.
    Vertex order: A, B1, C1, D1, B2, C2, D2.
    """
    def rhombus(angle: float) -> List[np.ndarray]:
        def direction(a: float) -> np.ndarray:
            return np.array([math.cos(a), math.sin(a)])
        return [direction(angle + math.pi / 6), direction(angle - math.pi / 6), math.sqrt(3) * direction(angle)]

    alpha = 2 * math.asin(1 / (2 * math.sqrt(3)))
    points = [np.zeros(2)] + rhombus(0.0) + rhombus(alpha)
    return PointSet.floating(points)


def cross_polytope(d: int) -> Graph:
    """Graph of the d-dimensional cross-polytope on 2d vertices; i and i+d are the non-adjacent diagonals."""
    if d < 1:
        raise UnsupportedDimensionError(f"A cross-polytope needs d >= 1, got {d}")
    n = 2 * d
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n) if j != i + d])


# fixtures that come with coordinates
POINT_FIXTURES: Dict[str, Callable[[], PointSet]] = {
    "moser_spindle": moser_spindle,
    "biaugmented_pair_3d": lambda: two_simplex_construction(3),
}


def fixture_names() -> List[str]:
    return sorted(set(load_fixture_file().fixtures) | set(POINT_FIXTURES))


def named_point_set(name: str) -> PointSet:
    if name not in POINT_FIXTURES:
        raise GraphError(f"No coordinates for fixture '{name}'; known: {sorted(POINT_FIXTURES)}")
    return POINT_FIXTURES[name]()


def named_fixture(name: str) -> NamedFixture:
    """
    Look up a fixture by name.

    Raises:
        GraphError: If the name is unknown
    """
    fixtures = load_fixture_file().fixtures
    point_set = named_point_set(name) if name in POINT_FIXTURES else None
    if name in fixtures:
        spec = fixtures[name]
        return NamedFixture(
            name=name, graph=spec.graph(), point_set=point_set, dimension=spec.dimension, realizable=spec.realizable,
        )
    if point_set is not None:
        return NamedFixture(
            name=name, graph=unit_distance_graph(point_set), point_set=point_set, dimension=point_set.d, realizable=True,
        )
    raise GraphError(f"Unknown fixture '{name}'; known: {fixture_names()}")


def named_graph(name: str) -> Graph:
    return named_fixture(name).graph
