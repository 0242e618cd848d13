"""
Point sets, the almost-equidistant verifier and the sphere of points at unit distance from a unit clique.

Two arithmetics are supported. In exact-scaled mode every coordinate is an
integer k standing for k * sqrt(w / s), where s is the scale and w the weight of
its axis (1 unless given), so squared distances are integers and a pair is at
unit distance iff its scaled squared distance equals s. Floating mode compares
squared distances with 1 up to a tolerance.
"""
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator
from scipy.linalg import null_space
from scipy.spatial.distance import pdist, squareform

from src.aeq_search.config import get_settings
from src.aeq_search.errors import PointSetError
from src.aeq_search.graphcore import MAX_VERTICES, Graph, complement, iter_bits

logger = logging.getLogger(__name__)

Number = Union[int, float]


class ArithmeticMode(str, Enum):
    EXACT_SCALED = "exact_scaled"
    FLOATING = "floating"


class Arithmetic(BaseModel):
    mode: ArithmeticMode
    scale: Optional[int] = Field(None, gt=0, description="Squared length of a unit in exact mode")
    axis_weights: Optional[List[int]] = Field(None, description="Per-axis integer weights in exact mode")
    tolerance: Optional[float] = Field(None, gt=0, description="Tolerance on squared distances in floating mode")

    @model_validator(mode="after")
    def _check_mode_fields(self):
        if self.mode is ArithmeticMode.EXACT_SCALED:
            if self.scale is None:
                raise ValueError("exact_scaled arithmetic needs a scale")
            if self.tolerance is not None:
                raise ValueError("exact_scaled arithmetic takes no tolerance")
            if self.axis_weights is not None and any(w < 1 for w in self.axis_weights):
                raise ValueError("axis weights must be positive integers")
        else:
            if self.scale is not None or self.axis_weights is not None:
                raise ValueError("floating arithmetic takes neither scale nor axis weights")
            if self.tolerance is None:
                self.tolerance = get_settings().float_tolerance
        return self

    @classmethod
    def exact(cls, scale: int, axis_weights: Optional[Sequence[int]] = None) -> "Arithmetic":
        return cls(
            mode=ArithmeticMode.EXACT_SCALED,
            scale=scale,
            axis_weights=None if axis_weights is None else list(axis_weights),
        )

    @classmethod
    def floating(cls, tolerance: Optional[float] = None) -> "Arithmetic":
        return cls(mode=ArithmeticMode.FLOATING, tolerance=tolerance)

    @property
    def is_exact(self) -> bool:
        return self.mode is ArithmeticMode.EXACT_SCALED

    def weights(self, d: int) -> List[int]:
        return list(self.axis_weights) if self.axis_weights is not None else [1] * d

    def is_unit(self, squared: Number) -> bool:
        if self.is_exact:
            return squared == self.scale
        return abs(squared - 1.0) <= self.tolerance

    def is_zero(self, squared: Number) -> bool:
        if self.is_exact:
            return squared == 0
        return squared <= self.tolerance


def squared_distance(p: Sequence[Number], q: Sequence[Number], arithmetic: Optional[Arithmetic] = None) -> Number:
    """
    Squared Euclidean distance between two points.

    Args:
        p: First point
        q: Second point
        arithmetic: Exact-scaled arithmetic gives the integer Σ w_i (p_i - q_i)^2,
            to be compared with the scale; None or floating gives a float

    Returns:
        Exact integer or float squared distance

    Raises:
        PointSetError: If the points have different dimensions
    """
    if len(p) != len(q):
        raise PointSetError(f"Dimension mismatch: {len(p)} vs {len(q)}")
    if arithmetic is not None and arithmetic.is_exact:
        weights = arithmetic.weights(len(p))
        if len(weights) != len(p):
            raise PointSetError(f"Expected {len(weights)} coordinates for the axis weights, got {len(p)}")
        return sum(w * (int(a) - int(b)) ** 2 for w, a, b in zip(weights, p, q))
    diff = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    return float(diff @ diff)


class PointSet(BaseModel):
    dimension: int = Field(..., ge=1, description="Ambient dimension d")
    arithmetic: Arithmetic
    points: List[List[Number]] = Field(..., description="Coordinate vectors, integers in exact mode")

    @model_validator(mode="after")
    def _check_points(self):
        if len(self.points) > MAX_VERTICES:
            raise ValueError(f"At most {MAX_VERTICES} points are supported, got {len(self.points)}")
        for i, p in enumerate(self.points):
            if len(p) != self.dimension:
                raise ValueError(f"Point {i} has {len(p)} coordinates, expected {self.dimension}")
        if self.arithmetic.is_exact:
            weights = self.arithmetic.weights(self.dimension)
            if len(weights) != self.dimension:
                raise ValueError(f"{len(weights)} axis weights given for dimension {self.dimension}")
            for i, p in enumerate(self.points):
                if not all(isinstance(x, int) and not isinstance(x, bool) for x in p):
                    raise ValueError(f"Point {i} has non-integer coordinates in exact_scaled mode")
        else:
            self.points = [[float(x) for x in p] for p in self.points]
            for i, p in enumerate(self.points):
                if not all(math.isfinite(x) for x in p):
                    raise ValueError(f"Point {i} has non-finite coordinates")
        duplicate = self._first_duplicate()
        if duplicate is not None:
            raise ValueError(f"Points {duplicate[0]} and {duplicate[1]} coincide")
        return self

    def _first_duplicate(self) -> Optional[Tuple[int, int]]:
        squared = self.squared_distances()
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if self.arithmetic.is_zero(squared[i][j]):
                    return i, j
        return None

    @classmethod
    def build(cls, points: Sequence[Sequence[Number]], arithmetic: Arithmetic, dimension: Optional[int] = None) -> "PointSet":
        """
        Validate and build a point set.

        Raises:
            PointSetError: If the points do not form a valid point set
        """
        points = [list(p) for p in points]
        if dimension is None:
            if not points:
                raise PointSetError("Cannot infer the dimension of an empty point set")
            dimension = len(points[0])
        try:
            return cls(dimension=dimension, arithmetic=arithmetic, points=points)
        except ValidationError as e:
            raise PointSetError(_describe_validation_error(e)) from e

    @classmethod
    def exact(cls, points: Sequence[Sequence[int]], scale: int, axis_weights: Optional[Sequence[int]] = None) -> "PointSet":
        return cls.build([[int(x) for x in p] for p in points], Arithmetic.exact(scale, axis_weights))

    @classmethod
    def floating(cls, points, tolerance: Optional[float] = None) -> "PointSet":
        return cls.build(np.asarray(points, dtype=float).tolist(), Arithmetic.floating(tolerance))

    @property
    def d(self) -> int:
        return self.dimension

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return self.n

    def coordinates(self) -> np.ndarray:
        """Real coordinates as an (n, d) array."""
        array = np.asarray(self.points, dtype=float).reshape(self.n, self.dimension)
        if self.arithmetic.is_exact:
            factors = np.sqrt(np.asarray(self.arithmetic.weights(self.dimension), dtype=float) / self.arithmetic.scale)
            array = array * factors
        return array

    def to_floating(self, tolerance: Optional[float] = None) -> "PointSet":
        if not self.arithmetic.is_exact:
            return self
        return PointSet.floating(self.coordinates(), tolerance)

    def squared_distance(self, i: int, j: int) -> Number:
        return squared_distance(self.points[i], self.points[j], self.arithmetic)

    def squared_distances(self) -> List[List[Number]]:
        """Full matrix of squared distances, integers in exact mode."""
        if self.arithmetic.is_exact:
            return [[squared_distance(p, q, self.arithmetic) for q in self.points] for p in self.points]
        if self.n < 2:
            return [[0.0] * self.n for _ in range(self.n)]
        return squareform(pdist(np.asarray(self.points, dtype=float), "sqeuclidean")).tolist()

    def is_unit_pair(self, i: int, j: int) -> bool:
        return self.arithmetic.is_unit(self.squared_distance(i, j))


class VerificationStats(BaseModel):
    points: int
    unit_pairs: int
    non_unit_pairs: int
    triples: int = Field(..., description="Number of triples covered by the check")


class VerificationReport(BaseModel):
    ok: bool
    witness: Optional[Tuple[int, int, int]] = Field(None, description="First triple with no pair at unit distance")
    stats: VerificationStats

    @model_validator(mode="after")
    def _witness_iff_failed(self):
        if self.ok == (self.witness is not None):
            raise ValueError("A report carries a witness exactly when verification failed")
        return self


class SphereDescription(BaseModel):
    """Points at unit distance from every point of a unit clique of size k."""

    center: List[float]
    radius: float
    sphere_dim: int
    carrier_dim: int
    directions: List[List[float]] = Field(..., description="Orthonormal basis of the carrier's direction space, one row per vector")

    @model_validator(mode="after")
    def _check_dims(self):
        if self.carrier_dim != self.sphere_dim + 1:
            raise ValueError("carrier_dim must be sphere_dim + 1")
        if len(self.directions) != self.carrier_dim:
            raise ValueError(f"Expected {self.carrier_dim} carrier directions, got {len(self.directions)}")
        return self

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw count points uniformly from the sphere, as a (count, d) array."""
        gaussian = rng.standard_normal((count, self.carrier_dim))
        unit = gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)
        return np.asarray(self.center) + self.radius * unit @ np.asarray(self.directions)


def unit_distance_graph(ps: PointSet) -> Graph:
    """Graph on the points with an edge for every pair at unit distance."""
    if ps.n > MAX_VERTICES:
        raise PointSetError(f"At most {MAX_VERTICES} points are supported, got {ps.n}")
    if ps.n == 0:
        raise PointSetError("The unit-distance graph of an empty point set is undefined")
    squared = ps.squared_distances()
    rows = [0] * ps.n
    for i in range(ps.n):
        for j in range(i + 1, ps.n):
            if ps.arithmetic.is_unit(squared[i][j]):
                rows[i] |= 1 << j
                rows[j] |= 1 << i
    return Graph(ps.n, tuple(rows))


def is_almost_equidistant(ps: PointSet) -> VerificationReport:
    """
    Check that among any three points some pair is at unit distance.

    Returns:
        VerificationReport; on failure the witness is the lexicographically first
        triple of indices with no unit pair
    """
    g = unit_distance_graph(ps)
    far = complement(g).adj
    unit_pairs = g.edge_count
    stats = VerificationStats(
        points=ps.n,
        unit_pairs=unit_pairs,
        non_unit_pairs=ps.n * (ps.n - 1) // 2 - unit_pairs,
        triples=math.comb(ps.n, 3),
    )
    for i in range(ps.n):
        for j in iter_bits(far[i] >> (i + 1) << (i + 1)):
            common = far[i] & far[j] & ~((1 << (j + 1)) - 1)
            if common:
                k = (common & -common).bit_length() - 1
                logger.debug("Triple (%d, %d, %d) has no pair at unit distance", i, j, k)
                return VerificationReport(ok=False, witness=(i, j, k), stats=stats)
    return VerificationReport(ok=True, stats=stats)


def clique_sphere(ps: PointSet, clique: Sequence[int]) -> SphereDescription:
    """
    Describe the set of points at unit distance from every point of a unit clique.

    For a clique of k pairwise unit points this is the (d-k)-sphere of radius
    sqrt((k+1)/(2k)) centred at the clique's centroid, lying in the affine space
    through the centroid orthogonal to the clique's affine hull.

    Args:
        ps: Point set holding the clique
        clique: Indices of k <= d pairwise unit points

    Returns:
        SphereDescription with an orthonormal basis of the carrier directions

    Raises:
        PointSetError: If the indices are not a unit clique of size at most d
    """
    indices = list(dict.fromkeys(clique))
    k = len(indices)
    if not 1 <= k <= ps.d:
        raise PointSetError(f"Clique size must be between 1 and {ps.d}, got {k}")
    if any(not 0 <= i < ps.n for i in indices):
        raise PointSetError(f"Clique indices out of range for {ps.n} points: {list(clique)}")
    for a in range(k):
        for b in range(a + 1, k):
            if not ps.is_unit_pair(indices[a], indices[b]):
                raise PointSetError(f"Points {indices[a]} and {indices[b]} are not at unit distance")

    members = ps.coordinates()[indices]
    center = members.mean(axis=0)
    directions = null_space(members - center)
    if directions.shape[1] != ps.d - k + 1:
        raise PointSetError("Clique points are not affinely independent")
    return SphereDescription(
        center=center.tolist(),
        radius=math.sqrt((k + 1) / (2 * k)),
        sphere_dim=ps.d - k,
        carrier_dim=ps.d - k + 1,
        directions=directions.T.tolist(),
    )


def realizes(ps: PointSet, g: Graph) -> bool:
    """True iff every edge of g joins two points at unit distance; non-edges are unconstrained."""
    if ps.n != g.n:
        raise PointSetError(f"Point set has {ps.n} points but the graph has {g.n} vertices")
    return all(ps.is_unit_pair(i, j) for i, j in g.edges())


def _describe_validation_error(e: ValidationError) -> str:
    first = e.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "point set"
    return f"{location}: {first['msg']}"


def parse_point_set(text: Union[str, bytes]) -> PointSet:
    """
    Parse the JSON point-set format.

    Raises:
        PointSetError: With the JSON line and column of a syntax error, or the
            field path of a validation error
    """
    try:
        json.loads(text)
    except json.JSONDecodeError as e:
        raise PointSetError(f"line {e.lineno} column {e.colno}: {e.msg}") from e
    try:
        return PointSet.model_validate_json(text)
    except ValidationError as e:
        raise PointSetError(_describe_validation_error(e)) from e


def load_point_set(path: Union[str, Path]) -> PointSet:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise PointSetError(f"{path}: {e.strerror or e}") from e
    try:
        return parse_point_set(text)
    except PointSetError as e:
        raise PointSetError(f"{path}: {e}") from e


def dump_point_set(ps: PointSet, path: Optional[Union[str, Path]] = None) -> str:
    """Serialise ps to the JSON point-set format, writing it to path when given."""
    text = ps.model_dump_json(indent=2, exclude_none=True)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
