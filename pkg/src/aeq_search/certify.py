"""
Linear-algebra certificates behind the upper bound and the table of known bounds.

* rank_lower_bound: rank(A) >= (tr A)^2 / sum a_ij^2 for a non-zero symmetric A.
* build_skew_basis / lemma10_identity_check: unit vectors with pairwise inner
  product epsilon, rewritten in an orthonormal basis, and the identity
  sum_j (<x, w_j> - eps)^2 = (1 - eps)(|x|^2 - eps) + eps(<x, e> - sqrt(1 + (n-1) eps))^2.
* known_bounds: best known lower and upper bounds on the size of an
  almost-equidistant set in R^d.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator
from scipy.linalg import cholesky, null_space, svdvals

from src.aeq_search.errors import CertificateError

logger = logging.getLogger(__name__)

RANK_CUTOFF = 1e-9

ORTHONORMAL_TOLERANCE = 1e-10

# best known bounds for d = 1..9
TABLE_LOWER = {1: 4, 2: 7, 3: 10, 4: 12, 5: 16, 6: 18, 7: 20, 8: 24, 9: 24}
TABLE_UPPER = {1: 4, 2: 7, 3: 10, 4: 13, 5: 20, 6: 26, 7: 34, 8: 41, 9: 49}

# R(k, 3) for k = 3..11; the last two are the upper bounds in use, not exact values
RAMSEY_K3 = {3: 6, 4: 9, 5: 14, 6: 18, 7: 23, 8: 28, 9: 36, 10: 42, 11: 50}
RAMSEY_K3_EXACT_UP_TO = 9

LOWER_CONSTRUCTIONS = {
    1: "path_on_line",
    2: "moser_spindle",
    3: "two_simplex",
    4: "two_simplex",
    5: "larman_rogers",
    6: "larman_rogers",
    7: "larman_rogers",
    8: "larman_rogers",
    9: "larman_rogers",
}

BOUNDS_COLUMNS = ["d", "lower", "upper", "ramsey_upper", "ramsey_exact", "asymptotic_upper", "lower_construction"]


@dataclass(frozen=True)
class SymmetricMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise CertificateError(f"Expected a square matrix, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise CertificateError("Matrix is not symmetric")
        object.__setattr__(self, "entries", a)

    @property
    def m(self) -> int:
        return self.entries.shape[0]


MatrixLike = Union[SymmetricMatrix, np.ndarray, List[List[float]]]


def _as_symmetric(a: MatrixLike) -> SymmetricMatrix:
    return a if isinstance(a, SymmetricMatrix) else SymmetricMatrix(np.asarray(a, dtype=float))


def rank_lower_bound(a: MatrixLike) -> float:
    """
    Lower bound (sum of a_ii)^2 / (sum of a_ij^2) on the rank of a non-zero symmetric matrix.

    Raises:
        CertificateError: If the matrix is zero or not symmetric
    """
    matrix = _as_symmetric(a).entries
    frobenius = float(np.sum(matrix * matrix))
    if frobenius == 0.0:
        raise CertificateError("The rank bound needs a non-zero matrix")
    return float(np.trace(matrix)) ** 2 / frobenius


def numerical_rank(a: MatrixLike, cutoff: float = RANK_CUTOFF) -> int:
    """Number of singular values above cutoff."""
    matrix = a.entries if isinstance(a, SymmetricMatrix) else np.asarray(a, dtype=float)
    return int(np.sum(svdvals(matrix) > cutoff))


@dataclass
class SkewBasisInstance:
    """
    Unit vectors w_1..w_n of R^n with pairwise inner product epsilon, and the
    orthonormal basis e_i = w_i / sqrt(1 - eps) - lam * e with e = sum of the e_i.
    Vectors are stored as rows.
    """

    n: int
    epsilon: float
    lam: float
    w: np.ndarray
    basis: np.ndarray
    e: np.ndarray

    def gram_w(self) -> np.ndarray:
        return self.w @ self.w.T

    def gram_basis(self) -> np.ndarray:
        return self.basis @ self.basis.T


def skew_lambda(n: int, epsilon: float) -> float:
    return (-1 + math.sqrt(1 + epsilon * n / (1 - epsilon))) / n


def _random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _start_family(n: int, epsilon: float, t: int, seed: int) -> np.ndarray:
    gram = (1 - epsilon) * np.eye(t) + epsilon * np.ones((t, t))
    rows = np.zeros((t, n))
    rows[:, :t] = cholesky(gram, lower=True)
    family = rows @ _random_orthogonal(n, np.random.default_rng(seed))
    if not np.allclose(family @ family.T, gram, atol=ORTHONORMAL_TOLERANCE):
        raise CertificateError(f"Start family of {t} vectors with inner product {epsilon} is infeasible")
    return family


def _extend(family: np.ndarray, epsilon: float) -> np.ndarray:
    """One more unit vector with inner product epsilon to every row of family."""
    i, n = family.shape
    # the point of the affine subspace {<x, w_j> = eps} closest to the origin
    a = epsilon / (1 + (i - 1) * epsilon) * family.sum(axis=0)
    slack = 1 - float(a @ a)
    if slack < 0:
        raise CertificateError(f"No unit vector extends the family of {i} vectors")
    free = null_space(family)
    projector = free @ free.T
    for axis in range(n):
        u = projector[:, axis]
        norm = np.linalg.norm(u)
        if norm > 1e-8:
            return a + math.sqrt(slack) * u / norm
    raise CertificateError(f"The family of {i} vectors already spans R^{n}")


def build_skew_basis(n: int, epsilon: float, t: int = 1, seed: int = 0) -> SkewBasisInstance:
    """
    Grow an epsilon-correlated family of unit vectors to n vectors and rewrite it in an orthonormal basis.

    The first t vectors are a randomly rotated start family. Each further vector is
    the point of the affine subspace {<x, w_j> = eps for all j} closest to the
    origin, pushed onto the unit sphere along the first coordinate axis that has a
    non-zero projection orthogonal to the family.

    Args:
        n: Ambient dimension and final number of vectors
        epsilon: Pairwise inner product, 0 <= epsilon < 1
        t: Size of the start family, 1 <= t <= n
        seed: Seed of the random rotation of the start family

    Returns:
        SkewBasisInstance

    Raises:
        CertificateError: If the parameters are out of range or the family cannot be built
    """
    if not 0 <= epsilon < 1:
        raise CertificateError(f"epsilon must lie in [0, 1), got {epsilon}")
    if not 1 <= t <= n:
        raise CertificateError(f"Start family size must satisfy 1 <= t <= n, got t={t}, n={n}")

    family = _start_family(n, epsilon, t, seed)
    while family.shape[0] < n:
        family = np.vstack([family, _extend(family, epsilon)])

    lam = skew_lambda(n, epsilon)
    e = family.sum(axis=0) / math.sqrt(1 + (n - 1) * epsilon)
    basis = family / math.sqrt(1 - epsilon) - lam * e
    instance = SkewBasisInstance(n=n, epsilon=epsilon, lam=lam, w=family, basis=basis, e=e)
    if not np.allclose(instance.gram_basis(), np.eye(n), atol=ORTHONORMAL_TOLERANCE):
        raise CertificateError(f"Basis for n={n}, epsilon={epsilon} is not orthonormal to {ORTHONORMAL_TOLERANCE}")
    logger.debug("skew basis n=%d eps=%g lambda=%g", n, epsilon, lam)
    return instance


def lemma10_identity_check(instance: SkewBasisInstance, x) -> Tuple[float, float]:
    """
    Evaluate both sides of the epsilon-correlated Parseval identity at x.

    Returns:
        (lhs, rhs) where lhs = sum_j (<x, w_j> - eps)^2 and
        rhs = (1 - eps)(|x|^2 - eps) + eps(<x, e> - sqrt(1 + (n-1) eps))^2
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.n,):
        raise ValueError(f"Expected a vector of length {instance.n}, got shape {x.shape}")
    eps = instance.epsilon
    lhs = float(np.sum((instance.w @ x - eps) ** 2))
    rhs = (1 - eps) * (float(x @ x) - eps) + eps * (float(x @ instance.e) - math.sqrt(1 + (instance.n - 1) * eps)) ** 2
    return lhs, rhs


def _ceil_asymptotic(d: int) -> int:
    root = math.isqrt(d)
    if root * root == d:
        return 4 * (d * root + root)
    sqrt_d = math.sqrt(d)
    return math.ceil(4 * (d * sqrt_d + sqrt_d))


class BoundsReport(BaseModel):
    d: int = Field(..., ge=1)
    lower: int
    upper: int
    ramsey_upper: int = Field(..., description="R(d+2, 3) - 1")
    ramsey_exact: bool = Field(..., description="True only when R(d+2, 3) is known exactly")
    asymptotic_upper: int = Field(..., description="ceil(4 d^(3/2) + 4 sqrt(d))")
    lower_construction: str

    @model_validator(mode="after")
    def _ordered(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        return self


def known_bounds(d: int) -> BoundsReport:
    if d < 1:
        raise ValueError(f"Bounds are defined for d >= 1, got {d}")
    asymptotic = _ceil_asymptotic(d)
    k = d + 2
    if k in RAMSEY_K3:
        ramsey, exact = RAMSEY_K3[k] - 1, k <= RAMSEY_K3_EXACT_UP_TO
    else:
        ramsey, exact = math.comb(k + 1, 2) - 1, False
    return BoundsReport(
        d=d,
        lower=TABLE_LOWER.get(d, 2 * d + 4),
        upper=TABLE_UPPER.get(d, asymptotic),
        ramsey_upper=ramsey,
        ramsey_exact=exact,
        asymptotic_upper=asymptotic,
        lower_construction=LOWER_CONSTRUCTIONS.get(d, "two_simplex"),
    )


def bounds_table(max_d: int, dims: Optional[Iterable[int]] = None) -> pd.DataFrame:
    """One row per dimension, columns as in BOUNDS_COLUMNS."""
    dims = range(1, max_d + 1) if dims is None else dims
    return pd.DataFrame([known_bounds(d).model_dump() for d in dims], columns=BOUNDS_COLUMNS)


def format_bounds_table(frame: pd.DataFrame) -> str:
    """Aligned text with one column per dimension and rows lower and upper."""
    layout = frame.set_index("d")[["lower", "upper"]].T
    layout.columns = [f"d={d}" for d in layout.columns]
    return layout.to_string()
