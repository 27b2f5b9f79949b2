"""
Small-scale polytope machinery in (R0, R1, R2) rate space.

Regions are comprehensive: every region stands for the downward closure of
its vertices inside the nonnegative octant.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import BadWeight, EmptyRegion, SliceOutOfRange
from .rate_functionals import RatePolytope

logger = logging.getLogger(__name__)

GEOMETRY_TOL = 1e-9
_SINGULAR_DET = 1e-12
_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class RatePoint:
    """Rate triple in bits per channel use."""

    r0: float
    r1: float
    r2: float

    def __post_init__(self):
        if min(self.r0, self.r1, self.r2) < 0:
            raise ValueError(f"rates must be >= 0, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.r0, self.r1, self.r2])


PointsLike = Union[np.ndarray, Sequence[RatePoint], Sequence[Sequence[float]]]


@dataclass(frozen=True, eq=False)
class RateRegion:
    """Extreme points of a comprehensive convex region, canonically ordered."""

    vertices: np.ndarray
    generator_meta: Tuple[Dict[str, object], ...] = field(default=())

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=float).reshape(-1, 3)
        vertices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "generator_meta", tuple(self.generator_meta))

    def __eq__(self, other):
        if not isinstance(other, RateRegion):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices)

    __hash__ = None


def as_point_array(points: PointsLike) -> np.ndarray:
    rows = [p.as_array() if isinstance(p, RatePoint) else p for p in points]
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    if np.any(arr < -GEOMETRY_TOL):
        raise ValueError("rate points must be nonnegative")
    return np.maximum(arr, 0.0)


def canonical_order(points: np.ndarray) -> np.ndarray:
    """Lexicographic (r0, r1, r2) order."""
    if len(points) == 0:
        return points
    order = np.lexsort(points.T[::-1])
    return points[order]


def dedup(points: np.ndarray, tol: float = GEOMETRY_TOL) -> np.ndarray:
    """Drop points within L-infinity distance `tol` of an earlier kept point."""
    points = canonical_order(np.asarray(points, dtype=float))
    kept: List[np.ndarray] = []
    for p in points:
        if kept and np.min(np.max(np.abs(np.asarray(kept) - p), axis=1)) <= tol:
            continue
        kept.append(p)
    return np.asarray(kept).reshape(-1, points.shape[1] if points.ndim == 2 else 3)


# ---------------------------------------------------------------------------
# polytope vertex enumeration
# ---------------------------------------------------------------------------


class _VertexSolver:
    """
    Basic solutions of {A R <= b, R >= 0} for a fixed constraint matrix.

    Every nonsingular triple of planes is inverted once; a new rhs only
    costs one batched matrix-vector product.
    """

    def __init__(self, coefficients: Tuple[Tuple[float, ...], ...]):
        planes = np.vstack([np.asarray(coefficients, dtype=float), -np.eye(3)])
        triples = np.array(list(itertools.combinations(range(len(planes)), 3)))
        systems = planes[triples]
        keep = np.abs(np.linalg.det(systems)) > _SINGULAR_DET
        self.planes = planes
        self.triples = triples[keep]
        self.inverses = np.linalg.inv(systems[keep])

    def feasible_vertices(self, rhs: np.ndarray) -> np.ndarray:
        b = np.concatenate([np.asarray(rhs, dtype=float), np.zeros(3)])
        candidates = np.einsum("tij,tj->ti", self.inverses, b[self.triples])
        slack = candidates @ self.planes.T - b
        feasible = np.all(slack <= GEOMETRY_TOL, axis=1)
        return np.maximum(candidates[feasible], 0.0)


@lru_cache(maxsize=64)
def _solver_for(coefficients: Tuple[Tuple[float, ...], ...]) -> _VertexSolver:
    return _VertexSolver(coefficients)


def _poly_key(poly: RatePolytope) -> Tuple[Tuple[float, ...], ...]:
    return tuple(tuple(row) for row in poly.coefficients.tolist())


def polytope_vertex_array(poly: RatePolytope) -> np.ndarray:
    """Deduplicated, canonically ordered vertices as an (n, 3) array."""
    raw = _solver_for(_poly_key(poly)).feasible_vertices(poly.rhs)
    if len(raw) == 0:
        return np.zeros((1, 3))
    return dedup(raw)


def polytope_vertices(poly: RatePolytope) -> List[RatePoint]:
    """Extreme points of a rate polytope."""
    return [RatePoint(*map(float, v)) for v in polytope_vertex_array(poly)]


def polytope_support(poly: RatePolytope, w: np.ndarray) -> Tuple[float, np.ndarray]:
    """max of w . R over the polytope and the first maximizing vertex."""
    vertices = _solver_for(_poly_key(poly)).feasible_vertices(poly.rhs)
    vertices = canonical_order(vertices) if len(vertices) else np.zeros((1, 3))
    values = vertices @ w
    best = int(np.argmax(values))
    return float(values[best]), vertices[best]


# ---------------------------------------------------------------------------
# hulls, support functions, containment
# ---------------------------------------------------------------------------


def _check_weight(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (3,) or not np.all(np.isfinite(w)):
        raise BadWeight(f"direction must be a finite 3-vector, got {w!r}")
    return w


def support(region: RateRegion, w: Sequence[float]) -> float:
    """max over the region's vertices of w . v"""
    if len(region.vertices) == 0:
        raise EmptyRegion("support of an empty region")
    return float(np.max(region.vertices @ _check_weight(w)))


def transfer_closure(points: PointsLike) -> List[RatePoint]:
    """
    Add the two extreme common-to-private transfers of every point.

    (R0, R1, R2) achievable implies (0, R1 + R0, R2) and (0, R1, R2 + R0)
    are; intermediate transfers come back through the hull.
    """
    arr = as_point_array(points)
    out = [arr]
    movable = arr[arr[:, 0] > 0]
    if len(movable):
        to_user1 = np.column_stack(
            [np.zeros(len(movable)), movable[:, 1] + movable[:, 0], movable[:, 2]]
        )
        to_user2 = np.column_stack(
            [np.zeros(len(movable)), movable[:, 1], movable[:, 2] + movable[:, 0]]
        )
        out.extend([to_user1, to_user2])
    return [RatePoint(*map(float, v)) for v in np.vstack(out)]


def _comprehensive(points: np.ndarray) -> np.ndarray:
    masks = np.array(list(itertools.product((0.0, 1.0), repeat=3)))
    return (points[None, :, :] * masks[:, None, :]).reshape(-1, 3)


def _extreme_points(points: np.ndarray) -> np.ndarray:
    """Extreme points of the convex hull, tolerating lower-dimensional sets."""
    if len(points) <= 1:
        return points
    centered = points - points.mean(axis=0)
    _, singular, basis = np.linalg.svd(centered, full_matrices=False)
    scale = max(1.0, float(np.abs(points).max()))
    rank = int(np.sum(singular > GEOMETRY_TOL * scale))
    if rank == 0:
        return points[:1]
    coords = centered @ basis[:rank].T
    if rank == 1:
        return points[[int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))]]
    try:
        qhull = ConvexHull(coords)
    except QhullError:
        logger.debug("qhull failed on %d points, retrying with joggle", len(points))
        qhull = ConvexHull(coords, qhull_options="QJ")
    return points[np.sort(qhull.vertices)]


def hull(points: PointsLike, meta: Sequence[Dict[str, object]] = ()) -> RateRegion:
    """Comprehensive convex hull (time sharing plus downward closure)."""
    arr = as_point_array(points)
    if len(arr) == 0:
        raise EmptyRegion("hull of an empty point set")
    augmented = dedup(_comprehensive(arr))
    extremes = dedup(_extreme_points(augmented))
    return RateRegion(vertices=extremes, generator_meta=tuple(meta))


@dataclass(frozen=True)
class ContainmentReport:
    ok: bool
    worst_gap: float
    worst_dir: Tuple[float, float, float]


def contains(
    outer: RateRegion,
    inner: RateRegion,
    directions: Sequence[Sequence[float]],
    tol: float = GEOMETRY_TOL,
) -> ContainmentReport:
    """Support-function test of inner being inside outer."""
    directions = np.asarray(directions, dtype=float).reshape(-1, 3)
    if len(outer.vertices) == 0 or len(inner.vertices) == 0:
        raise EmptyRegion("containment needs two nonempty regions")
    gaps = np.max(inner.vertices @ directions.T, axis=0) - np.max(
        outer.vertices @ directions.T, axis=0
    )
    worst = int(np.argmax(gaps))
    return ContainmentReport(
        ok=bool(np.all(gaps <= tol)),
        worst_gap=float(gaps[worst]),
        worst_dir=tuple(float(x) for x in directions[worst]),
    )


def octant_directions(n: int) -> np.ndarray:
    """Deterministic Fibonacci spread of `n` unit vectors in the nonnegative octant."""
    if n < 1:
        raise BadWeight("need at least one direction")
    i = np.arange(n)
    z = (i + 0.5) / n
    radius = np.sqrt(1.0 - z**2)
    theta = np.mod(i * _GOLDEN_ANGLE, math.pi / 2)
    return np.column_stack([z, radius * np.cos(theta), radius * np.sin(theta)])


def region_slice(region: RateRegion, fixed_r0: float) -> np.ndarray:
    """
    (R1, R2) polygon of the region at R0 = fixed_r0.

    Vertices come counterclockwise, starting from the lexicographically
    smallest one.
    """
    vertices = region.vertices
    if len(vertices) == 0:
        raise EmptyRegion("slice of an empty region")
    low, high = vertices[:, 0].min(), vertices[:, 0].max()
    if not low - GEOMETRY_TOL <= fixed_r0 <= high + GEOMETRY_TOL:
        raise SliceOutOfRange(
            f"R0 = {fixed_r0} is outside the region's range [{low}, {high}]"
        )

    offset = vertices[:, 0] - fixed_r0
    cut = [vertices[np.abs(offset) <= GEOMETRY_TOL, 1:]]
    i, j = np.triu_indices(len(vertices), k=1)
    crossing = offset[i] * offset[j] < 0
    i, j = i[crossing], j[crossing]
    if len(i):
        t = (fixed_r0 - vertices[i, 0]) / (vertices[j, 0] - vertices[i, 0])
        cut.append(vertices[i, 1:] + t[:, None] * (vertices[j, 1:] - vertices[i, 1:]))
    section = dedup(np.vstack(cut))

    if len(section) <= 2:
        return section
    try:
        qhull = ConvexHull(section)
        ring = section[qhull.vertices]
    except QhullError:
        # collinear section: keep the two endpoints
        return _extreme_points(section)
    start = int(np.lexsort(ring.T[::-1])[0])
    return np.roll(ring, -start, axis=0)
