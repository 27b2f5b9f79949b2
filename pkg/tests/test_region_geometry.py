"""Tests for polytope vertices, hulls, support functions and slices."""

import numpy as np
import pytest

from fading_bc.errors import BadWeight, EmptyRegion, SliceOutOfRange
from fading_bc.rate_functionals import INNER_PATTERNS, RatePolytope
from fading_bc.region_geometry import (
    RatePoint,
    RateRegion,
    contains,
    hull,
    octant_directions,
    polytope_support,
    polytope_vertex_array,
    polytope_vertices,
    region_slice,
    support,
    transfer_closure,
)


@pytest.fixture
def cube():
    return hull([(1.0, 1.0, 1.0)])


def random_polytopes(seed: int, count: int):
    rng = np.random.default_rng(seed)
    return [RatePolytope(INNER_PATTERNS, rng.uniform(0.0, 2.0, size=4)) for _ in range(count)]


class TestPolytopeVertices:
    """Test vertex enumeration of constraint polytopes."""

    def test_collapsed_common_rate(self):
        """Test that a zero R0+R2 cap leaves only the R1 axis."""
        poly = RatePolytope(INNER_PATTERNS, (2.0, 0.0, 2.0, 2.0))
        assert polytope_vertex_array(poly).tolist() == [[0.0, 0.0, 0.0], [0.0, 2.0, 0.0]]

    def test_box_vertices(self):
        """Test that a box has its eight corners as vertices."""
        poly = RatePolytope(((1, 0, 0), (0, 1, 0), (0, 0, 1)), (1.0, 2.0, 3.0))
        vertices = polytope_vertex_array(poly)
        assert len(vertices) == 8
        assert vertices[-1].tolist() == [1.0, 2.0, 3.0]

    def test_zero_polytope(self):
        """Test that all-zero caps give the origin alone."""
        poly = RatePolytope(INNER_PATTERNS, (0.0, 0.0, 0.0, 0.0))
        assert polytope_vertices(poly) == [RatePoint(0.0, 0.0, 0.0)]

    def test_support_picks_best_vertex(self):
        """Test that the polytope support returns a maximizing vertex."""
        poly = RatePolytope(INNER_PATTERNS, (1.0, 1.0, 1.5, 1.5))
        value, vertex = polytope_support(poly, np.array([0.0, 1.0, 1.0]))
        assert value == pytest.approx(1.5)
        assert vertex[0] == pytest.approx(0.0)

    def test_contains_uses_tolerance(self):
        """Test that membership accepts points just outside within tolerance."""
        poly = RatePolytope(INNER_PATTERNS, (1.0, 1.0, 1.5, 1.5))
        assert poly.contains((0.5, 0.5, 0.5))
        assert poly.contains((1.0 + 1e-10, 0.0, 0.0))
        assert not poly.contains((0.5, 0.6, 0.5))

    @pytest.mark.parametrize(
        "coefficients,rhs",
        [
            (INNER_PATTERNS, (1.0, 1.0, -0.5, 1.0)),
            (INNER_PATTERNS, (1.0, 1.0, np.inf, 1.0)),
            (((2, 0, 0),), (1.0,)),
            (INNER_PATTERNS, (1.0, 1.0)),
        ],
    )
    def test_invalid_polytopes(self, coefficients, rhs):
        """Test that malformed constraint sets are rejected."""
        with pytest.raises(ValueError):
            RatePolytope(coefficients, rhs)

    @pytest.mark.parametrize("poly", random_polytopes(11, 5))
    def test_vertices_match_grid_scan(self, poly):
        """Test that vertex supports agree with a brute-force scan of feasible grid points."""
        step = 0.05
        axis = np.arange(0.0, 2.0 + step / 2, step)
        grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
        feasible = grid[np.all(grid @ poly.coefficients.T <= poly.rhs + 1e-12, axis=1)]
        vertices = polytope_vertex_array(poly)
        assert all(poly.contains(v) for v in vertices)
        for w in octant_directions(16):
            best, _ = polytope_support(poly, w)
            scanned = float(np.max(feasible @ w))
            assert scanned <= best + 1e-9
            # rounding a vertex down onto the grid keeps it feasible
            assert best - scanned <= step * w.sum() + 1e-9

    @pytest.mark.parametrize("poly", random_polytopes(5, 4))
    def test_support_matches_vertex_array(self, poly):
        """Test that the polytope support is the best vertex of the full vertex list."""
        vertices = polytope_vertex_array(poly)
        for w in octant_directions(12):
            value, vertex = polytope_support(poly, w)
            assert value == pytest.approx(float(np.max(vertices @ w)), abs=1e-8)
            assert np.min(np.max(np.abs(vertices - vertex), axis=1)) <= 1e-9


class TestHull:
    """Test comprehensive convex hulls."""

    def test_single_point_gives_box(self, cube):
        """Test that one point spans its downward-closed box."""
        assert len(cube.vertices) == 8
        assert support(cube, (1, 1, 1)) == pytest.approx(3.0)

    def test_interior_points_dropped(self, cube):
        """Test that dominated points do not become vertices."""
        assert hull([(1.0, 1.0, 1.0), (0.5, 0.5, 0.5)]) == cube

    def test_origin(self):
        """Test that the origin alone is its own hull."""
        assert hull([(0.0, 0.0, 0.0)]).vertices.tolist() == [[0.0, 0.0, 0.0]]

    def test_planar_points(self):
        """Test that points in the R0 = 0 plane give a planar region."""
        region = hull([(0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (0.0, 0.4, 0.4)])
        assert region.vertices.tolist() == [[0, 0, 0], [0, 0, 1], [0, 1, 0]]

    def test_vertices_are_canonically_ordered(self):
        """Test that hull vertices come out in lexicographic order."""
        region = hull([(0.0, 2.0, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 1.0)])
        assert region.vertices.tolist() == sorted(region.vertices.tolist())

    def test_empty_input(self):
        """Test that an empty point set is an error."""
        with pytest.raises(EmptyRegion):
            hull([])

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_idempotent(self, seed):
        """Test that the hull of a hull's vertices is the same hull."""
        points = np.random.default_rng(seed).uniform(0.0, 3.0, size=(12, 3))
        region = hull(points)
        assert hull(region.vertices) == region

    def test_transfer_closure(self):
        """Test that common rate can be handed to either private message."""
        points = transfer_closure([(1.0, 0.0, 0.0)])
        assert points == [
            RatePoint(1.0, 0.0, 0.0),
            RatePoint(0.0, 1.0, 0.0),
            RatePoint(0.0, 0.0, 1.0),
        ]

    def test_transfer_closure_ignores_private_points(self):
        """Test that points without common rate pass through unchanged."""
        assert transfer_closure([(0.0, 1.0, 2.0)]) == [RatePoint(0.0, 1.0, 2.0)]


class TestSupportAndContainment:
    """Test support values and support-function containment."""

    def test_bad_weight(self, cube):
        """Test that malformed directions are rejected."""
        with pytest.raises(BadWeight):
            support(cube, (1.0, 1.0))
        with pytest.raises(BadWeight):
            support(cube, (np.nan, 1.0, 1.0))

    def test_empty_region(self):
        """Test that the support of an empty region is an error."""
        with pytest.raises(EmptyRegion):
            support(RateRegion(vertices=np.zeros((0, 3))), (1, 0, 0))

    @pytest.mark.parametrize("seed", [3, 4])
    def test_support_is_sublinear(self, seed):
        """Test that the support function is subadditive and positively homogeneous."""
        rng = np.random.default_rng(seed)
        region = hull(rng.uniform(0.0, 2.0, size=(10, 3)))
        for _ in range(20):
            u, v = rng.uniform(0.0, 1.0, size=(2, 3))
            t = rng.uniform(0.1, 5.0)
            assert support(region, u + v) <= support(region, u) + support(region, v) + 1e-12
            assert support(region, t * u) == pytest.approx(t * support(region, u), rel=1e-12)

    def test_nested_boxes(self, cube):
        """Test that containment holds one way and reports the gap the other way."""
        small = hull([(0.5, 0.5, 0.5)])
        directions = octant_directions(32)
        assert contains(cube, small, directions).ok
        report = contains(small, cube, directions)
        assert not report.ok
        assert report.worst_gap > 0.4

    def test_region_contains_itself(self, cube):
        """Test that a region contains itself with zero gap."""
        assert contains(cube, cube, octant_directions(16)).worst_gap == 0.0


class TestOctantDirections:
    """Test the deterministic direction set."""

    def test_unit_vectors_in_octant(self):
        """Test that directions are nonnegative unit vectors."""
        directions = octant_directions(64)
        assert directions.shape == (64, 3)
        assert np.all(directions >= 0)
        assert np.allclose(np.linalg.norm(directions, axis=1), 1.0)

    def test_deterministic(self):
        """Test that the direction set does not change between calls."""
        assert np.array_equal(octant_directions(10), octant_directions(10))

    def test_needs_one_direction(self):
        """Test that zero directions is an error."""
        with pytest.raises(BadWeight):
            octant_directions(0)


class TestRegionSlice:
    """Test (R1, R2) sections at fixed common rate."""

    def test_rectangle_ring(self):
        """Test the R0 = 0 section of a box."""
        ring = region_slice(hull([(0.0, 0.5, 0.5)]), 0.0)
        assert ring.tolist() == [[0.0, 0.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]

    def test_cube_mid_section(self, cube):
        """Test a section through the middle of the cube."""
        ring = region_slice(cube, 0.5)
        np.testing.assert_allclose(
            ring, [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], atol=1e-12
        )

    def test_out_of_range(self, cube):
        """Test that a common rate above the region is an error."""
        with pytest.raises(SliceOutOfRange):
            region_slice(cube, 2.0)

    def test_segment_section(self):
        """Test that a degenerate section comes back as a segment."""
        section = region_slice(hull([(0.0, 1.0, 0.0)]), 0.0)
        assert section.tolist() == [[0.0, 0.0], [1.0, 0.0]]
