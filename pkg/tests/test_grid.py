"""Grid construction, staggered locations, and the averaging/difference kernels."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stagmhd.grid import (
    AXES,
    Boundary,
    GridError,
    Location,
    StaggerError,
    StaggeredGrid,
    make_grid,
)


def periodic_grid(n):
    return make_grid(n, (0.0, 0.0, 0.0), (1.0, 1.0, 1.0))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

class TestMakeGrid:
    def test_uniform_cube_spacing(self):
        g = make_grid((10, 10, 10), (-0.55, -0.55, -0.55), (0.55, 0.55, 0.55))
        assert np.allclose(g.dx, (0.11, 0.11, 0.11))

    def test_1d_fine_grid_spacing(self):
        g = make_grid((1000, 1, 1), (-0.5, 0.0, 0.0), (0.5, 1.0, 1.0))
        assert g.dx[0] == pytest.approx(1e-3)
        assert g.degenerate(1) and g.degenerate(2)

    def test_wide_1d_grid_spacing(self):
        g = make_grid((5000, 1, 1), (-50.0, 0.0, 0.0), (50.0, 1.0, 1.0))
        assert g.dx[0] == pytest.approx(0.02)

    def test_nonpositive_count_rejected(self):
        with pytest.raises(GridError):
            make_grid((0, 4, 4), (0, 0, 0), (1, 1, 1))

    def test_empty_interval_rejected(self):
        with pytest.raises(GridError):
            make_grid((4, 4, 4), (0, 0, 0), (0, 1, 1))

    def test_periodic_storage_counts(self):
        g = periodic_grid((4, 5, 6))
        for loc in Location:
            assert g.shape(loc) == (4, 5, 6)

    def test_outflow_extends_shifted_axes(self):
        g = make_grid((4, 5, 6), (0, 0, 0), (1, 1, 1),
                      boundary=("outflow", "periodic", "outflow"))
        assert g.shape(Location.CELL) == (4, 5, 6)
        assert g.shape(Location.FACE_X) == (5, 5, 6)
        assert g.shape(Location.EDGE_X) == (4, 5, 7)
        assert g.shape(Location.NODE) == (5, 5, 7)

    def test_cell_volume(self):
        g = make_grid((4, 5, 2), (0, 0, 0), (1, 1, 1))
        assert g.cell_volume == pytest.approx((1 / 4) * (1 / 5) * (1 / 2))


class TestCoordinates:
    def test_cell_centers(self):
        g = make_grid((4, 1, 1), (0, 0, 0), (1, 1, 1))
        assert np.allclose(g.axis_coords(0, False), [0.125, 0.375, 0.625, 0.875])

    def test_shifted_coords_start_on_boundary(self):
        g = make_grid((4, 1, 1), (0, 0, 0), (1, 1, 1))
        assert np.allclose(g.axis_coords(0, True), [0.0, 0.25, 0.5, 0.75])

    def test_location_shift_bookkeeping(self):
        # Toggling the same axis twice returns to the original location.
        for loc in Location:
            for a in AXES:
                assert loc.toggled(a).toggled(a) is loc


# ---------------------------------------------------------------------------
# averages & differences
# ---------------------------------------------------------------------------

class TestAverage:
    def test_periodic_1d_example(self):
        # cell values (1,3,5,7): shifted slot m averages cells m-1, m with wrap,
        # i.e. (avg of 7,1; 1,3; 3,5; 5,7) = (4,2,4,6).
        g = make_grid((4, 1, 1), (0, 0, 0), (1, 1, 1))
        f = np.array([1.0, 3.0, 5.0, 7.0]).reshape(4, 1, 1)
        out, loc = g.avg(f, Location.CELL, 0)
        assert loc is Location.FACE_X
        assert np.allclose(out.ravel(), [4.0, 2.0, 4.0, 6.0])

    def test_constant_preserved(self):
        g = periodic_grid((4, 4, 4))
        f = np.full(g.shape(Location.CELL), 2.5)
        out, _ = g.avg(f, Location.CELL, 1)
        assert np.allclose(out, 2.5)

    def test_degenerate_axis_identity(self):
        g = make_grid((4, 1, 1), (0, 0, 0), (1, 1, 1))
        f = np.random.default_rng(0).standard_normal(g.shape(Location.CELL))
        out, loc = g.avg(f, Location.CELL, 1)
        assert np.array_equal(out, f)
        assert loc is Location.FACE_Y

    def test_composition_commutes(self):
        g = periodic_grid((6, 5, 4))
        f = np.random.default_rng(1).standard_normal(g.shape(Location.CELL))
        a_xy = g.avg_up(g.avg_up(f, 0), 1)
        a_yx = g.avg_up(g.avg_up(f, 1), 0)
        assert np.allclose(a_xy, a_yx, rtol=0, atol=1e-15)

    @given(st.integers(0, 2), st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_linearity(self, axis, seed):
        g = periodic_grid((5, 4, 3))
        rng = np.random.default_rng(seed)
        f = rng.standard_normal(g.shape(Location.CELL))
        h = rng.standard_normal(g.shape(Location.CELL))
        a, b = rng.standard_normal(2)
        lhs = g.avg_up(a * f + b * h, axis)
        rhs = a * g.avg_up(f, axis) + b * g.avg_up(h, axis)
        assert np.allclose(lhs, rhs, rtol=0, atol=1e-13)

    @given(st.integers(0, 2), st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_periodic_sum_preserved(self, axis, seed):
        g = periodic_grid((5, 4, 3))
        f = np.random.default_rng(seed).standard_normal(g.shape(Location.CELL))
        assert g.avg_up(f, axis).sum() == pytest.approx(f.sum(), rel=1e-12)

    def test_avg_up_down_adjoint_periodic(self):
        # <avg_up f, g>_shifted == <f, avg_down g>_unshifted under wrap.
        g = periodic_grid((6, 5, 4))
        rng = np.random.default_rng(2)
        f = rng.standard_normal(g.shape(Location.CELL))
        h = rng.standard_normal(g.shape(Location.FACE_X))
        lhs = float((g.avg_up(f, 0) * h).sum())
        rhs = float((f * g.avg_down(h, 0)).sum())
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_shape_mismatch_rejected(self):
        g = periodic_grid((4, 4, 4))
        with pytest.raises(StaggerError):
            g.avg(np.zeros((3, 4, 4)), Location.CELL, 0)


class TestDifference:
    def test_linear_data_exact(self):
        g = make_grid((8, 1, 1), (0, 0, 0), (2, 1, 1), boundary=("outflow", "periodic", "periodic"))
        x = g.axis_coords(0, False).reshape(-1, 1, 1)
        d = g.diff_up(3.0 * x, 0) / g.dx[0]
        # interior slots see the exact slope; ghost-copy ends see zero
        assert np.allclose(d[1:-1], 3.0)
        assert np.allclose(d[0], 0.0) and np.allclose(d[-1], 0.0)

    def test_diff_up_then_down_telescopes_periodic(self):
        g = periodic_grid((6, 1, 1))
        f = np.random.default_rng(3).standard_normal(g.shape(Location.CELL))
        assert g.diff_up(f, 0).sum() == pytest.approx(0.0, abs=1e-13)
        assert g.diff_down(g.zeros(Location.FACE_X) + 1.0, 0).sum() == 0.0

    def test_degenerate_axis_zero(self):
        g = make_grid((4, 1, 1), (0, 0, 0), (1, 1, 1))
        f = np.random.default_rng(4).standard_normal(g.shape(Location.CELL))
        assert np.array_equal(g.diff_up(f, 1), np.zeros_like(f))

    @given(st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_diff_adjointness_periodic(self, seed):
        # <D+ f, g>_shifted == -<f, D- g>_unshifted under wrap.
        g = periodic_grid((6, 5, 4))
        rng = np.random.default_rng(seed)
        f = rng.standard_normal(g.shape(Location.CELL))
        h = rng.standard_normal(g.shape(Location.FACE_X))
        lhs = float((g.diff_up(f, 0) * h).sum())
        rhs = -float((f * g.diff_down(h, 0)).sum())
        assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)


class TestAvg2Product:
    # valid chain: FACE_X --avg over x--> CELL, product, --avg over y--> FACE_Y
    def test_constants_multiply(self):
        g = periodic_grid((4, 4, 1))
        x = np.full(g.shape(Location.FACE_X), 3.0)
        y = np.full(g.shape(Location.CELL), 5.0)
        out = g.avg2_product(x, Location.FACE_X, y, Location.CELL, Location.FACE_Y)
        assert out.shape == g.shape(Location.FACE_Y)
        assert np.allclose(out, 15.0)

    def test_unit_x_field_reduces_to_single_average(self):
        g = periodic_grid((2, 2, 1))
        x = np.ones(g.shape(Location.FACE_X))
        y = np.array([[1.0, 2.0], [3.0, 4.0]]).reshape(2, 2, 1)
        out = g.avg2_product(x, Location.FACE_X, y, Location.CELL, Location.FACE_Y)
        # with x == 1 the double average collapses to the one-axis average of y
        assert np.allclose(out, g.avg_up(y, 1))

    def test_linear_x_exact_midpoints(self):
        # on an outflow grid the interior two-point averages of linear data
        # are exact midpoint values
        go = make_grid((4, 4, 1), (0, 0, 0), (1, 1, 1),
                       boundary=("outflow", "outflow", "periodic"))
        Xf = go.mesh(Location.FACE_X)[0]
        x = 2.0 * Xf
        y = np.ones(go.shape(Location.CELL))
        out = go.avg2_product(x, Location.FACE_X, y, Location.CELL, Location.FACE_Y)
        Xc = go.mesh(Location.FACE_Y)[0]
        assert np.allclose(out, 2.0 * Xc)

    def test_unreachable_locations_rejected(self):
        # EDGE_Z is two toggles away from CELL, so no single-axis chain exists
        g = periodic_grid((4, 4, 4))
        x = np.zeros(g.shape(Location.EDGE_Z))
        y = np.zeros(g.shape(Location.CELL))
        with pytest.raises(StaggerError):
            g.avg2_product(x, Location.EDGE_Z, y, Location.CELL, Location.FACE_X)
