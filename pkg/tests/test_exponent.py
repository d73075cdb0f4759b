import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sprayflow.exponent import (
    CoveringError,
    ExponentField,
    Slab,
    build_covering,
    conjugate,
    constant_field,
    required_s_min,
    s_zero,
    sinusoidal_field,
    two_phase_switch_field,
    validate,
)
from sprayflow.grid import Grid

GRID = Grid(32, 32)


def test_required_bound_values():
    assert required_s_min(2) == 2.0
    assert required_s_min(3) == pytest.approx(11.0 / 5.0)
    assert s_zero(2) == 4.0


def test_validate_constant_two_passes():
    report = validate(constant_field(GRID, 1.0, 2.0))
    assert report.bound_ok
    assert report.passed
    assert report.s_min == report.s_max == 2.0


def test_validate_below_bound_fails():
    report = validate(constant_field(GRID, 1.0, 1.9))
    assert not report.bound_ok
    assert not report.passed


def test_validate_sinusoidal_modulus_finite():
    field = sinusoidal_field(GRID, 1.0, base=2.0, amplitude=0.5)
    report = validate(field)
    assert report.passed
    # oracle: exhaustive pairwise sweep at grid resolution
    xc, yc = GRID.cell_centers()
    pts = np.column_stack([xc.ravel(), yc.ravel()])
    s = field.slabs[0].values.ravel()
    ii, jj = np.triu_indices(pts.shape[0], k=1)
    dist = np.hypot(*(pts[ii] - pts[jj]).T)
    keep = (dist > 0) & (dist < 0.5)
    expected = np.max(np.abs(s[ii[keep]] - s[jj[keep]]) * np.abs(np.log(dist[keep])))
    assert report.log_holder_modulus[0] == pytest.approx(expected, rel=1e-12)


def test_validate_rejects_nonfinite():
    vals = np.full((GRID.nx, GRID.ny), 2.0)
    vals[3, 3] = np.nan
    field = ExponentField((Slab(0.0, vals),), 1.0, GRID)
    with pytest.raises(ValueError):
        validate(field)


def test_slab_ordering_enforced():
    vals = np.full((GRID.nx, GRID.ny), 2.0)
    with pytest.raises(ValueError):
        ExponentField((Slab(0.5, vals),), 1.0, GRID)  # must start at 0
    with pytest.raises(ValueError):
        ExponentField((Slab(0.0, vals), Slab(0.0, vals)), 1.0, GRID)
    with pytest.raises(ValueError):
        ExponentField((), 1.0, GRID)


def test_slab_lookup_and_durations():
    field = two_phase_switch_field(GRID, 1.0, switch_time=0.4)
    assert field.slab_index(0.0) == 0
    assert field.slab_index(0.39999) == 0
    assert field.slab_index(0.4) == 1
    assert field.slab_index(5.0) == 1  # clamped
    np.testing.assert_allclose(field.durations(), [0.4, 0.6])


# -- conjugate ----------------------------------------------------------------

def test_conjugate_known_values():
    assert conjugate(constant_field(GRID, 1.0, 2.0)).s_min == pytest.approx(2.0)
    c3 = conjugate(constant_field(GRID, 1.0, 3.0))
    assert c3.s_min == pytest.approx(1.5)
    # s0 = 3 + 2/d at d = 2: (s0/2)' = 2
    half_s0 = constant_field(GRID, 1.0, s_zero(2) / 2.0)
    assert conjugate(half_s0).s_max == pytest.approx(2.0)


def test_conjugate_rejects_s_at_most_one():
    with pytest.raises(ValueError):
        conjugate(constant_field(GRID, 1.0, 1.0))


@settings(max_examples=30, deadline=None)
@given(
    base=st.floats(min_value=1.1, max_value=6.0),
    amp=st.floats(min_value=0.0, max_value=0.05),
)
def test_conjugate_is_involution(base, amp):
    field = sinusoidal_field(GRID, 1.0, base=base, amplitude=amp)
    back = conjugate(conjugate(field))
    np.testing.assert_allclose(
        back.slabs[0].values, field.slabs[0].values, rtol=0, atol=1e-14
    )


# -- covering -----------------------------------------------------------------

def test_covering_constant_field_single_scale():
    cov = build_covering(constant_field(GRID, 1.0, 2.0))
    assert np.all(cov.q == 2.0)
    assert np.all(cov.r_sup == 2.0)
    assert np.all(cov.big_r == 4.0)
    # the gap invariant holds exactly
    assert np.all(cov.big_r - cov.r_sup >= required_s_min(2) / 2)


def test_covering_slowly_varying():
    field = sinusoidal_field(GRID, 1.0, base=2.0, amplitude=0.4)
    cov = build_covering(field)
    smin_over_d = required_s_min(2) / 2
    assert np.all(cov.big_r - cov.r_sup >= smin_over_d)
    assert np.all(cov.q >= 2.0)
    np.testing.assert_allclose(cov.big_r, 2.0 * cov.q)
    # per-ball stats match a direct scan
    xc, yc = GRID.cell_centers()
    stack = field.values_stack()
    for b in range(cov.centers.shape[0]):
        mask = (xc - cov.centers[b, 0]) ** 2 + (yc - cov.centers[b, 1]) ** 2 < (
            2 * cov.radius
        ) ** 2
        assert cov.q[b, 0] == stack[0][mask].min()
        assert cov.r_sup[b, 0] == stack[0][mask].max()


def test_partition_of_unity_sums_to_one():
    field = sinusoidal_field(GRID, 1.0, base=2.0, amplitude=0.4)
    cov = build_covering(field)
    total = cov.zeta.sum(axis=0)
    np.testing.assert_allclose(total, 1.0, rtol=0, atol=1e-12)
    assert np.all(cov.zeta >= 0)
    # each weight vanishes outside its own ball
    xc, yc = GRID.cell_centers()
    for b in range(cov.centers.shape[0]):
        outside = (xc - cov.centers[b, 0]) ** 2 + (yc - cov.centers[b, 1]) ** 2 >= cov.radius**2
        assert np.all(cov.zeta[b][outside] == 0.0)


def test_covering_radius_underflow():
    # exponent jumping by 1.5 between adjacent cells: oscillation cap is
    # unachievable at any radius above two cells
    vals = np.full((GRID.nx, GRID.ny), 2.0)
    vals[::2, :] = 3.5
    field = ExponentField((Slab(0.0, vals),), 1.0, GRID)
    with pytest.raises(CoveringError):
        build_covering(field)


def test_two_phase_switch_needs_interior_time():
    with pytest.raises(ValueError):
        two_phase_switch_field(GRID, 1.0, switch_time=1.0)
