import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from roughfrac.errors import DegenerateWeight, EmptySubset, NonFiniteWeight, NonIntegrable
from roughfrac.geometry import Ball, Grid, GridFunction, build_ball_family, centered_family, radius_ladder
from roughfrac.weights import (
    Weight, ap_constant, apq_constant, ball_cells, ball_measure, check_doubling, check_rh_subset,
    power_weight_apq_range, raise_weight, rh_constant,
)

G64 = Grid(2, 2.0, 64)
FAM = build_ball_family(G64, 8, 2 * G64.h, 1.0)
ORIGIN = (0.0, 0.0)


def nested_at_origin(g):
    c = g.cell_center(g.nearest_cell(ORIGIN))
    return centered_family(c, radius_ladder(2 * g.h, g.half_width / 2))


def test_raise_examples():
    w = raise_weight(Weight.power(ORIGIN, 0.5), 2)
    assert (w.kind, w.beta) == ("power", 1.0)
    assert raise_weight(Weight.one(), -3.7).kind == "one"
    assert raise_weight(Weight.power(ORIGIN, -1), -1).beta == 1.0


def test_raise_gridded_zero_to_negative_power():
    v = np.ones(G64.shape)
    v[3, 3] = 0.0
    w = Weight.gridded(GridFunction(G64, v))
    assert raise_weight(w, 2).samples.values[3, 3] == 0.0
    with pytest.raises(NonFiniteWeight):
        raise_weight(w, -1)


def test_ball_measure_examples():
    assert ball_measure(Weight.one(), Ball(ORIGIN, 1)) == pytest.approx(math.pi, rel=1e-15)
    # closed-form radial integral 2 pi int_0^1 r * r dr
    assert ball_measure(Weight.power(ORIGIN, 1), Ball(ORIGIN, 1)) == pytest.approx(2 * math.pi / 3, rel=1e-15)
    assert ball_measure(Weight.one(), Ball(ORIGIN, 2)) / ball_measure(Weight.one(), Ball(ORIGIN, 1)) == pytest.approx(4.0, rel=1e-15)


def test_ball_measure_non_integrable():
    with pytest.raises(NonIntegrable):
        ball_measure(Weight.power(ORIGIN, -2), Ball(ORIGIN, 1))
    with pytest.raises(NonIntegrable):
        ball_measure(Weight.power(ORIGIN, -3), Ball((0.1, 0.0), 0.5), G64)


@pytest.mark.parametrize("beta", [-1.0, -0.5, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
def test_midpoint_measure_converges(beta, radius):
    g = Grid(2, 2.0, 256)
    w = Weight.power(ORIGIN, beta)
    ball = Ball(ORIGIN, radius)
    assert ball_measure(w, ball, g, "midpoint") == pytest.approx(ball_measure(w, ball), rel=0.02)


def test_singular_cell_replacement():
    # a singularity at a cell centre gets the equal-volume disc average
    g = Grid(2, 1.0, 8)
    c = g.cell_center((3, 3))
    vals = Weight.power(c, -1.0).cell_values(g)
    rho = g.h / math.sqrt(math.pi)
    assert vals[3, 3] == pytest.approx(2 * math.pi * rho / g.cell_volume, rel=1e-14)
    with pytest.raises(NonIntegrable):
        Weight.power(c, -2.0).cell_values(g)


def test_ap_constant_of_one_is_one():
    rep = ap_constant(Weight.one(), 2.0, FAM, G64)
    assert abs(rep.constant - 1) <= 1e-9
    assert rep.to_dict()["class"] == "A_p"
    assert apq_constant(Weight.one(), 2.0, 4.0, FAM, G64).constant == pytest.approx(1.0, abs=1e-9)
    assert rh_constant(Weight.one(), 3.0, FAM, G64).constant == pytest.approx(1.0, abs=1e-9)


def test_a2_power_weight_converges_to_radial_oracle():
    # radial integrals over centred balls: avg |x| = 2r/3, avg |x|^-1 = 2/r
    vals = [ap_constant(Weight.power(ORIGIN, 1.0), 2.0, nested_at_origin(Grid(2, 2.0, m)), Grid(2, 2.0, m)).constant
            for m in (64, 128, 256)]
    assert all(abs(v - 4 / 3) < 0.03 for v in vals)
    assert abs(vals[2] - 4 / 3) < abs(vals[0] - 4 / 3)


def test_a2_outside_range_diverges():
    vals = [ap_constant(Weight.power(ORIGIN, 3.0), 2.0, nested_at_origin(Grid(2, 2.0, m)), Grid(2, 2.0, m)).constant
            for m in (64, 128)]
    assert vals[1] / vals[0] >= 2.0


def test_apq_inside_and_outside_power_range():
    lo, hi = power_weight_apq_range(2, 1.5, 6.0)
    assert (lo, hi) == pytest.approx((-1 / 3, 2 / 3))
    growth = {}
    for beta in (0.2, hi + 1.0):
        v = [apq_constant(Weight.power(ORIGIN, beta), 1.5, 6.0, nested_at_origin(Grid(2, 2.0, m)), Grid(2, 2.0, m)).constant
             for m in (64, 128)]
        growth[beta] = v[1] / v[0]
    assert growth[0.2] < 1.01
    assert growth[hi + 1.0] > 1.5


def test_apq_p_equal_one_branch():
    rep = apq_constant(Weight.power(ORIGIN, 0.2), 1.0, 2.0, FAM, G64)
    assert math.isfinite(rep.constant) and rep.constant >= 1.0


def test_rh_examples():
    g = Grid(2, 2.0, 128)
    rep = rh_constant(Weight.power(ORIGIN, 1.0), 2.0, nested_at_origin(g), g)
    assert math.isfinite(rep.constant)
    # radial oracle for the largest centred ball: (r^2/2)^(1/2) / (2r/3)
    assert rep.per_ball[-1] == pytest.approx(3 / (2 * math.sqrt(2)), rel=0.01)
    div = [rh_constant(Weight.power(ORIGIN, -1.0), 3.0, nested_at_origin(Grid(2, 2.0, m)), Grid(2, 2.0, m)).constant
           for m in (64, 128)]
    assert div[1] / div[0] > 1.2


def test_degenerate_weight():
    v = np.ones(G64.shape)
    v[:32] = 0.0
    with pytest.raises(DegenerateWeight):
        ap_constant(Weight.gridded(GridFunction(G64, v)), 2.0, FAM, G64)


def test_doubling_examples():
    fam = centered_family(ORIGIN, [0.25, 0.5])
    chk = check_doubling(Weight.one(), 2.0, fam, 2.0)
    assert all(r == pytest.approx(4.0, rel=1e-14) and r <= b for _, r, b in chk.rows)
    chk = check_doubling(Weight.power(ORIGIN, 1.0), 2.0, fam, 2.0)
    assert all(r == pytest.approx(8.0, rel=1e-14) and b == 16.0 for _, r, b in chk.rows)
    assert chk.passed
    chk = check_doubling(Weight.one(), 2.0, fam, 1.0)
    assert all(r == 1.0 for _, r, _ in chk.rows)


def test_rh_subset_examples():
    g = Grid(2, 2.0, 64)
    B = Ball(ORIGIN, 1.0)
    full = ball_cells(g, B)
    assert check_rh_subset(Weight.power(ORIGIN, 1.0), 2.0, full, B, g) == pytest.approx((1.0, 1.0))
    quarter = full & (g.coords()[0] > 0) & (g.coords()[1] > 0)
    lhs, rhs = check_rh_subset(Weight.one(), 2.0, quarter, B, g)
    assert lhs == 0.25 and rhs == pytest.approx(0.5)
    with pytest.raises(EmptySubset):
        check_rh_subset(Weight.one(), 2.0, np.zeros(g.shape, bool), B, g)


def test_rh_subset_power_half_radius():
    g = Grid(2, 2.0, 256)
    B = Ball(ORIGIN, 1.0)
    lhs, rhs = check_rh_subset(Weight.power(ORIGIN, 1.0), 2.0, ball_cells(g, Ball(ORIGIN, 0.5)), B, g)
    assert lhs == pytest.approx(1 / 8, rel=0.02)
    assert rhs == pytest.approx(0.5, rel=0.02)


@given(st.floats(-1.5, 1.5), st.floats(1e-3, 1e3))
def test_ap_scale_invariance(beta, c):
    w = Weight.power((0.3, -0.2), beta)
    a = ap_constant(w, 2.0, FAM, G64).constant
    b = ap_constant(w.scaled(c), 2.0, FAM, G64).constant
    assert b == pytest.approx(a, rel=1e-12)
    assert a >= 1.0 - 1e-12


@given(st.floats(-1.5, 1.5), st.floats(1.2, 4.0))
def test_constants_monotone_in_family(beta, p):
    w = Weight.power(ORIGIN, beta)
    small = build_ball_family(G64, 8, 4 * G64.h, 0.5)
    big = small.union(FAM)
    assert ap_constant(w, p, big, G64).constant >= ap_constant(w, p, small, G64).constant
    assert rh_constant(w, p, big, G64).constant >= rh_constant(w, p, small, G64).constant
