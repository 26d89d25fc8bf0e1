import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fracreg import analysis, cellquad, kernels
from fracreg.analysis import (AnalysisError, NormSpec, holder_seminorm,
                              layer_cake_norm, level_set_sum, lp_norm,
                              maximal_function, maximal_scaling_check, p_star,
                              poincare_quotient, sandwich_constant,
                              slobodeckij_seminorm, vitali_audit)
from fracreg.assembly import assemble_form, bilinear
from fracreg.grids import (Domain, Grid, GridFunction, build_ball_domain,
                           full_box_domain, measure)


# -- maximal function ---------------------------------------------------------

def test_maximal_constant_inside():
    g = Grid.box(1, 0.25, 2.0)
    omega = full_box_domain(g)
    mf = maximal_function(GridFunction.constant(g, 2.0), omega)
    inner = np.abs(g.axis_coords(0)) < 1.0
    assert np.allclose(mf.values[inner], 2.0, atol=1e-12)


def test_maximal_indicator_closed_form_at_3():
    # sup over rho of the ball average of 1_[-1,1] at x = 3 is 1/4 (rho = 4)
    g = Grid.box(1, 1 / 32, 4.0)
    ball = build_ball_domain(g, [0.0], 1.0)
    mf = maximal_function(GridFunction.indicator(ball), ball)
    i3 = int(round(3.0 / g.spacing)) + g.counts[0] // 2
    assert mf.values[i3] == pytest.approx(0.25, rel=0.05)


def test_maximal_positive_homogeneity_exact(rng):
    g = Grid.box(1, 0.25, 2.0)
    omega = build_ball_domain(g, [0.0], 1.4)
    f = GridFunction(g, rng.normal(size=g.shape))
    m1 = maximal_function(f, omega)
    m2 = maximal_function(2.0 * f, omega)
    assert np.array_equal(m2.values, 2.0 * m1.values)


def test_maximal_pointwise_lower_bound(rng):
    g = Grid.box(1, 1 / 8, 2.0)
    omega = build_ball_domain(g, [0.0], 1.4)
    f = GridFunction(g, rng.normal(size=g.shape))
    mf = maximal_function(f, omega)
    assert np.all(mf.values[omega.mask] >= np.abs(f.values[omega.mask]))


def test_maximal_weak_and_strong_estimates(rng):
    g = Grid.box(1, 1 / 16, 2.0)
    omega = build_ball_domain(g, [0.0], 1.2)
    hn = g.cell_volume
    for _ in range(10):
        f = GridFunction(g, np.where(omega.mask, rng.normal(size=g.shape), 0))
        mf = maximal_function(f, omega)
        l1 = lp_norm(f, NormSpec(1.0, omega))
        for t in (0.1, 0.5, 1.0):
            meas = hn * float(np.sum(mf.values[omega.mask] > t))
            assert t * meas <= 20.0 * l1  # generous absolute sanity bound
        for p in (2.0, 3.0, 6.0):
            assert lp_norm(f, NormSpec(p, omega)) <= lp_norm(
                mf, NormSpec(p, omega)) + 1e-12


def test_maximal_scaling_checks():
    g = Grid.box(1, 1 / 32, 4.0)
    ball = build_ball_domain(g, [0.0], 1.0)
    f = GridFunction.indicator(ball)
    steps = list(range(1, 32))
    rep = maximal_scaling_check(f, ball, 1.0, [0.0], radii_steps=steps)
    assert rep.max_discrepancy == 0.0
    rep = maximal_scaling_check(f, ball, 2.0, [0.0], radii_steps=steps)
    assert rep.max_discrepancy == 0.0
    rep = maximal_scaling_check(f, ball, 1.0, [g.spacing], radii_steps=steps)
    assert rep.max_discrepancy == 0.0
    with pytest.raises(AnalysisError):
        maximal_scaling_check(f, ball, 3.0, [0.0])
    with pytest.raises(AnalysisError):
        maximal_scaling_check(f, ball, 2.0, [g.spacing / 3.0])


# -- norms ----------------------------------------------------------------------

def test_lp_norm_examples():
    g = Grid.box(1, 1.0, 2.0)  # 5 nodes, h = 1
    omega = full_box_domain(g)
    one = GridFunction.constant(g, 1.0)
    m = measure(omega)
    for p in (1.0, 2.0, 3.0):
        assert lp_norm(one, NormSpec(p, omega)) == pytest.approx(m ** (1 / p))
    two_val = GridFunction(g, np.array([1.0, 1.0, 0.0, 2.0, 2.0]))
    region = Domain(g, np.array([True, True, False, True, True]))
    assert lp_norm(two_val, NormSpec(2.0, region)) == pytest.approx(np.sqrt(5 + 5))
    assert lp_norm(two_val, NormSpec(np.inf, region)) == 2.0


def test_lp_norm_jensen_monotone(rng):
    g = Grid.box(1, 0.25, 2.0)
    omega = build_ball_domain(g, [0.0], 1.4)
    f = GridFunction(g, rng.normal(size=g.shape))
    m = measure(omega)
    normalized = [lp_norm(f, NormSpec(p, omega)) / m ** (1 / p)
                  for p in (1.0, 2.0, 4.0, 8.0)]
    assert all(a <= b + 1e-12 for a, b in zip(normalized, normalized[1:]))


def test_layer_cake_examples(rng):
    g = Grid.box(1, 0.5, 2.0)
    omega = full_box_domain(g)
    zero = GridFunction.zeros(g)
    assert layer_cake_norm(zero, NormSpec(2.0, omega)) == 0.0
    ball = build_ball_domain(g, [0.0], 1.2)
    ind = GridFunction.indicator(ball)
    for p in (1.0, 2.5, 4.0):
        assert layer_cake_norm(ind, NormSpec(p, omega)) == pytest.approx(
            measure(ball))
    with pytest.raises(AnalysisError):
        layer_cake_norm(GridFunction.constant(g, -1.0), NormSpec(2.0, omega))


@settings(max_examples=40, deadline=None)
@given(vals=arrays(np.float64, 13,
                   elements=st.floats(min_value=0, max_value=50)),
       p=st.floats(min_value=1.0, max_value=6.0))
def test_layer_cake_equals_lp_power(vals, p):
    g = Grid.box(1, 0.5, 3.0)
    omega = full_box_domain(g)
    f = GridFunction(g, vals)
    lc = layer_cake_norm(f, NormSpec(p, omega))
    lp = lp_norm(f, NormSpec(p, omega)) ** p
    assert lc == pytest.approx(lp, rel=1e-10, abs=1e-12)


# -- level sets -------------------------------------------------------------------

def test_level_set_two_level_function():
    g = Grid.box(1, 0.5, 2.0)
    omega = full_box_domain(g)
    tau, beta, p = 1.0, 2.0, 3.0
    f = GridFunction.constant(g, 3.0 * tau)
    prof = level_set_sum(f, omega, tau, beta, p)
    assert len(prof.measures) == 1
    assert prof.sum_S == pytest.approx(beta ** p * measure(omega))
    assert prof.sandwich_ok


def test_level_set_below_threshold():
    g = Grid.box(1, 0.5, 2.0)
    omega = full_box_domain(g)
    prof = level_set_sum(GridFunction.constant(g, 0.5), omega, 1.0, 2.0, 3.0)
    assert prof.sum_S == 0.0
    assert prof.lp_power <= prof.constant * prof.domain_measure
    assert prof.sandwich_ok


def test_level_set_measures_nonincreasing(rng):
    g = Grid.box(1, 0.25, 2.0)
    omega = build_ball_domain(g, [0.0], 1.4)
    f = GridFunction(g, np.abs(rng.normal(size=g.shape)) * 5)
    prof = level_set_sum(f, omega, 0.3, 1.5, 2.0)
    assert all(a >= b for a, b in zip(prof.measures, prof.measures[1:]))


@settings(max_examples=40, deadline=None)
@given(vals=arrays(np.float64, 17,
                   elements=st.floats(min_value=0, max_value=100)),
       tau=st.floats(min_value=0.1, max_value=3.0),
       beta=st.floats(min_value=1.1, max_value=4.0),
       p=st.floats(min_value=0.5, max_value=5.0))
def test_level_set_sandwich_hard_inequality(vals, tau, beta, p):
    g = Grid.box(1, 0.5, 4.0)
    omega = full_box_domain(g)
    prof = level_set_sum(GridFunction(g, vals), omega, tau, beta, p)
    c = prof.constant
    assert prof.sum_S <= c * prof.lp_power * (1 + 1e-12) + 1e-300
    assert prof.lp_power <= c * (prof.domain_measure + prof.sum_S) * (1 + 1e-12)
    assert prof.sandwich_ok


def test_sandwich_constant_formula():
    assert sandwich_constant(1.0, 2.0, 3.0) == pytest.approx(
        max(2.0 ** 3, 1.0 / (1 - 2.0 ** -3)))
    assert sandwich_constant(0.5, 2.0, 2.0) == pytest.approx(
        max(1.0, 0.5 ** -2 / (1 - 0.25)))


# -- covering audit ----------------------------------------------------------------

def test_vitali_empty_e():
    g = Grid.box(1, 1 / 8, 2.0)
    b1 = build_ball_domain(g, [0.0], 1.0)
    empty = Domain(g, np.zeros(g.shape, dtype=bool))
    rep = vitali_audit(empty, empty, b1, 0.5)
    assert rep.hypothesis_ok and rep.conclusion_ok


def test_vitali_tiny_ball():
    g = Grid.box(1, 1 / 16, 2.0)
    b1 = build_ball_domain(g, [0.0], 1.0)
    tiny = build_ball_domain(g, [0.25], 0.2)
    rep = vitali_audit(tiny, tiny, b1, 0.9)
    assert rep.hypothesis_ok
    assert rep.conclusion_ok and rep.conclusion_asserted


def test_vitali_hypothesis_violation_reported():
    # dense patch with F = E: density balls around the patch escape F
    g = Grid.box(1, 1 / 16, 2.0)
    b1 = build_ball_domain(g, [0.0], 1.0)
    patch = build_ball_domain(g, [0.0], 0.45)
    rep = vitali_audit(patch, patch, b1, 0.3)
    assert not rep.hypothesis_ok
    assert not rep.conclusion_asserted
    assert rep.failing_detail


def test_vitali_inclusion_precondition():
    g = Grid.box(1, 1 / 8, 2.0)
    b1 = build_ball_domain(g, [0.0], 1.0)
    outside = build_ball_domain(g, [0.0], 1.4)
    with pytest.raises(AnalysisError):
        vitali_audit(outside, outside, b1, 0.5)


# -- seminorms ---------------------------------------------------------------------

def test_holder_constant_zero():
    g = Grid.box(1, 0.25, 4.0)
    b3 = build_ball_domain(g, [0.0], 3.0)
    assert holder_seminorm(GridFunction.constant(g, 1.0), 0.5, b3) == 0.0


def test_holder_linear_closed_form():
    g = Grid.box(1, 1 / 16, 4.0)
    b3 = build_ball_domain(g, [0.0], 3.0)
    lin = GridFunction.from_callable(g, lambda x: x)
    got = holder_seminorm(lin, 0.5, b3)
    diam = 2 * (3.0 - g.spacing)
    assert got == pytest.approx(np.sqrt(diam), rel=1e-12)
    assert got == pytest.approx(np.sqrt(6.0), rel=0.02)


def test_holder_monotone_in_alpha_for_wide_regions():
    g = Grid.box(1, 1 / 16, 4.0)
    b3 = build_ball_domain(g, [0.0], 3.0)
    lin = GridFunction.from_callable(g, lambda x: x)
    a_small = holder_seminorm(lin, 0.3, b3)
    a_big = holder_seminorm(lin, 0.6, b3)
    assert a_big <= a_small  # diameter > 1: larger alpha divides harder


def test_slobodeckij_constant_zero():
    g = Grid.box(1, 0.25, 2.0)
    omega = build_ball_domain(g, [0.0], 1.4)
    assert slobodeckij_seminorm(GridFunction.constant(g, 2.0), omega,
                                0.25, 2.0) == 0.0


def test_slobodeckij_two_node_region_corrected_weight():
    # adjacent pair at h = 1: the exact two-cell integral replaces the
    # midpoint factor, so the value is 2 * I_adj rather than 2 * h^2 / 1^1.5
    g = Grid.box(1, 1.0, 2.0)
    region = Domain(g, np.array([False, False, True, True, False]))
    ind = GridFunction(g, np.array([0.0, 0.0, 1.0, 0.0, 0.0]))
    got = slobodeckij_seminorm(ind, region, 0.25, 2.0)
    assert got == pytest.approx(
        2.0 * cellquad.cell_pair_integral_1d(1, 1.5), rel=1e-12)


def test_slobodeckij_p2_matches_restricted_bilinear(rng):
    g = Grid.box(1, 1 / 8, 2.0)
    omega = build_ball_domain(g, [0.0], 1.4)
    u = GridFunction(g, rng.normal(size=g.shape))
    got = slobodeckij_seminorm(u, omega, 0.25, 2.0)
    # oracle: restricted double sum through the form's weight table
    form = assemble_form(kernels.constant_kernel(), g, 0.25)
    restricted = bilinear(form, u.restricted(omega), u.restricted(omega))
    # remove pairs where one node is outside omega and the tail part
    idx = np.argwhere(omega.mask)
    w = form.pair_weights(idx[:, None, :], idx[None, :, :])
    vals = u.values[omega.mask]
    oracle = float(np.sum(w * (vals[:, None] - vals[None, :]) ** 2))
    assert got == pytest.approx(oracle, rel=1e-10)
    assert restricted >= oracle  # the full form adds nonnegative terms


def test_poincare_quotient_properties(rng):
    g = Grid.box(1, 1 / 8, 2.0)
    omega = build_ball_domain(g, [0.0], 1.4)
    u = GridFunction(g, rng.normal(size=g.shape))
    q = poincare_quotient(u, omega, 0.25)
    assert q > 0
    assert poincare_quotient(u + 3.0, omega, 0.25) == pytest.approx(q, rel=1e-10)
    assert poincare_quotient(-2.0 * u, omega, 0.25) == pytest.approx(q, rel=1e-10)
    with pytest.raises(AnalysisError):
        poincare_quotient(GridFunction.constant(g, 1.0), omega, 0.25)


def test_poincare_two_node_perturbation():
    g = Grid.box(1, 1.0, 2.0)
    omega = Domain(g, np.array([False, True, True, True, False]))
    u = GridFunction(g, np.array([0.0, 0.0, 0.0, 1e-3, 0.0]))
    q = poincare_quotient(u, omega, 0.25)
    assert 0 < q < np.inf


def test_p_star_values():
    assert p_star(4.0, 1, 0.25) == pytest.approx(2.0)
    assert p_star(6.0, 1, 0.25) == pytest.approx(max(6 / (1 + 1.5), 2.0))
    assert p_star(3.0, 2, 0.5) == pytest.approx(max(6 / 3.5, 2.0))


def test_pair_cap_guard():
    g = Grid.box(1, 1 / 16, 4.0)
    dom = full_box_domain(g)
    u = GridFunction.zeros(g)
    analysis.PAIR_NODE_CAP, saved = 10, analysis.PAIR_NODE_CAP
    try:
        with pytest.raises(AnalysisError):
            holder_seminorm(u, 0.5, dom)
    finally:
        analysis.PAIR_NODE_CAP = saved
