import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracreg.grids import (Domain, Grid, GridError, GridFunction,
                           build_ball_domain, full_box_domain, mean_over,
                           measure)


def test_box_grid_odd_counts_origin_node():
    g = Grid.box(1, 0.5, 2.0)
    assert g.counts == (9,)
    assert 0.0 in g.axis_coords(0)
    g2 = Grid.box(2, 0.25, 1.0)
    assert g2.counts == (9, 9)


def test_ball_domain_enumeration_1d():
    g = Grid.box(1, 0.5, 2.0)
    d = build_ball_domain(g, [0.0], 1.0)
    nodes = g.axis_coords(0)[d.mask]
    assert list(nodes) == [-0.5, 0.0, 0.5]
    assert measure(d) == pytest.approx(1.5)


def test_degenerate_ball_single_node():
    g = Grid.box(1, 0.5, 2.0)
    d = build_ball_domain(g, [0.5], 0.2)
    assert d.node_count == 1
    assert measure(d) == pytest.approx(0.5)


def test_ball_area_converges_to_pi():
    # open-ball node count at h = 1/4 sits 10.5% under pi (45 cells of 1/16);
    # the error shrinks under refinement
    g = Grid.box(2, 0.25, 2.0)
    d = build_ball_domain(g, [0.0, 0.0], 1.0)
    assert measure(d) == pytest.approx(45 / 16)
    assert abs(measure(d) - np.pi) / np.pi < 0.11
    fine = build_ball_domain(Grid.box(2, 1 / 16, 2.0), [0.0, 0.0], 1.0)
    assert abs(measure(fine) - np.pi) / np.pi < 0.02


def test_ball_exceeding_box_rejected():
    g = Grid.box(1, 0.5, 2.0)
    with pytest.raises(GridError, match="truncation too small"):
        build_ball_domain(g, [0.0], 2.0)


def test_measure_examples():
    g = Grid.box(1, 1.0, 2.0)
    assert measure(Domain(g, np.zeros(g.shape, dtype=bool))) == 0.0
    assert measure(full_box_domain(g)) == pytest.approx(5.0)


def test_measure_additive_over_disjoint_masks():
    g = Grid.box(1, 0.25, 2.0)
    left = Domain(g, g.coords()[0] < 0)
    right = Domain(g, g.coords()[0] > 0.5)
    union = left | right
    assert measure(union) == pytest.approx(measure(left) + measure(right))


def test_ball_masks_nested_in_radius():
    g = Grid.box(2, 0.25, 2.0)
    prev = build_ball_domain(g, [0.0, 0.0], 0.3)
    for r in (0.6, 0.9, 1.2):
        cur = build_ball_domain(g, [0.0, 0.0], r)
        assert prev.issubset(cur)
        prev = cur


def test_mean_over_examples():
    g = Grid.box(1, 1.0, 1.0)  # nodes -1, 0, 1
    dom = full_box_domain(g)
    assert mean_over(GridFunction.constant(g, 3.5), dom) == pytest.approx(3.5)
    x = GridFunction.from_callable(g, lambda c: c)
    assert mean_over(x, dom) == pytest.approx(0.0)
    xsq = GridFunction.from_callable(g, lambda c: c ** 2)
    assert mean_over(xsq, dom) == pytest.approx(2.0 / 3.0)


def test_mean_over_empty_domain_errors():
    g = Grid.box(1, 1.0, 1.0)
    with pytest.raises(GridError):
        mean_over(GridFunction.zeros(g), Domain(g, np.zeros(g.shape, bool)))


@settings(max_examples=30, deadline=None)
@given(c=st.floats(min_value=-100, max_value=100, allow_nan=False))
def test_mean_over_shifts_by_constants(c):
    g = Grid.box(1, 0.5, 2.0)
    rng = np.random.default_rng(5)
    u = GridFunction(g, rng.normal(size=g.shape))
    dom = build_ball_domain(g, [0.0], 1.4)
    base = mean_over(u, dom)
    shifted = mean_over(u + c, dom)
    assert shifted == pytest.approx(base + c, abs=1e-10 * max(1.0, abs(c)))


def test_torus_allows_even_counts_and_wraps():
    g = Grid.torus(1, 0.25, 64)
    assert g.period == pytest.approx(16.0)
    d = g.wrap_displacement(np.array([15.0]))
    assert d[0] == pytest.approx(-1.0)


def test_csv_roundtrip(tmp_path):
    g = Grid.box(2, 0.5, 1.0)
    rng = np.random.default_rng(0)
    u = GridFunction(g, rng.normal(size=g.shape), exterior=0.5)
    path = tmp_path / "field.csv"
    u.to_csv(path)
    v = GridFunction.from_csv(g, path, exterior=0.5)
    assert np.array_equal(u.values, v.values)


def test_binary_roundtrip(tmp_path):
    g = Grid.box(1, 0.25, 2.0)
    rng = np.random.default_rng(0)
    u = GridFunction(g, rng.normal(size=g.shape))
    path = tmp_path / "field.bin"
    u.to_binary(path)
    v = GridFunction.from_binary(g, path)
    assert np.array_equal(u.values, v.values)
    raw = np.fromfile(path, dtype="<f8")
    assert raw.size == g.n_nodes  # little-endian float64, row-major


def test_binary_size_mismatch_rejected(tmp_path):
    g = Grid.box(1, 0.25, 2.0)
    path = tmp_path / "bad.bin"
    np.zeros(3).astype("<f8").tofile(path)
    with pytest.raises(GridError):
        GridFunction.from_binary(g, path)


def test_restricted_zeroes_outside_mask():
    g = Grid.box(1, 0.5, 2.0)
    dom = build_ball_domain(g, [0.0], 1.0)
    u = GridFunction.constant(g, 2.0)
    r = u.restricted(dom)
    assert np.all(r.values[~dom.mask] == 0.0)
    assert r.exterior == 0.0
