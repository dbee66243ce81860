import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dunkl_hardy.measure import (
    GeometryError,
    WeightedMeasure,
    ball_interval,
    hl_maximal,
    mu_signed,
    radius_sweep,
)
from dunkl_hardy.operators import SampledFunction


def test_mu_closed_forms():
    assert mu_signed(WeightedMeasure.dunkl(0.5), 2.0, 0.0) == pytest.approx(4.0)
    assert mu_signed(WeightedMeasure.dunkl(1.0), 1.0, -1.0) == pytest.approx(2.0)
    assert mu_signed(WeightedMeasure.dunkl(0.25), 3.7, 3.7) == 0.0
    with pytest.raises(ValueError):
        mu_signed(WeightedMeasure.dunkl(1.0), np.nan, 0.0)


def test_antiderivative_odd_and_increasing():
    x = np.linspace(-5, 5, 1001)
    for lam in (0.0, 0.25, 2.0):
        F = WeightedMeasure.dunkl(lam).antiderivative
        assert np.all(np.diff(F(x)) > 0)
        assert np.allclose(F(-x), -F(x))


def test_quasi_triangle_with_constant_one(rng):
    m = WeightedMeasure.dunkl(1.0)
    x, y, z = rng.uniform(-10, 10, (3, 10_000))
    assert np.all(m.distance(x, z) <= m.distance(x, y) + m.distance(y, z) + 1e-9)


def test_ball_at_origin_symmetric():
    for lam in (0.25, 1.0):
        b = ball_interval(WeightedMeasure.dunkl(lam), 0.0, 2.0)
        r = 2.0 ** (1 / (2 * lam + 1))
        assert b.lo == pytest.approx(-r) and b.hi == pytest.approx(r)


def test_ball_endpoint_root_oracle():
    b = ball_interval(WeightedMeasure.dunkl(1.0), 10.0, 1.0)
    assert b.right == pytest.approx(1001 ** (1 / 3) - 10, rel=1e-10)
    assert b.right == pytest.approx(3.332e-3, rel=1e-3)


def test_ball_touching_origin():
    for lam in (0.25, 1.0, 2.0):
        x0 = 1.7
        b = ball_interval(WeightedMeasure.dunkl(lam), x0, x0 ** (2 * lam + 1))
        assert b.lo == 0.0


@settings(max_examples=80, deadline=None)
@given(x0=st.floats(-50, 50), r0=st.floats(1e-4, 1e3), lam=st.sampled_from([0.0, 0.25, 1.0, 2.0]))
def test_ball_measure_is_radius(x0, r0, lam):
    m = WeightedMeasure.dunkl(lam)
    b = ball_interval(m, x0, r0)
    # mu is a difference of F values, so the floor is relative to |F(x0)|
    floor = 64 * np.finfo(float).eps * (abs(float(m.antiderivative(x0))) + r0)
    assert abs(m.mu(b.hi, b.lo) - 2 * r0) <= floor + 1e-12 * r0


@pytest.mark.parametrize("lam", [0.25, 1.0, 2.0])
@pytest.mark.parametrize("x0", [1.0, 10.0])
def test_half_widths_comparable_away_from_origin(lam, x0):
    m = WeightedMeasure.dunkl(lam)
    h = 2 * lam + 1
    for r0 in np.geomspace(1e-6, (x0 / 2) ** h * 0.99, 12):
        b = ball_interval(m, x0, r0)
        for delta in (b.left, b.right):
            q = delta * x0 ** (2 * lam) / r0
            assert 1 / (2 * h) <= q <= 2 / h


def test_custom_measure_matches_closed_form():
    c = WeightedMeasure.custom(lambda x: 3 * np.abs(x) ** 2)
    x = np.array([-1.5, 0.3, 2.0])
    assert np.allclose(c.antiderivative(x), np.sign(x) * np.abs(x) ** 3, rtol=1e-6)
    b = ball_interval(c, 1.0, 0.5)
    assert c.mu(b.hi, b.lo) == pytest.approx(1.0, rel=1e-9)


def test_custom_measure_rejects_negative_density():
    with pytest.raises(ValueError):
        WeightedMeasure.custom(lambda x: np.sin(x))


def test_solve_failure_carries_bracket():
    m = WeightedMeasure(lambda x: 0 * x, lambda x: np.tanh(np.asarray(x, dtype=float)), "custom")
    with pytest.raises(GeometryError) as err:
        m.inverse(np.array([2.0]))
    assert err.value.bracket is not None


def test_radius_sweep():
    r = radius_sweep(1.0, 16.0)
    assert r[0] == 1.0 and r[-1] == pytest.approx(16.0)
    assert np.allclose(r[1:] / r[:-1], 2**0.125)
    with pytest.raises(ValueError):
        radius_sweep(2.0, 1.0)


def _indicator(m, r=1.0):
    b = ball_interval(m, 0.0, r)
    return SampledFunction.from_callable(lambda x: ((x >= b.lo) & (x <= b.hi)).astype(float), (b.lo, b.hi), 2001, "linear")


def test_hl_constant_function():
    m = WeightedMeasure.dunkl(0.5)
    one = SampledFunction.from_callable(lambda x: np.ones_like(x), (-50.0, 50.0), 201, "linear")
    grid = np.linspace(-3, 3, 13)
    r = radius_sweep(1e-3, 10.0)
    assert np.allclose(hl_maximal(m, one, grid, radii=r).values, 1.0, rtol=1e-9)


def test_hl_indicator_of_ball():
    m = WeightedMeasure.dunkl(1.0)
    f = _indicator(m)
    at_center = hl_maximal(m, f, np.array([0.0, 0.5])).values[0]
    assert at_center == pytest.approx(1.0, rel=1e-3)
    # at measure distance 9 the best ball has radius 10 and average 1/10
    far = float(m.inverse(9.0))
    val = hl_maximal(m, f, np.array([far, far + 1])).values[0]
    assert 0.1 / 2 <= val <= 0.1 * 2
    rs = np.linspace(8, 12, 4001)
    exact = np.max(np.clip(np.minimum(1.0, 9 + rs) - np.maximum(-1.0, 9 - rs), 0, None) / (2 * rs))
    assert val <= exact * (1 + 1e-6)


def test_hl_monotone_in_f():
    m = WeightedMeasure.dunkl(0.25)
    f = SampledFunction.from_callable(lambda x: np.exp(-x * x), (-6.0, 6.0), 801)
    g = SampledFunction.from_callable(lambda x: np.exp(-x * x) + 0.5 * np.exp(-(x - 1) ** 2), (-6.0, 7.0), 801)
    grid = np.linspace(-4, 4, 17)
    r = radius_sweep(1e-2, 1e3)
    assert np.all(hl_maximal(m, g, grid, r).values >= hl_maximal(m, f, grid, r).values - 1e-12)
