import math

import numpy as np
import pytest

from dunkl_hardy.kernels import triangular_kernel
from dunkl_hardy.maximal import (
    HarmonicField,
    HypothesisError,
    PiecewiseLinear,
    TestFunctionFamily,
    bump_maximals,
    classical_dilation_maximal,
    counterexample_decay,
    default_family,
    grand_maximal,
    lipschitz_bump_maximal,
    lp_quasinorm,
    make_atom,
    nontangential_maximal,
    poisson_maximal,
    radial_maximal,
    schwartz_moment_bump,
)
from dunkl_hardy.measure import WeightedMeasure, ball_interval
from dunkl_hardy.operators import SampledFunction
from dunkl_hardy.special import LambdaParam


def box(lo=-1.0, hi=1.0, height=1.0):
    return SampledFunction(np.array([lo, hi]), np.array([height, height]), "linear", (lo, hi))


def hat(lo=-1.0, hi=1.0):
    c = 0.5 * (lo + hi)
    return SampledFunction(np.array([lo, c, hi]), np.array([0.0, 1.0, 0.0]), "linear", (lo, hi))


def moment(fn, k, n=200_001):
    x = np.linspace(-1, 1, n)
    return np.trapezoid(x**k * fn(x), x)


# ---------------------------------------------------------------- kernels


@pytest.mark.parametrize("lam", [0.25, 1.0])
def test_radial_triangle_of_box_is_one(lam):
    # in the measure variable the triangle average of 1 over a ball inside the support is exactly 1
    m = WeightedMeasure.dunkl(lam)
    k = triangular_kernel(m)
    val = radial_maximal(k, m, box(), [0.0])
    assert val[0] == pytest.approx(1.0, rel=1e-4)


def test_radial_of_zero_and_linearity():
    m = WeightedMeasure.dunkl(0.5)
    k = triangular_kernel(m)
    x = np.array([-2.0, 0.3, 4.0])
    assert np.all(radial_maximal(k, m, box(height=0.0), x) == 0)
    one = radial_maximal(k, m, hat(), x)
    two = radial_maximal(k, m, SampledFunction(hat().nodes, 2 * hat().values, "linear", (-1, 1)), x)
    assert np.allclose(two, 2 * one, rtol=1e-12)


def test_nontangential_dominates_radial():
    m = WeightedMeasure.dunkl(1.0)
    k = triangular_kernel(m)
    x = np.array([-3.0, -0.5, 0.0, 1.5, 6.0])
    rad = radial_maximal(k, m, hat(-0.5, 1.0), x)
    nt = nontangential_maximal(k, m, hat(-0.5, 1.0), x, aperture=1.0)
    assert np.all(nt >= rad * (1 - 1e-12))
    narrow = nontangential_maximal(k, m, hat(-0.5, 1.0), x, aperture=1e-9, cone_points=3)
    assert np.allclose(narrow, rad, rtol=1e-6)


# ---------------------------------------------------------------- grand maximal


def test_default_family_is_admissible():
    for gamma in (1 / 1.5, 1 / 3, 1.0):
        fam = default_family(gamma)
        assert len(fam) == 32
        for psi in fam.members:
            assert psi.holder_constant(gamma) <= 1 + 1e-9
            assert max(abs(v) for v in psi.values) <= 1 + 1e-12


def test_family_rejects_bad_members():
    steep = PiecewiseLinear((-1.0, -0.01, 0.0, 0.01, 1.0), (0.0, 0.0, 1.0, 0.0, 0.0), "steep")
    with pytest.raises(ValueError):
        TestFunctionFamily((steep,), 0.5)
    tall = PiecewiseLinear((-1.0, 0.0, 1.0), (0.0, 2.0, 0.0), "tall")
    with pytest.raises(ValueError):
        TestFunctionFamily((tall,), 1.0)


def test_grand_maximal_basic_properties():
    m = WeightedMeasure.dunkl(0.5)
    x = np.array([-5.0, -0.7, 0.0, 0.4, 3.0])
    assert np.all(grand_maximal(m, box(height=0.0), x) == 0)
    g1 = grand_maximal(m, hat(), x)
    f2 = SampledFunction(hat().nodes, 2 * hat().values, "linear", (-1, 1))
    assert np.allclose(grand_maximal(m, f2, x), 2 * g1, rtol=1e-10)
    fam = default_family(1 / m.homogeneity)
    small = grand_maximal(m, hat(), x, family=fam.subfamily(8))
    assert np.all(small <= g1 * (1 + 1e-12))


def test_grand_maximal_lower_bound_for_box():
    # the widest triangle centred at 0 over the ball B(0, 1) sees half the measure of the box
    m = WeightedMeasure.dunkl(1.0)
    g = grand_maximal(m, box(), [0.0])
    psi = default_family(1 / m.homogeneity).members[0]
    peak = max(psi.values)
    assert g[0] >= 0.5 * peak * (1 - 1e-6)


def test_grand_maximal_decays_like_inverse_measure_far_out():
    m = WeightedMeasure.dunkl(0.25)
    x = np.array([20.0, 40.0, 80.0])
    g = grand_maximal(m, box(), x)
    slope = np.polyfit(np.log(m.antiderivative(x)), np.log(g), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.05)


# ---------------------------------------------------------------- harmonic extensions


def test_harmonic_field_near_and_far_agree():
    # the same point evaluated once spectrally and once through the Chebyshev proxy
    lp = LambdaParam(0.5)
    f = hat(-0.5, 1.0)
    u = np.array([2.5, 3.5])
    y = np.array([0.5, 1.0, 2.0])
    spec = HarmonicField(lp, f, f.support, xi_max=60.0, near_factor=4.0)
    prox = HarmonicField(lp, f, f.support, xi_max=60.0, near_factor=1.0)
    assert np.all(np.abs(u) <= spec.near) and np.all(np.abs(u) > prox.near)
    for kind in ("P", "Q"):
        a, b = spec.evaluate(kind, u, y), prox.evaluate(kind, u, y)
        assert np.allclose(a, b, rtol=2e-3, atol=1e-6), kind


def test_poisson_maximal_linear_and_cone_ordered():
    lp = LambdaParam(1.0)
    f = hat()
    x = np.array([-2.0, 0.0, 0.5, 3.0])
    e1, m1 = poisson_maximal(lp, f, x)
    f2 = SampledFunction(f.nodes, 2 * f.values, "linear", (-1, 1))
    e2, m2 = poisson_maximal(lp, f2, x)
    assert np.allclose(e2, 2 * e1, rtol=1e-8)
    assert np.allclose(m2, 2 * m1, rtol=1e-8)
    assert np.all(e1 > 0) and np.all(m1 > 0)
    nabla, plus = bump_maximals(lp, f, x)
    assert np.all(nabla >= plus * (1 - 1e-12))


# ---------------------------------------------------------------- atoms


@pytest.mark.parametrize("p,n", [(1.0, 0), (0.6, 1), (0.4, 2)])
def test_atom_moments_and_size(p, n):
    m = WeightedMeasure.dunkl(0.75)
    ball = ball_interval(m, 1.5, 0.8)
    atom = make_atom(m, p, n, ball, seed=7)
    assert atom.size_product() <= 1 + 1e-12
    mom = atom.moments()
    scale = atom.moments(0, 64)  # same rule, so compare against the L1 size
    l1 = 2 * ball.radius * atom.size_product() / (2 * ball.radius) ** (1 / p)
    assert np.all(np.abs(mom) <= 1e-9 * max(1.0, l1 * max(1.0, abs(ball.center)) ** (2 * n + 2)))
    assert scale.shape == (1,)
    xs = np.linspace(ball.lo - 1, ball.hi + 1, 501)
    out = (xs < ball.lo) | (xs > ball.hi)
    assert np.all(atom(xs)[out] == 0)


def test_atom_is_seed_deterministic_and_checks_hypotheses():
    m = WeightedMeasure.dunkl(0.5)
    ball = ball_interval(m, -0.3, 0.5)
    a = make_atom(m, 0.8, 0, ball, seed=3)
    b = make_atom(m, 0.8, 0, ball, seed=3)
    xs = np.linspace(ball.lo, ball.hi, 101)
    assert np.array_equal(a(xs), b(xs))
    with pytest.raises(HypothesisError):
        make_atom(m, 0.4, 0, ball, seed=1)
    with pytest.raises(ValueError):
        make_atom(m, 1.5, 0, ball, seed=1)


# ---------------------------------------------------------------- moment bumps and the classical counterexample


@pytest.mark.parametrize("order", [0, 1, 2, 3])
def test_schwartz_moment_bump(order):
    phi = schwartz_moment_bump(order)
    assert phi.support == (-1.0, 1.0)
    for k in range(order + 1):
        assert abs(moment(phi, k)) < 1e-8
    assert moment(phi, order + 1) == pytest.approx(1.0, rel=1e-6)
    assert phi(np.array([-1.5, 1.5])).tolist() == [0.0, 0.0]


def test_counterexample_sup_decays_like_one_over_t():
    t = 2.0 ** np.arange(3, 9)
    table = counterexample_decay(0, hat(), t)
    assert table.mass == pytest.approx(1.0, rel=1e-10)
    assert table.slope == pytest.approx(-1.0, abs=0.05)
    with pytest.raises(ValueError):
        counterexample_decay(0, hat(), [8.0, 16.0])
    with pytest.raises(ValueError):
        counterexample_decay(0, box(height=2.0), t)


def test_dilation_maximal_of_triangle_matches_dense_sweep():
    phi = hat()
    f = box(-0.5, 0.5)
    x = np.array([0.0, 0.7, 3.0])
    got = lipschitz_bump_maximal(f, phi, x)
    t = np.geomspace(1 / 32, 1e3, 4001)
    ys = np.linspace(-0.5, 0.5, 20001)
    w = np.full(ys.size, ys[1] - ys[0])
    w[[0, -1]] *= 0.5
    dense = np.array([np.max(np.abs(phi((xi - ys[None, :]) / t[:, None]) @ w / t)) for xi in x])
    assert np.allclose(got, dense, rtol=2e-2)
    cone = lipschitz_bump_maximal(f, phi, x, aperture=1.0)
    assert np.all(cone >= got * (1 - 1e-12))


def test_zero_integral_bump_needs_the_unconditioned_maximal():
    phi = schwartz_moment_bump(0)
    with pytest.raises(HypothesisError):
        lipschitz_bump_maximal(hat(), phi, [0.0])
    val = classical_dilation_maximal(hat(), phi, [0.0, 5.0])
    assert np.all(np.isfinite(val)) and np.all(val > 0)


# ---------------------------------------------------------------- quasi-norms


def test_lp_quasinorm_exact_power_law():
    m = WeightedMeasure.lebesgue()
    x = np.concatenate([-np.geomspace(1e3, 1, 60), np.linspace(-1, 1, 41)[1:-1], np.geomspace(1, 1e3, 60)])
    vals = np.minimum(1.0, 1 / np.maximum(x * x, 1e-300))
    res = lp_quasinorm(m, x, vals, 1.0)
    assert res.finite
    assert res.value == pytest.approx(4.0, rel=1e-9)
    assert res.decay_exponent == pytest.approx(-2.0, abs=1e-9)
    half = lp_quasinorm(m, x, vals, 0.8)
    # int min(1, |x|^-1.6) = 2 + 2 / 0.6
    assert half.value == pytest.approx((2 + 2 / 0.6) ** 1.25, rel=1e-9)


def test_lp_quasinorm_flags_divergent_tail():
    m = WeightedMeasure.lebesgue()
    x = np.geomspace(1, 1e4, 80)
    x = np.concatenate([-x[::-1], x])
    res = lp_quasinorm(m, x, np.abs(x) ** -1.0, 1.0)
    assert not res.finite and math.isinf(res.value)
