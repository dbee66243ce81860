import math

import numpy as np
import pytest

from dunkl_hardy.kernels import (
    SamplingPlan,
    check_kernel_class,
    conj_poisson_kernel,
    even_bump,
    hilbert_kernel,
    injected_jump_kernel,
    mollify_k1,
    poisson_kernel,
    poisson_scale_kernel,
    scale_kernel_K,
    scale_y,
    split_kernels,
    translate_even,
    triangular_kernel,
)
from dunkl_hardy.measure import WeightedMeasure
from dunkl_hardy.operators import translate
from dunkl_hardy.quadrature import integrate_weighted_line
from dunkl_hardy.special import LambdaParam


class TestPoisson:
    def test_closed_form_at_origin(self, lp):
        t = np.linspace(-4, 4, 17)
        for y in (0.1, 1.0, 3.0):
            ref = lp.a_lambda * y * (y * y + t * t) ** (-lp.lam - 1)
            assert np.allclose(poisson_kernel(lp, 0.0, y, t), ref, rtol=1e-12)

    def test_swap_symmetry(self, lp):
        assert poisson_kernel(lp, 1.3, 0.7, -0.4) == pytest.approx(poisson_kernel(lp, -0.4, 0.7, 1.3), rel=1e-9)

    def test_unit_mass(self):
        lp = LambdaParam(1.0)
        r = integrate_weighted_line(lambda t: poisson_kernel(lp, 2.0, 0.5, t), lp, tol=1e-11, breakpoints=(2.0, -2.0))
        assert r.value == pytest.approx(1.0, abs=1e-7)

    def test_positive(self, lp, rng):
        x, t = rng.uniform(-20, 20, (2, 2000))
        y = 10.0 ** rng.uniform(-3, 2, 2000)
        assert np.all(poisson_kernel(lp, x, y, t) > 0)

    def test_classical(self):
        lp = LambdaParam(0.0)
        val = lp.c_lambda * poisson_kernel(lp, 0.3, 0.5, -1.1)
        assert val == pytest.approx(0.5 / (math.pi * (0.25 + 1.96)), rel=1e-14)

    def test_matches_translation_of_profile(self):
        # the kernel is the lambda-translate of P_y(u) = a y (y^2 + u^2)^(-lam-1)
        lp = LambdaParam(0.5)
        p = lambda u: lp.a_lambda * 0.6 * (0.36 + np.asarray(u) ** 2) ** (-lp.lam - 1)  # noqa: E731
        for x, t in ((0.8, 0.2), (-1.5, 2.0)):
            assert poisson_kernel(lp, x, 0.6, t) == pytest.approx(translate(p, lp, x, t, even=True), rel=1e-9)

    def test_rejects_nonpositive_height(self, lp):
        with pytest.raises(ValueError):
            poisson_kernel(lp, 0.0, 0.0, 1.0)


class TestConjugate:
    def test_vanishes_on_diagonal_at_origin(self, lp):
        assert conj_poisson_kernel(lp, 0.0, 0.4, 0.0) == 0.0

    def test_closed_form_at_origin(self, lp):
        t = np.linspace(-3, 3, 13)
        ref = -lp.a_lambda * t * (0.25 + t * t) ** (-lp.lam - 1)
        assert np.allclose(conj_poisson_kernel(lp, 0.0, 0.5, t), ref, rtol=1e-12, atol=1e-15)

    def test_classical(self):
        lp = LambdaParam(0.0)
        val = lp.c_lambda * conj_poisson_kernel(lp, 0.3, 0.5, -1.1)
        assert val == pytest.approx(1.4 / (math.pi * (0.25 + 1.96)), rel=1e-14)


class TestHilbert:
    def test_sign(self, lp):
        assert hilbert_kernel(lp, 1.0, 0.5) > 0
        assert hilbert_kernel(lp, 1.0, 2.0) < 0

    def test_homogeneity(self):
        lp = LambdaParam(0.5)
        assert hilbert_kernel(lp, 3.0, 6.0) / hilbert_kernel(lp, 1.0, 2.0) == pytest.approx(3.0**-2, rel=1e-9)

    def test_boundary_limit_of_conjugate(self):
        lp = LambdaParam(1.0)
        h = hilbert_kernel(lp, 1.0, 0.3)
        gaps = [abs(conj_poisson_kernel(lp, 1.0, y, 0.3) - h) for y in (0.1, 0.01, 0.001)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-3 * abs(h)

    def test_diagonal_rejected(self, lp):
        with pytest.raises(ValueError):
            hilbert_kernel(lp, 1.0, 1.0)


class TestScaleKernel:
    def test_origin_value(self, lp):
        for r in (1e-3, 1.0, 1e3):
            assert scale_kernel_K(lp, r, 0.0, 0.0) == pytest.approx(lp.a_lambda, rel=1e-12)

    def test_scale_invariance(self):
        lp = LambdaParam(1.0)
        r, x, t, s = 0.3, 1.2, -0.5, 2.0
        lhs = scale_kernel_K(lp, abs(s) ** 3 * r, s * x, s * t)
        assert lhs == pytest.approx(scale_kernel_K(lp, r, x, t), rel=1e-8)

    def test_scale_map_branches(self):
        lp = LambdaParam(1.0)
        assert scale_y(lp, 1.0, 2.0) == pytest.approx(1.0 / 4.0)
        assert scale_y(lp, 27.0, 2.0) == pytest.approx(3.0)
        assert scale_y(lp, 8.0, 0.0) == pytest.approx(2.0)

    def test_symmetry_fails_off_the_origin(self):
        # y depends on x alone, so swapping x and t changes the height
        lp = LambdaParam(0.25)
        a, b = scale_kernel_K(lp, 0.5, 1.0, 2.0), scale_kernel_K(lp, 0.5, 2.0, 1.0)
        assert abs(a - b) > 0.1 * max(a, b)

    def test_symmetric_when_heights_agree(self, lp, rng):
        r = 10.0 ** rng.uniform(-2, 2, 100)
        x = rng.uniform(-3, 3, 100)
        assert np.allclose(scale_kernel_K(lp, r, x, -x), scale_kernel_K(lp, r, -x, x), rtol=1e-10)


class TestBumpTranslation:
    def test_classical_is_shift(self):
        lp = LambdaParam(0.0)
        assert translate_even(lp, even_bump, 1.0, 0.6, 0.5) == pytest.approx(2 * even_bump(0.8))

    def test_support_interval(self):
        lp = LambdaParam(1.0)
        t = np.array([3.9, 4.2, 5.8, 6.1, -3.9, -4.5])
        vals = translate_even(lp, even_bump, 5.0, t)
        assert vals[0] == 0 and vals[3] == 0 and vals[4] == 0
        assert np.all(vals[[1, 2, 5]] > 0)

    def test_matches_generic_translation(self):
        lp = LambdaParam(0.5)
        for x, t in ((0.5, 0.2), (1.0, -0.4)):
            ref = translate(lambda u: 0.5 ** -2 * even_bump(np.asarray(u) / 0.5), lp, x, t, even=True)
            assert translate_even(lp, even_bump, x, t, 0.5) == pytest.approx(ref, rel=1e-8, abs=1e-12)


class TestSplitKernels:
    lp = LambdaParam(1.0)

    def test_parity(self):
        t = np.linspace(-2, 2, 81)
        k3, k4 = split_kernels(self.lp, even_bump, 0.05, 1.5, t)
        k3m, k4m = split_kernels(self.lp, even_bump, 0.05, 1.5, -t)
        assert np.array_equal(k3, -k3m)
        assert np.array_equal(k4, k4m)

    def test_diagonal_size_and_sign(self):
        vals = []
        for x in (0.5, 1.5, 4.0, -2.0):
            for frac in (0.1, 0.3, 0.9):
                y_max = 2.0 ** -4 * abs(x)
                r = frac * y_max * abs(x) ** 2
                k3, _ = split_kernels(self.lp, even_bump, r, x, np.array([x, abs(x)]))
                assert k3[0] > 0
                # on the positive half-line K3 carries the sign of x
                assert np.sign(k3[1]) == np.sign(x)
                vals.append(k3[0])
        assert min(vals) > 0.05 and max(vals) / min(vals) < 20

    def test_support_avoids_origin(self):
        k3, k4 = split_kernels(self.lp, even_bump, 0.05, 1.5, np.linspace(-0.5, 0.5, 41))
        assert np.all(k3 == 0) and np.all(k4 == 0)

    def test_height_restriction(self):
        with pytest.raises(ValueError):
            split_kernels(self.lp, even_bump, 10.0, 1.5, 0.0)
        with pytest.raises(ValueError):
            split_kernels(self.lp, even_bump, 0.1, 0.0, 0.0)


class TestMollifier:
    k = triangular_kernel(WeightedMeasure.dunkl(1.0))

    def test_symmetry(self, rng):
        for x, y in rng.uniform(0.6, 1.4, (10, 2)):
            assert mollify_k1(self.k, 0.1, x, 1.0, y) == pytest.approx(mollify_k1(self.k, 0.1, y, 1.0, x), rel=1e-12)

    def test_closeness_rate(self):
        taus = np.array([0.1, 0.05, 0.025, 0.0125])
        ys = np.linspace(0.5, 1.5, 41)
        err = [max(abs(mollify_k1(self.k, tau, 1.0, 1.0, y) - float(self.k(1.0, 1.0, y))) for y in ys) for tau in taus]
        slope = np.polyfit(np.log(taus), np.log(err), 1)[0]
        assert slope == pytest.approx(self.k.gamma, abs=0.15)

    def test_pointwise_convergence(self, rng):
        for x, y in rng.uniform(0.5, 1.5, (10, 2)):
            assert mollify_k1(self.k, 1e-4, x, 1.0, y) == pytest.approx(float(self.k(1.0, x, y)), abs=1e-3)

    def test_rejects_other_classes(self):
        with pytest.raises(ValueError):
            mollify_k1(poisson_scale_kernel(LambdaParam(1.0)), 0.1, 1.0, 1.0, 1.0)


class TestClassCheck:
    plan = SamplingPlan(n_pairs=800, seed=3)

    def test_triangular_is_compact_lipschitz(self):
        rep = check_kernel_class(triangular_kernel(WeightedMeasure.dunkl(1.0)), self.plan)
        assert rep.passed
        assert rep.holder_exponent == pytest.approx(1.0, abs=0.15)

    @pytest.mark.parametrize("lam", [0.25, 1.0, 2.0])
    def test_poisson_scale_kernel_exponents(self, lam):
        lp = LambdaParam(lam)
        rep = check_kernel_class(poisson_scale_kernel(lp), self.plan)
        assert rep.decay_exponent == pytest.approx(-(2 * lam + 2) / (2 * lam + 1), abs=0.1)
        assert rep.holder_exponent == pytest.approx(1 / (2 * lam + 1), abs=0.15)
        assert rep.values["diagonal_min"] >= 0.05 * lp.a_lambda

    def test_injected_jump_is_caught(self):
        k = injected_jump_kernel(poisson_scale_kernel(LambdaParam(1.0)))
        rep = check_kernel_class(k, self.plan)
        assert not rep.status["holder"]
        r, x, t, z = rep.witnesses["holder"]
        jump = x + 0.1
        assert min(t, z) <= jump <= max(t, z)
        # the witness reproduces a large difference quotient
        assert abs(float(k(r, x, t)) - float(k(r, x, z))) > 0.1
