"""Maximal functions, atoms, moment-vanishing bumps and the decay counterexample.

Conventions: d(x, t) = |F(x) - F(t)| with F the measure antiderivative, balls
B(x, r) have measure 2r, and every sweep over a continuous scale parameter is
geometric with ratio 2^(1/8).  Suprema are therefore resolution limited.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .kernels import KernelHandle, conj_poisson_kernel, even_bump, poisson_kernel, translate_even
from .measure import BallInterval, WeightedMeasure, radius_sweep
from .operators import DunklSpectrum, SampledFunction, half_line_rule, line_rule
from .quadrature import gauss_legendre
from .special import LambdaParam, bessel_j_normalized_bulk

__all__ = [
    "TestFunctionFamily",
    "default_family",
    "cusp_profile",
    "grand_maximal",
    "radial_maximal",
    "nontangential_maximal",
    "HarmonicField",
    "poisson_maximal",
    "bump_maximals",
    "lp_quasinorm",
    "Atom",
    "make_atom",
    "schwartz_moment_bump",
    "counterexample_decay",
    "DecayTable",
    "lipschitz_bump_maximal",
    "classical_dilation_maximal",
    "HypothesisError",
]

log = logging.getLogger(__name__)


class HypothesisError(ValueError):
    """A theorem hypothesis required by the requested computation fails."""


# ---------------------------------------------------------------------------
# grand maximal function


@dataclass(frozen=True)
class PiecewiseLinear:
    """A continuous piecewise-linear profile on [-1, 1] vanishing at the ends."""

    knots: tuple
    values: tuple
    label: str = ""

    def __call__(self, a):
        return np.interp(a, self.knots, self.values, left=0.0, right=0.0)

    def holder_constant(self, gamma: float, n: int = 401) -> float:
        a = np.linspace(-1, 1, n)
        a = np.union1d(a, np.asarray(self.knots))
        v = self(a)
        diff = np.abs(v[:, None] - v[None, :])
        dist = np.abs(a[:, None] - a[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dist > 0, diff / dist**gamma, 0.0)
        return float(q.max())


@dataclass(frozen=True)
class TestFunctionFamily:
    """Admissible test profiles psi on [-1, 1] in normalized measure units.

    A member is placed at (x, r) as phi(t) = psi((F(t) - F(x)) / r); then
    supp phi lies in B(x, r), |phi| <= 1 and L(phi, gamma) = H(psi) r^-gamma,
    so H(psi) <= 1 is exactly the normalization L(phi, gamma) <= r^-gamma.
    """

    members: tuple
    gamma: float
    __test__ = False  # not a pytest class despite the name

    def __post_init__(self):
        for psi in self.members:
            vals = np.asarray(psi.values, dtype=float)
            if psi.knots[0] < -1 or psi.knots[-1] > 1 or vals[0] != 0 or vals[-1] != 0:
                raise ValueError(f"member {psi.label} is not supported in [-1, 1]")
            if np.max(np.abs(vals)) > 1 + 1e-12:
                raise ValueError(f"member {psi.label} exceeds sup norm 1")
            if psi.holder_constant(self.gamma) > 1 + 1e-9:
                raise ValueError(f"member {psi.label} violates L(phi, gamma) <= r^-gamma")

    def __len__(self):
        return len(self.members)

    def subfamily(self, n: int) -> "TestFunctionFamily":
        return TestFunctionFamily(self.members[:n], self.gamma)


def _normalized(knots, values, gamma, label):
    knots = np.asarray(knots, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = np.concatenate([[True], np.diff(knots) > 0])
    knots, values = knots[keep], values[keep]
    psi = PiecewiseLinear(tuple(knots), tuple(values), label)
    # 1% slack: the grid estimate of the Hoelder constant can fall short of the true sup
    scale = max(1.0, float(np.max(np.abs(values))), psi.holder_constant(gamma) * 1.01)
    return PiecewiseLinear(tuple(knots), tuple(np.asarray(values) / scale), label)


@lru_cache(maxsize=32)
def default_family(gamma: float, size: int = 32) -> TestFunctionFamily:
    """Triangles, trapezoids and signed pairs, all affinely placed in [-1, 1]."""
    members = []
    for w in (1.0, 0.5, 0.25, 0.125):
        for c in (0.0, -0.5, 0.5, -0.75, 0.75):
            if abs(c) + w > 1:
                continue
            members.append(_normalized((-1, c - w, c, c + w, 1), (0, 0, 1, 0, 0), gamma, f"tri(c={c},w={w})"))
    for w, flat in ((1.0, 0.5), (0.5, 0.25), (1.0, 0.25)):
        k = (-1, -w, -flat, flat, w, 1) if w < 1 else (-1, -flat, flat, 1)
        v = (0, 0, 1, 1, 0, 0) if w < 1 else (0, 1, 1, 0)
        members.append(_normalized(k, v, gamma, f"trap(w={w},flat={flat})"))
    for w in (1.0, 0.5, 0.25):
        for c in (0.0, -0.5, 0.5):
            if abs(c) + w > 1:
                continue
            k = (-1, c - w, c - w / 2, c, c + w / 2, c + w, 1)
            members.append(_normalized(k, (0, 0, 1, 0, -1, 0, 0), gamma, f"pair(c={c},w={w})"))
    # rank by width so that subfamilies keep a spread of shapes
    members = sorted(members, key=lambda p: (p.label.split("(")[0] != "tri", p.label))
    if len(members) < size:
        extra = []
        for w in (0.375, 0.625, 0.75, 0.875):
            extra.append(_normalized((-1, -w, 0, w, 1), (0, 0, 1, 0, 0), gamma, f"tri(c=0,w={w})"))
            extra.append(_normalized((-1, -w, -w / 2, 0, w / 2, w, 1), (0, 0, 1, 0, -1, 0, 0), gamma, f"pair(c=0,w={w})"))
        members += extra
    return TestFunctionFamily(tuple(members[:size]), gamma)


ROUNDING_SAFETY = 64.0
CUSP_HALF_WIDTH = 0.25


@lru_cache(maxsize=32)
def cusp_profile(gamma: float, half_width: float = CUSP_HALF_WIDTH, finest: float = 1e-12) -> PiecewiseLinear:
    """One-sided Hoelder cusp on [-w, w]: a linear ramp up to b = 0, then P - b^gamma.

    Piecewise-linear members flatten to Lipschitz at scales much finer than
    r, so against a zero-mass f far away they decay like r^-2 and miss the
    r^-(1 + gamma) that the class allows.  Placed with its cusp on the
    support of f, this member sees the full rate down to relative scale
    ``finest``.
    """
    w = half_width
    peak = w**gamma
    k = max(1, math.ceil(math.log(w / finest) / math.log(4.0)))
    right = w * 4.0 ** -np.arange(k, -1, -1)
    knots = np.concatenate([[-w, 0.0], right])
    values = np.concatenate([[0.0, peak], peak - right**gamma])
    values[-1] = 0.0
    return _normalized(knots, values, gamma, "cusp")


class _Cumulative:
    """G0(v) = int_{-inf}^v g and G1(v) = int_{-inf}^v w g(w) dw for g = f o F^-1.

    Cells are uniform in x, so the table stays fine near the origin where
    F^-1 is steep; in v they are graded.
    """

    def __init__(self, m: WeightedMeasure, f: Callable, support, cells: int = 1 << 14):
        lo, hi = support
        xe = np.linspace(lo, hi, cells + 1)
        if lo < 0 < hi:
            xe = np.union1d(xe, [0.0])
        g, w = gauss_legendre(10)
        h = np.diff(xe)
        nodes = xe[:-1, None] + 0.5 * h[:, None] * (g[None, :] + 1)
        dens = m.density(nodes) * np.asarray(f(nodes), dtype=float)
        c0 = 0.5 * h * (dens @ w)
        c1 = 0.5 * h * ((dens * m.antiderivative(nodes)) @ w)
        self.edges = m.antiderivative(xe)
        self.va, self.vb = float(self.edges[0]), float(self.edges[-1])
        self.h = float(np.min(np.diff(self.edges)))
        self.c0 = np.concatenate([[0.0], np.cumsum(c0)])
        self.c1 = np.concatenate([[0.0], np.cumsum(c1)])
        self.abs_mass = float(np.sum(0.5 * h * (np.abs(dens) @ w)))
        self.noise = np.finfo(float).eps * self.abs_mass
        # cubic Hermite in v with the exact derivatives g and v g: an O(h^2)
        # interpolation error would leave an eps/r floor in the far field
        fe = np.asarray(f(xe), dtype=float)
        self._g0 = CubicHermiteSpline(self.edges, self.c0, fe)
        self._g1 = CubicHermiteSpline(self.edges, self.c1, fe * self.edges)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        inside = (v > self.va) & (v < self.vb)
        g0 = np.where(v >= self.vb, self.c0[-1], 0.0)
        g1 = np.where(v >= self.vb, self.c1[-1], 0.0)
        if np.any(inside):
            vi = v[inside]
            g0[inside] = self._g0(vi)
            g1[inside] = self._g1(vi)
        return g0, g1


def grand_maximal(m: WeightedMeasure, f: Callable, x, gamma: float | None = None,
                  family: TestFunctionFamily | None = None, radii=None, support=None, return_argmax=False,
                  cusp: bool = True):
    """Lower bound for the grand maximal function f*_gamma at the points x.

    sup over the family and a geometric radius sweep of |int f phi dmu| / r.
    With ``cusp`` the sup also runs over ``cusp_profile`` centred on the
    middle of supp f (in the measure variable), whenever that member fits
    inside B(x, r).
    """
    if gamma is None:
        gamma = 1.0 / m.homogeneity
    if family is None:
        family = default_family(gamma)
    if len(family) == 0:
        raise ValueError("empty test family")
    if support is None:
        support = f.support
    cum = _Cumulative(m, f, support)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v0 = m.antiderivative(x)
    if radii is None:
        span = cum.vb - cum.va
        far = float(np.max(np.abs(v0))) + max(abs(cum.va), abs(cum.vb))
        radii = radius_sweep(max(4 * cum.h, 1e-6 * span), 4 * (far + span))
    radii = np.asarray(radii, dtype=float)
    vmax = max(abs(cum.va), abs(cum.vb))
    best = np.zeros(x.size)
    arg = np.zeros(x.size)
    members = [(psi, v0) for psi in family.members]
    if cusp:
        # the cusp position does not depend on x, so one row serves every x
        members.append((cusp_profile(gamma), np.array([0.5 * (cum.va + cum.vb)])))
    for psi, centre in members:
        a = np.asarray(psi.knots, dtype=float)
        pv = np.asarray(psi.values, dtype=float)
        slopes = np.diff(pv) / np.diff(a)
        ends = centre[:, None, None] + radii[None, :, None] * a[None, None, :]
        g0, g1 = cum(ends)
        d0 = np.diff(g0, axis=2)
        d1 = np.diff(g1, axis=2)
        vk = ends[:, :, :-1]
        # psi(a) = pv_k + slope_k (a - a_k) on segment k, a = (v - v0)/r
        seg = pv[:-1] * d0 + slopes / radii[None, :, None] * (d1 - vk * d0)
        val = np.abs(seg.sum(axis=2)) / radii[None, :]
        # rounding in the cumulative sums: without this a zero-mass f leaves
        # an eps / r tail that makes every p <= 1 norm diverge
        noise = np.abs(pv[:-1]) + np.abs(slopes) / radii[None, :, None] * (vmax + np.abs(vk))
        val = np.where(val > ROUNDING_SAFETY * cum.noise * noise.sum(axis=2) / radii[None, :], val, 0.0)
        if psi.label == "cusp":
            fits = np.abs(centre[0] - v0)[:, None] <= (1 - CUSP_HALF_WIDTH) * radii[None, :]
            val = np.where(fits, val, 0.0)
        j = np.argmax(val, axis=1)
        cand = val[np.arange(x.size), j]
        better = cand > best
        best = np.where(better, cand, best)
        arg = np.where(better, radii[j], arg)
    return (best, arg) if return_argmax else best


# ---------------------------------------------------------------------------
# maximal functions of a general kernel


def _v_rule(m, support, panels=400, order=8):
    lo, hi = support
    va, vb = float(m.antiderivative(lo)), float(m.antiderivative(hi))
    edges = np.linspace(va, vb, panels + 1)
    if va < 0 < vb:
        edges = np.union1d(edges, [0.0])
    g, w = gauss_legendre(order)
    h = np.diff(edges)
    v = (edges[:-1, None] + 0.5 * h[:, None] * (g[None, :] + 1)).ravel()
    wv = (0.5 * h[:, None] * w[None, :]).ravel()
    return v, wv


def _kernel_averages(k: KernelHandle, f, s, radii, support):
    # int k(r, s, t) f(t) dmu(t) / r for all (s, r), done in the measure variable
    m = k.measure
    v, wv = _v_rule(m, support)
    t = m.inverse(v)
    fw = np.asarray(f(t), dtype=float) * wv
    keep = fw != 0
    t, fw = t[keep], fw[keep]
    out = np.empty((np.size(s), np.size(radii)))
    for i, si in enumerate(np.atleast_1d(s)):
        vals = k(radii[:, None], si, t[None, :])
        out[i] = (vals @ fw) / radii
    return out


def _default_radii(m, f, x, support):
    lo, hi = support
    va, vb = float(m.antiderivative(lo)), float(m.antiderivative(hi))
    span = vb - va
    far = float(np.max(np.abs(m.antiderivative(np.atleast_1d(x))))) + max(abs(va), abs(vb))
    # below ~8 panels of the v-rule the kernel kinks are unresolved and averages overshoot
    return radius_sweep(span / 50, 8 * (far + span))


def radial_maximal(k: KernelHandle, m: WeightedMeasure, f, x, radii=None, support=None):
    """sup_r |int k(r, x, t) f(t) dmu(t) / r| over a geometric radius sweep."""
    if support is None:
        support = f.support
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if radii is None:
        radii = _default_radii(m, f, x, support)
    avg = _kernel_averages(k, f, x, np.asarray(radii), support)
    return np.max(np.abs(avg), axis=1)


def nontangential_maximal(k: KernelHandle, m: WeightedMeasure, f, x, aperture: float = 1.0,
                          radii=None, support=None, cone_points: int = 9):
    """sup over d(s, x) < aperture * r of |int k(r, s, t) f(t) dmu(t) / r|."""
    if aperture < 1:
        log.warning("aperture %.3g < 1 is outside the range used in the theory", aperture)
    if support is None:
        support = f.support
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if radii is None:
        radii = _default_radii(m, f, x, support)
    radii = np.asarray(radii)
    frac = np.linspace(-1, 1, cone_points) * (1 - 1e-9)
    out = np.zeros(x.size)
    for i, xi in enumerate(x):
        v0 = float(m.antiderivative(xi))
        best = 0.0
        for r in radii:
            s = m.inverse(v0 + aperture * r * frac)
            avg = _kernel_averages(k, f, s, np.array([r]), support)
            best = max(best, float(np.max(np.abs(avg))))
        out[i] = best
    return out


# ---------------------------------------------------------------------------
# Poisson and bump extensions of a compactly supported f


@lru_cache(maxsize=16)
def _bump_transform(lam: float, eta_max: float = 400.0, step: float = 0.04):
    """Spline of the Dunkl transform of the even bump exp(1 - 1/(1 - x^2))."""
    lp = LambdaParam(lam)
    x, w = half_line_rule(2 * lam, 1.0, 12.0 / eta_max, 16)
    fx = even_bump(x) * w
    eta = np.arange(0.0, eta_max + step / 2, step)
    vals = np.empty(eta.size)
    for s in range(0, eta.size, 1000):
        e = eta[s : s + 1000]
        if lp.is_classical:
            j0 = np.cos(np.outer(e, x))
        else:
            j0 = bessel_j_normalized_bulk(lam - 0.5, np.outer(e, x))
        vals[s : s + 1000] = 2 * lp.c_lambda * (j0 @ fx)
    return CubicSpline(eta, vals), eta_max


def bump_symbol(lp: LambdaParam, eta):
    spline, eta_max = _bump_transform(lp.lam)
    eta = np.abs(np.asarray(eta, dtype=float))
    return np.where(eta < eta_max, spline(np.minimum(eta, eta_max)), 0.0)


class HarmonicField:
    """Pf, Qf and f *_lam phi_y of a compactly supported f at arbitrary (u, y).

    Points with |u| <= near_radius use the transform side (DunklSpectrum).
    Points farther out use a Chebyshev proxy in t: the kernel is analytic in t
    on the support, so 32 nodes and the generalized moments
    c_lam int f(t) l_j(t) |t|^(2 lam) dt reproduce the integral to roundoff.
    """

    def __init__(self, lp: LambdaParam, f: Callable, support, xi_max: float,
                 near_factor: float = 3.0, proxy_nodes: int = 32):
        self.lp = lp
        lo, hi = support
        self.support = (float(lo), float(hi))
        self.radius = max(abs(lo), abs(hi))
        self.near = near_factor * self.radius
        self.spectrum = DunklSpectrum(lp, f, support, xi_max, u_max=self.near)
        k = np.arange(proxy_nodes)
        cheb = np.cos(np.pi * (k + 0.5) / proxy_nodes)
        self.t_nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * cheb
        xq, wq = line_rule(lp, lo, hi, min(0.05, (hi - lo) / 64), 16)
        fx = np.asarray(f(xq), dtype=float) * wq
        # barycentric Lagrange basis at the quadrature nodes
        bw = (-1.0) ** k * np.sin(np.pi * (k + 0.5) / proxy_nodes)
        diff = xq[:, None] - self.t_nodes[None, :]
        exact = diff == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = bw[None, :] / diff
        basis = terms / terms.sum(axis=1, keepdims=True)
        rows = np.any(exact, axis=1)
        basis[rows] = exact[rows].astype(float)
        self.moments = fx @ basis

    def _kernel(self, kind, u, y, t):
        if kind == "P":
            return poisson_kernel(self.lp, u, y, t)
        if kind == "Q":
            return conj_poisson_kernel(self.lp, u, y, t)
        return translate_even(self.lp, even_bump, u, t, y=y, levels=12, order=16)

    def _symbols(self, kind, y):
        xi = self.spectrum.xi
        if kind in ("P", "Q"):
            return np.exp(-np.outer(y, xi))
        return bump_symbol(self.lp, np.outer(y, xi))

    def evaluate(self, kind: str, u, y, mask=None) -> np.ndarray:
        """Values on the tensor grid u x y (shape (len(u), len(y))).

        ``mask`` (same shape) marks the far-field pairs worth evaluating; the
        rest are returned as 0.
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.zeros((u.size, y.size))
        near = np.abs(u) <= self.near
        if np.any(near):
            sym = self._symbols(kind, y)
            out[near] = self.spectrum.apply(u[near], sym, conjugate=(kind == "Q"))
        far_idx = np.nonzero(~near)[0]
        if far_idx.size:
            uu, yy = np.meshgrid(u[far_idx], y, indexing="ij")
            sel = np.ones(uu.shape, bool) if mask is None else mask[far_idx]
            if kind == "phi":
                # tau_u phi_y(-t) vanishes unless y > |u| - max|t|
                sel &= yy > np.abs(uu) - self.radius
            ui, yi = uu[sel], yy[sel]
            if ui.size:
                vals = np.zeros(ui.size)
                step = 4096
                for s in range(0, ui.size, step):
                    kk = self._kernel(kind, ui[s : s + step, None], yi[s : s + step, None], self.t_nodes[None, :])
                    vals[s : s + step] = kk @ self.moments
                block = np.zeros(uu.shape)
                block[sel] = vals
                out[far_idx] = block
        return out


def _cone_sup(values, u, y, x, halfwidth):
    """sup |values(u, y)| over |u - x| < halfwidth(x, y), including u = x."""
    absval = np.abs(values)
    out = np.zeros(x.size)
    for i, xi in enumerate(x):
        inside = np.abs(u[:, None] - xi) < halfwidth(xi, y)[None, :]
        out[i] = np.max(np.where(inside, absval, 0.0))
    return out


def _measure_halfwidth_mask(lp, u, y, x):
    # d(x, u) < r(x, y) with r the inverse of the scale map y(x, r)
    h = lp.homogeneity
    ax = abs(x)
    r = np.where(y < ax, y * ax ** (2 * lp.lam), y**h)
    fx = np.sign(x) * ax**h
    fu = np.sign(u) * np.abs(u) ** h
    return np.abs(fu[:, None] - fx) < r[None, :]


def poisson_maximal(lp: LambdaParam, f, x, aperture: float = 1.0, support=None, xi_max: float = 60.0,
                    y_grid=None, field=None):
    """(Euclidean-cone, measure-cone) nontangential Poisson maximal functions at x."""
    if support is None:
        support = f.support
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if field is None:
        field = HarmonicField(lp, f, support, xi_max)
    if y_grid is None:
        y_grid = radius_sweep(1e-3, 4 * (float(np.max(np.abs(x))) + field.radius))
    u = np.union1d(x, [])
    vals = field.evaluate("P", u, y_grid)
    euclid = _cone_sup(vals, u, y_grid, x, lambda xi, yy: aperture * yy)
    measure = np.zeros(x.size)
    absval = np.abs(vals)
    for i, xi in enumerate(x):
        inside = _measure_halfwidth_mask(lp, u, y_grid, xi) | (u[:, None] == xi)
        measure[i] = np.max(np.where(inside, absval, 0.0))
    return euclid, measure


def bump_maximals(lp: LambdaParam, f, x, support=None, xi_max: float = 60.0, y_grid=None, field=None):
    """((f * phi)_nabla, (f * phi)_+) at x for the even bump exp(1 - 1/(1 - u^2))."""
    if support is None:
        support = f.support
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if field is None:
        field = HarmonicField(lp, f, support, xi_max)
    if y_grid is None:
        y_grid = radius_sweep(1e-3, 4 * (float(np.max(np.abs(x))) + field.radius))
    u = np.union1d(x, [])
    vals = field.evaluate("phi", u, y_grid)
    nabla = _cone_sup(vals, u, y_grid, x, lambda xi, yy: yy)
    idx = np.searchsorted(u, x)
    plus = np.max(np.abs(vals[idx]), axis=1)
    return nabla, plus


# ---------------------------------------------------------------------------
# quasi-norms


@dataclass(frozen=True)
class NormResult:
    value: float
    tail_fraction: float
    decay_exponent: float  # fitted d log M / d log |v - v_peak| in the measure variable
    finite: bool


def lp_quasinorm(m: WeightedMeasure, x, values, p: float, c_lambda: float = 1.0, tail_points: int = 12) -> NormResult:
    """(int |M|^p dmu)^(1/p) for M sampled on the sorted grid x, times c_lambda/(2 lam + 1).

    The integral is done in the measure variable v = F(x) with exact
    power-law segments in |v - v_peak|; beyond the grid both tails are
    extrapolated with the decay exponent fitted on the outermost
    ``tail_points`` samples.
    """
    x = np.asarray(x, dtype=float)
    vals = np.abs(np.asarray(values, dtype=float))
    order = np.argsort(x)
    x, vals = x[order], vals[order]
    v = m.antiderivative(x)
    g = vals**p
    # power laws are taken in the distance from the peak, not from v = 0;
    # for a function far from the origin the two differ over the whole grid
    top = np.flatnonzero(vals == vals.max())
    vc = v[top[top.size // 2]]
    total = 0.0
    for a, b, ga, gb in zip(v[:-1] - vc, v[1:] - vc, g[:-1], g[1:]):
        if a * b > 0 and ga > 0 and gb > 0:
            k = math.log(gb / ga) / math.log(b / a)
            if abs(k + 1) > 1e-9:
                total += (gb * b - ga * a) / (k + 1)
            else:
                total += ga * a * math.log(b / a)
        else:
            total += 0.5 * (ga + gb) * (b - a)
    tail = 0.0
    exps = []
    finite = True
    for side in (slice(-tail_points, None), slice(None, tail_points)):
        vv = np.abs(v[side] - vc)
        mm = vals[side]
        ok = mm > 0
        if ok.sum() < 3:
            continue
        beta = -np.polyfit(np.log(vv[ok]), np.log(mm[ok]), 1)[0]
        exps.append(-beta)
        edge = int(np.argmax(vv))
        V, Mv = vv[edge], mm[edge]
        if p * beta > 1:
            tail += Mv**p * V / (p * beta - 1)
        else:
            finite = False
    total += tail
    scale = c_lambda / m.homogeneity
    value = (scale * total) ** (1 / p) if finite else math.inf
    frac = tail / total if total > 0 else 0.0
    return NormResult(value, frac, float(np.mean(exps)) if exps else math.nan, finite)


# ---------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class Atom:
    measure: WeightedMeasure
    ball: BallInterval
    p: float
    n: int
    values: SampledFunction
    profile: Callable = field(repr=False, compare=False, default=None)

    def __call__(self, x):
        return self.values(x)

    @property
    def support(self):
        return (self.ball.lo, self.ball.hi)

    def size_product(self) -> float:
        """||b||_inf mu(B)^(1/p), which must not exceed 1."""
        grid = np.linspace(-1, 1, 20001)
        sup = float(np.max(np.abs(self.profile(grid))))
        return sup * (2 * self.ball.radius) ** (1 / self.p)

    def moments(self, upto: int | None = None, order: int = 64) -> np.ndarray:
        """int mu(x, 0)^k b(x) dmu(x) for k = 0..upto, computed in v = F(x)."""
        upto = self.n if upto is None else upto
        g, w = gauss_legendre(order)
        v0 = float(self.measure.antiderivative(self.ball.center))
        r0 = self.ball.radius
        v = v0 + r0 * g
        vals = self.profile(g)
        return np.array([r0 * np.dot(w, vals * v**k) for k in range(upto + 1)])


def make_atom(m: WeightedMeasure, p: float, n: int, ball: BallInterval, seed: int,
              degree: int = 4, smoothness: int = 6, odd: bool = False) -> Atom:
    """A (p, n) atom supported in ``ball`` from a seeded polynomial-times-bump.

    The profile lives in the normalized measure variable a = (F(x) - F(x0)) / r0
    on [-1, 1]; moments 0..n in mu(x, 0) = F(x) are projected out by modified
    Gram-Schmidt with one reorthogonalization pass, and the result is scaled
    so that ||b||_inf = mu(B)^(-1/p).
    """
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if n < math.floor(1 / p - 1):
        raise HypothesisError(f"moment order n={n} below floor(1/p - 1)")
    if not ball.radius > 0 or ball.left + ball.right <= 0:
        raise ValueError("degenerate ball")
    rng = np.random.default_rng(seed)
    coef = rng.normal(size=degree + 1)
    if odd:
        coef[0::2] = 0.0
    g, w = gauss_legendre(96)
    v0 = float(m.antiderivative(ball.center))
    r0 = ball.radius
    scale = max(abs(v0), r0)

    def bump(a):
        return np.clip(1 - a * a, 0, None) ** smoothness

    # b = (poly - proj poly) * bump, the projection taken onto span{v^k, k <= n}
    # in the bump-weighted inner product, is orthogonal to every v^k.  The basis
    # is kept as coefficient vectors in s = v / scale so the profile is exact.
    wb = w * bump(g)
    s_nodes = (v0 + r0 * g) / scale
    basis = []
    for k in range(n + 1):
        c = np.zeros(n + 1)
        c[k] = 1.0
        q = s_nodes**k
        for _ in range(2):
            for cb, qb in basis:
                proj = np.dot(wb, q * qb)
                q = q - proj * qb
                c = c - proj * cb
        nrm = math.sqrt(np.dot(wb, q * q))
        if nrm < 1e-13:
            raise ArithmeticError(f"moment basis degenerates at order {k}")
        basis.append((c / nrm, q / nrm))
    poly_nodes = np.polynomial.polynomial.polyval(g, coef)
    beta = np.zeros(n + 1)
    resid = poly_nodes.copy()
    for _ in range(2):
        for cb, qb in basis:
            proj = np.dot(wb, resid * qb)
            resid = resid - proj * qb
            beta = beta + proj * cb

    def raw(a):
        a = np.asarray(a, dtype=float)
        s = (v0 + r0 * a) / scale
        poly = np.polynomial.polynomial.polyval(a, coef) - np.polynomial.polynomial.polyval(s, beta)
        return np.where(np.abs(a) < 1, poly * bump(a), 0.0)

    grid = np.linspace(-1, 1, 20001)
    sup = float(np.max(np.abs(raw(grid))))
    if sup == 0:
        raise ValueError("seed produced a vanishing atom")
    amp = (2 * r0) ** (-1 / p) / sup

    def profile(a):
        return amp * raw(a)

    def b(x):
        x = np.asarray(x, dtype=float)
        a = (m.antiderivative(x) - v0) / r0
        return profile(a)

    nodes = m.inverse(v0 + r0 * np.linspace(-1, 1, 4001))
    nodes = np.unique(nodes)
    sampled = _ExactSampled(nodes, b(nodes), "linear", (ball.lo, ball.hi), exact=b)
    return Atom(m, ball, p, n, sampled, profile)


class _ExactSampled(SampledFunction):
    """A SampledFunction that evaluates an exact formula when one is known."""

    def __init__(self, nodes, values, interpolation, support, exact):
        super().__init__(nodes, values, interpolation, support)
        object.__setattr__(self, "exact", exact)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        return np.where((x >= lo) & (x <= hi), self.exact(x), 0.0)


# ---------------------------------------------------------------------------
# S^m bumps and the counterexample


def _smooth_step(u):
    # 0 for u <= 0, 1 for u >= 1, C-infinity in between
    u = np.asarray(u, dtype=float)

    def psi(s):
        return np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)

    a, b = psi(u), psi(1 - u)
    return a / (a + b)


def cutoff_weight(x):
    """1 on |x| <= 1, 0 on |x| >= 2, smooth in between."""
    return _smooth_step(2.0 - np.abs(np.asarray(x, dtype=float)))


def schwartz_moment_bump(m_order: int, n_nodes: int = 4001) -> SampledFunction:
    """phi in S^m: moments 0..m vanish and int x^(m+1) phi = 1, supported in [-1, 1].

    Built as pi^(m+1) times the cutoff weight, where pi^s are the orthonormal
    polynomials for the normalized weight on [-2, 2] (modified Gram-Schmidt
    with reorthogonalization), then rescaled affinely into [-1, 1].
    """
    if m_order < 0:
        raise ValueError("m_order must be >= 0")
    if m_order + 1 > 8:
        raise ValueError("Gram-Schmidt beyond degree 8 is too ill-conditioned")
    g, w = gauss_legendre(200)
    # composite rule on [-2, 2] with panels aligned to the kinks of the weight
    edges = np.linspace(-2.0, 2.0, 9)
    xs = np.concatenate([0.5 * (a + b) + 0.5 * (b - a) * g for a, b in zip(edges[:-1], edges[1:])])
    ws = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    wt = ws * cutoff_weight(xs)
    wt = wt / wt.sum()
    polys = []  # coefficient vectors, lowest degree first
    vals = []
    for s in range(m_order + 2):
        c = np.zeros(s + 1)
        c[s] = 1.0
        q = xs**s
        for _ in range(2):
            for cj, vj in zip(polys, vals):
                proj = np.dot(wt, q * vj)
                q = q - proj * vj
                c = c - proj * np.pad(cj, (0, s + 1 - cj.size))
        nrm = math.sqrt(np.dot(wt, q * q))
        if nrm < 1e-12:
            raise ArithmeticError(f"Gram-Schmidt breakdown at degree {s}")
        polys.append(c / nrm)
        vals.append(q / nrm)
    top = polys[-1]
    scale = np.dot(ws, xs ** (m_order + 1) * np.polynomial.polynomial.polyval(xs, top) * cutoff_weight(xs))
    kappa = 2.0 ** (m_order + 2) / scale

    def phi(x):
        u = 2.0 * np.asarray(x, dtype=float)
        return kappa * np.polynomial.polynomial.polyval(u, top) * cutoff_weight(u)

    nodes = np.linspace(-1.0, 1.0, n_nodes)
    out = _ExactSampled(nodes, phi(nodes), "cubic", (-1.0, 1.0), exact=phi)
    object.__setattr__(out, "orthonormal", tuple(polys))
    return out


@dataclass(frozen=True)
class DecayTable:
    t: np.ndarray
    sup: np.ndarray
    slope: float
    fit_range: tuple
    mass: float


def counterexample_decay(m_order: int, f, tgrid, phi=None, fit_range=(8.0, 256.0), x_points: int = 4001) -> DecayTable:
    """sup_x |(f * phi_t)(x)| for t in tgrid, with phi in S^m.

    (f * phi_t)(x) = int f(y) phi((x - y)/t) dy / t.  The x-grid covers the
    whole support |x| <= t + 1 of the convolution.  The slope is the least
    squares fit of log sup against log t over ``fit_range``.
    """
    tgrid = np.asarray(tgrid, dtype=float)
    sel = (tgrid >= fit_range[0]) & (tgrid <= fit_range[1])
    if sel.sum() < 2 or tgrid[sel].max() / tgrid[sel].min() < 10 - 1e-9:
        raise ValueError("t-grid must span at least one decade inside the fit range")
    if phi is None:
        phi = schwartz_moment_bump(m_order)
    lo, hi = f.support
    if lo < -1 - 1e-12 or hi > 1 + 1e-12:
        raise ValueError("f must be supported in [-1, 1]")
    g, w = gauss_legendre(64)
    edges = np.linspace(lo, hi, 9)
    ys = np.concatenate([0.5 * (a + b) + 0.5 * (b - a) * g for a, b in zip(edges[:-1], edges[1:])])
    wy = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    fy = np.asarray(f(ys), dtype=float)
    if np.any(fy < -1e-15) or np.max(fy) > 1 + 1e-12:
        raise ValueError("f must satisfy 0 <= f <= 1")
    mass = float(np.dot(wy, fy))
    sups = np.empty(tgrid.size)
    for i, t in enumerate(tgrid):
        xs = np.linspace(-(t + hi), t - lo, x_points)
        conv = (phi((xs[:, None] - ys[None, :]) / t) @ (fy * wy)) / t
        sups[i] = np.max(np.abs(conv))
    slope = float(np.polyfit(np.log(tgrid[sel]), np.log(sups[sel]), 1)[0])
    return DecayTable(tgrid, sups, slope, tuple(fit_range), mass)


def lipschitz_bump_maximal(f, phi, x, aperture: float = 0.0, tgrid=None, support=None):
    """Classical maximal function of f * phi_t, radial (aperture 0) or in the cone |u - x| < a t."""
    pg = np.linspace(-1, 1, 4001)
    mass = np.trapezoid(phi(pg), pg)
    if abs(mass) < 1e-12:
        raise HypothesisError("the bump must have nonzero integral")
    return classical_dilation_maximal(f, phi, x, aperture, tgrid, support)


def classical_dilation_maximal(f, phi, x, aperture: float = 0.0, tgrid=None, support=None):
    """sup_t |f * phi_t| for any phi supported in [-1, 1], with no condition on its integral."""
    if support is None:
        support = f.support
    lo, hi = support
    g, w = gauss_legendre(32)
    edges = np.linspace(lo, hi, 33)
    ys = np.concatenate([0.5 * (a + b) + 0.5 * (b - a) * g for a, b in zip(edges[:-1], edges[1:])])
    wy = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    fy = np.asarray(f(ys), dtype=float) * wy
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if tgrid is None:
        # 32 nodes across the narrowest dilate keeps the quadrature honest
        tgrid = radius_sweep((hi - lo) / 32, 1e3 * (hi - lo + float(np.max(np.abs(x)))))
    offsets = np.linspace(-1, 1, 17) if aperture > 0 else np.zeros(1)
    out = np.zeros(x.size)
    for t in tgrid:
        u = x[:, None] + aperture * t * offsets[None, :]
        conv = (phi((u[..., None] - ys) / t) @ fy) / t
        out = np.maximum(out, np.max(np.abs(conv), axis=1))
    return out
