"""Weighted quadrature for the Dunkl setting.

Three layers:

* ``integrate``: global adaptive Gauss-Legendre with tanh-sinh panels at
  endpoints that may carry an integrable singularity.
* ``endpoint_rule`` / ``gegenbauer_rule``: fixed, vectorizable rules for
  integrands of the form u^a g(u) where g may have a near-singularity at
  distance u0 from the endpoint.  Dyadic panels [2^-k-1, 2^-k] resolve every
  scale down to 2^-levels and a Gauss-Jacobi panel takes the rest.
* ``integrate_weighted_line``: c_lambda * int f(x) |x|^(2 lam) dx over the line.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .special import LambdaParam

__all__ = [
    "QuadResult",
    "QuadratureWarning",
    "gauss_legendre",
    "integrate",
    "endpoint_rule",
    "gegenbauer_rule",
    "gegenbauer_integral",
    "integrate_weighted_line",
    "levels_for",
]

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12


class QuadratureWarning(UserWarning):
    pass


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool = True

    def __float__(self):
        return float(self.value)


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


_TS_TMAX = 4.0


@lru_cache(maxsize=None)
def _tanh_sinh(level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # nodes as distances to the left (dl) and right (dr) end of [-1, 1]
    h = 2.0**-level
    t = np.arange(-_TS_TMAX, _TS_TMAX + h / 2, h)
    s = 0.5 * math.pi * np.sinh(t)
    w = h * 0.5 * math.pi * np.cosh(t) / np.cosh(s) ** 2
    e = np.exp(-2 * np.abs(s))
    near = 2 * e / (1 + e)  # 1 - |tanh(s)| without cancellation
    dl = np.where(t < 0, near, 2 - near)
    dr = np.where(t < 0, 2 - near, near)
    keep = (dl > 0) & (dr > 0)
    return dl[keep], dr[keep], w[keep]


def _gl_panel(ev, lo, hi, n):
    x, w = gauss_legendre(n)
    half = 0.5 * (hi - lo)
    d = half * (x + 1)
    return half * np.dot(w, ev(lo + d, lo, d, hi, half * (1 - x)))


def _ts_panel(ev, lo, hi, tol):
    # tanh-sinh on [lo, hi]; distances to the panel ends come from the rule
    half = 0.5 * (hi - lo)
    prev = None
    evals = 0
    for level in range(3, 13):
        dl, dr, w = _tanh_sinh(level)
        x = np.where(dl <= dr, lo + half * dl, hi - half * dr)
        val = half * np.dot(w, ev(x, lo, half * dl, hi, half * dr))
        evals += len(x)
        if prev is not None and abs(val - prev) <= max(tol * abs(val), 1e-300):
            return val, abs(val - prev), evals
        prev = val
    return val, abs(val - prev), evals


def _rounding_loss(f, a, b, lo, hi):
    # tanh-sinh nodes closer to a or b than the float spacing are dropped; the
    # mass between the endpoint and the innermost kept node is of order |f| d there
    dl, dr, _ = _tanh_sinh(12)
    half = 0.5 * (hi - lo)
    loss = 0.0
    if lo == a:
        x = lo + half * dl[dl <= dr]
        x = x[x > a]
        if x.size:
            xk = x.min()
            loss += abs(float(f(np.array([xk]))[0])) * (xk - a)
    if hi == b:
        x = hi - half * dr[dr < dl]
        x = x[x < b]
        if x.size:
            xk = x.max()
            loss += abs(float(f(np.array([xk]))[0])) * (b - xk)
    return loss


def integrate(
    f: Callable[..., np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_RTOL,
    abs_tol: float = DEFAULT_ATOL,
    singular: tuple[bool, bool] = (True, True),
    breakpoints: Sequence[float] = (),
    max_panels: int = 4000,
    with_distances: bool = False,
) -> QuadResult:
    """Adaptive quadrature of a vectorized ``f`` over the finite interval (a, b).

    Panels touching an endpoint flagged in ``singular`` use tanh-sinh (level
    cap 12); every other panel uses 21-point Gauss-Legendre with a 10-point
    companion as error estimate.  The panel with the largest estimate is
    bisected until the total estimate meets max(tol*|value|, abs_tol).

    With ``with_distances`` the integrand is called as f(x, x - a, b - x), the
    distances being computed without cancellation, which lets endpoint factors
    such as (1 - x^2)^-1/2 be evaluated to full relative accuracy.  Otherwise
    nodes that round onto a singular endpoint are dropped.
    """
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise ValueError(f"integrate needs finite a < b, got ({a}, {b})")

    def ev(x, lo, dlo, hi, dhi):
        if with_distances:
            dl = dlo if lo == a else (lo - a) + dlo
            dr = dhi if hi == b else (b - hi) + dhi
            return np.asarray(f(x, dl, dr), dtype=float)
        inside = (x > a) & (x < b)
        out = np.zeros_like(x)
        out[inside] = f(x[inside])
        return out

    evals = 0
    floor = []  # panels whose error is the endpoint rounding loss; bisection cannot help

    def panel(lo, hi):
        nonlocal evals
        if (lo == a and singular[0]) or (hi == b and singular[1]):
            v, e, n = _ts_panel(ev, lo, hi, tol * 0.1)
            evals += n
            if not with_distances:
                loss = _rounding_loss(f, a, b, lo, hi)
                if loss > e:
                    floor.append((lo, hi))
                e += loss
        else:
            v = _gl_panel(ev, lo, hi, 21)
            e = abs(v - _gl_panel(ev, lo, hi, 10))
            evals += 31
        if not (math.isfinite(v) and math.isfinite(e)):
            raise FloatingPointError(f"non-finite integrand on panel ({lo}, {hi})")
        return v, e

    cuts = sorted({a, b, *(c for c in breakpoints if a < c < b)})
    heap = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        v, e = panel(lo, hi)
        heapq.heappush(heap, (-e, lo, hi, v))
    stuck = []  # panels at floating-point resolution keep their estimates
    converged = True
    while True:
        total = math.fsum([item[3] for item in heap] + [v for _, v in stuck])
        err = math.fsum([-item[0] for item in heap] + [e for e, _ in stuck])
        if err <= max(tol * abs(total), abs_tol):
            break
        if not heap or len(heap) + len(stuck) >= max_panels:
            converged = False
            break
        e, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi or (lo, hi) in floor:
            stuck.append((-e, v))
            continue
        for plo, phi in ((lo, mid), (mid, hi)):
            pv, pe = panel(plo, phi)
            heapq.heappush(heap, (-pe, plo, phi, pv))
    if not converged:
        warnings.warn(f"integrate: estimate {err:.3g} above tolerance on ({a}, {b})", QuadratureWarning, stacklevel=2)
    return QuadResult(total, err, evals, converged)


@lru_cache(maxsize=512)
def endpoint_rule(a: float, levels: int, order: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Nodes u and weights w with sum w g(u) ~ int_0^1 u^a g(u) du.

    Accurate when g is smooth on scales larger than its distance to the
    nearest singularity and that distance exceeds ~2^-levels.
    """
    if a <= -1:
        raise ValueError("endpoint exponent must exceed -1")
    x, w = gauss_legendre(order)
    k = np.arange(levels)
    lo = 2.0 ** -(k + 1.0)
    width = lo  # panel [2^-k-1, 2^-k] has width 2^-k-1
    u = (lo[:, None] + 0.5 * width[:, None] * (x[None, :] + 1)).ravel()
    wt = (0.5 * width[:, None] * w[None, :]).ravel() * u**a
    eps = 2.0**-levels
    xj, wj = roots_jacobi(order, 0.0, a)
    uj = 0.5 * eps * (xj + 1)
    wjs = wj * (0.5 * eps) ** (a + 1)
    nodes = np.concatenate([u, uj])
    weights = np.concatenate([wt, wjs])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def levels_for(u0_min: float, floor: int = 4, cap: int = 200) -> int:
    """Dyadic depth that resolves a near-singularity at distance u0_min."""
    if not u0_min > 0:
        return cap
    if not math.isfinite(u0_min):
        return floor
    need = math.ceil(math.log2(16.0 / u0_min)) if u0_min < 16 else floor
    # quantize so the rule cache is shared across nearby batches
    need = 4 * math.ceil(need / 4)
    return int(min(max(need, floor), cap))


@lru_cache(maxsize=512)
def gegenbauer_rule(lam: float, levels: int, order: int = 10):
    """Rule for c'_lam * int_{-1}^{1} G(s) (1+s)(1-s^2)^(lam-1) ds.

    Returns (u_plus, w_plus, u_minus, w_minus); the integral is
    sum(w_plus * G(1 - u_plus)) + sum(w_minus * G(u_minus - 1)), so callers
    can evaluate G directly in the endpoint distance and avoid cancellation.
    """
    if lam <= 0:
        raise ValueError("gegenbauer_rule needs lambda > 0")
    cp = LambdaParam(lam).c_prime
    # near s = 1 the weight is u^(lam-1) (2-u)^lam, near s = -1 it is u^lam (2-u)^(lam-1)
    up, wp = endpoint_rule(lam - 1.0, levels, order)
    um, wm = endpoint_rule(lam, levels, order)
    return up, cp * wp * (2 - up) ** lam, um, cp * wm * (2 - um) ** (lam - 1.0)


def gegenbauer_integral(g: Callable[[np.ndarray], np.ndarray], lp: LambdaParam, levels: int = 48) -> float:
    """c'_lam * int_{-1}^{1} g(s) (1+s)(1-s^2)^(lam-1) ds for bounded g."""
    if lp.is_classical:
        # the normalized weight tends to the point mass at s = 1
        return float(np.asarray(g(np.array([1.0])))[0])
    up, wp, um, wm = gegenbauer_rule(lp.lam, levels)
    return float(np.dot(wp, g(1.0 - up)) + np.dot(wm, g(um - 1.0)))


def _to_unit(x):
    # inverse of x = u / (1 - u^2) on [0, inf)
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, 2 * x / (1 + np.sqrt(1 + 4 * x * x)), 0.0)


def integrate_weighted_line(
    f: Callable[[np.ndarray], np.ndarray],
    lp: LambdaParam,
    tol: float = DEFAULT_RTOL,
    abs_tol: float = DEFAULT_ATOL,
    breakpoints: Sequence[float] = (),
    support: tuple[float, float] | None = None,
) -> QuadResult:
    """c_lam * int_R f(x) |x|^(2 lam) dx, split at 0.

    Infinite half-lines are compactified with x = u/(1-u^2).  A finite
    ``support`` skips the compactification.  ``breakpoints`` mark points where
    f is peaked or kinked.
    """
    two_lam = 2 * lp.lam
    value = 0.0
    err = 0.0
    evals = 0
    ok = True
    for sign in (1.0, -1.0):
        if support is not None:
            reach = support[1] if sign > 0 else -support[0]
            if reach <= 0:
                continue
            bps = [sign * c for c in breakpoints if 0 < sign * c < reach]

            def g(x, sign=sign):
                return f(sign * x) * x**two_lam

            r = integrate(g, 0.0, reach, tol, abs_tol, singular=(True, False), breakpoints=bps)
        else:
            bps = [float(_to_unit(sign * c)) for c in breakpoints if sign * c > 0]

            def g(u, sign=sign):
                x = u / (1 - u * u)
                jac = (1 + u * u) / (1 - u * u) ** 2
                return f(sign * x) * x**two_lam * jac

            r = integrate(g, 0.0, 1.0, tol, abs_tol, singular=(True, True), breakpoints=bps)
        value += r.value
        err += r.error_estimate
        evals += r.evaluations
        ok = ok and r.converged
    c = lp.c_lambda
    return QuadResult(c * value, c * err, evals, ok)
