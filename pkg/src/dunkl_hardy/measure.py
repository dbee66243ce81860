"""Homogeneous-space geometry on the line.

A ``WeightedMeasure`` is a density with a strictly increasing antiderivative
F.  Then mu(x, y) = F(x) - F(y), d(x, y) = |mu(x, y)| and the ball B(x0, r0)
is the Euclidean interval (F^-1(F(x0) - r0), F^-1(F(x0) + r0)).  Its measure
is 2 r0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

__all__ = [
    "WeightedMeasure",
    "BallInterval",
    "GeometryError",
    "mu_signed",
    "ball_interval",
    "radius_sweep",
    "hl_maximal",
]

SWEEP_RATIO = 2.0 ** 0.125


class GeometryError(RuntimeError):
    """Root solving for a ball endpoint failed; carries the bracket."""

    def __init__(self, message, bracket):
        super().__init__(f"{message} (bracket {bracket})")
        self.bracket = bracket


@dataclass(frozen=True)
class WeightedMeasure:
    density: Callable
    antiderivative: Callable
    kind: Literal["dunkl", "lebesgue", "custom"]
    lam: float = 0.0
    closed_inverse: Callable | None = None

    @classmethod
    def dunkl(cls, lam: float) -> "WeightedMeasure":
        """d mu = (2 lam + 1) |x|^(2 lam) dx with F(x) = sgn(x) |x|^(2 lam + 1)."""
        lam = float(lam)
        if lam < 0:
            raise ValueError("lambda must be >= 0")
        h = 2 * lam + 1

        def density(x):
            return h * np.abs(np.asarray(x, dtype=float)) ** (2 * lam)

        def anti(x):
            x = np.asarray(x, dtype=float)
            return np.sign(x) * np.abs(x) ** h

        def inv(v):
            v = np.asarray(v, dtype=float)
            return np.sign(v) * np.abs(v) ** (1.0 / h)

        return cls(density, anti, "dunkl", lam, inv)

    @classmethod
    def lebesgue(cls) -> "WeightedMeasure":
        return cls(
            lambda x: np.ones_like(np.asarray(x, dtype=float)),
            lambda x: np.asarray(x, dtype=float) * 1.0,
            "lebesgue",
            0.0,
            lambda v: np.asarray(v, dtype=float) * 1.0,
        )

    @classmethod
    def custom(cls, density: Callable, extent: float = 1e3, n: int = 20001) -> "WeightedMeasure":
        """Numeric antiderivative by cumulative quadrature on a cached grid.

        Outside [-extent, extent] the antiderivative is continued linearly with
        the boundary density, which keeps it bijective onto the line.
        """
        grid = np.sinh(np.linspace(-np.arcsinh(extent), np.arcsinh(extent), n))
        dens = np.asarray(density(grid), dtype=float)
        if np.any(dens < 0):
            raise ValueError("density must be nonnegative")
        # Gauss-Legendre per cell: positive weights keep the increments >= 0
        g, w = np.polynomial.legendre.leggauss(4)
        h = np.diff(grid)
        nodes = grid[:-1, None] + 0.5 * h[:, None] * (g[None, :] + 1)
        cells = 0.5 * h * (np.asarray(density(nodes), dtype=float) @ w)
        # accumulate outward from the origin so small increments there survive
        c0 = int(np.argmin(np.abs(grid)))
        cum = np.zeros_like(grid)
        cum[c0 + 1 :] = np.cumsum(cells[c0:])
        cum[:c0] = -np.cumsum(cells[:c0][::-1])[::-1]
        if np.any(np.diff(cum) <= 0):
            raise ValueError("antiderivative is not strictly increasing on the grid")
        spline = PchipInterpolator(grid, cum)
        lo_s, hi_s = max(dens[0], 1e-12), max(dens[-1], 1e-12)

        def anti(x):
            x = np.asarray(x, dtype=float)
            out = spline(np.clip(x, grid[0], grid[-1]))
            out = np.where(x < grid[0], cum[0] + lo_s * (x - grid[0]), out)
            return np.where(x > grid[-1], cum[-1] + hi_s * (x - grid[-1]), out)

        return cls(density, anti, "custom")

    @property
    def homogeneity(self) -> float:
        return 2 * self.lam + 1 if self.kind != "custom" else math.nan

    def mu(self, x, y):
        return self.antiderivative(x) - self.antiderivative(y)

    def distance(self, x, y):
        return np.abs(self.mu(x, y))

    def inverse(self, v):
        """F^-1, closed form when available, else a bracketed root solve."""
        if self.closed_inverse is not None:
            return self.closed_inverse(v)
        v = np.asarray(v, dtype=float)
        out = np.array([self._solve(float(vi)) for vi in v.ravel()]).reshape(v.shape)
        return out if out.ndim else float(out)

    def _solve(self, target: float) -> float:
        lo, hi = -1.0, 1.0
        for _ in range(200):
            if float(self.antiderivative(lo)) <= target <= float(self.antiderivative(hi)):
                break
            lo, hi = 2 * lo, 2 * hi
        else:
            raise GeometryError("could not bracket the antiderivative", (lo, hi))
        try:
            return brentq(lambda u: float(self.antiderivative(u)) - target, lo, hi, xtol=1e-15, rtol=1e-12)
        except (ValueError, RuntimeError) as exc:
            raise GeometryError(f"root solve failed: {exc}", (lo, hi)) from exc


@dataclass(frozen=True)
class BallInterval:
    center: float
    radius: float
    left: float  # delta_2, Euclidean half-width to the left
    right: float  # delta_1

    @property
    def lo(self) -> float:
        return self.center - self.left

    @property
    def hi(self) -> float:
        return self.center + self.right


def _finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite input")


def mu_signed(m: WeightedMeasure, x, y):
    """mu(x, y) = F(x) - F(y)."""
    _finite(x, y)
    return m.mu(x, y)


def ball_interval(m: WeightedMeasure, x0: float, r0: float) -> BallInterval:
    """Euclidean endpoints of B(x0, r0) = {t : |F(t) - F(x0)| < r0}."""
    _finite(x0, r0)
    if not r0 > 0:
        raise ValueError("ball radius must be positive")
    v0 = float(m.antiderivative(x0))
    lo = float(m.inverse(v0 - r0))
    hi = float(m.inverse(v0 + r0))
    if v0 - r0 == 0.0:
        lo = 0.0
    return BallInterval(float(x0), float(r0), float(x0) - lo, hi - float(x0))


def radius_sweep(r_min: float, r_max: float, ratio: float = SWEEP_RATIO) -> np.ndarray:
    if not 0 < r_min <= r_max:
        raise ValueError("empty radius sweep")
    n = int(math.floor(math.log(r_max / r_min) / math.log(ratio) + 1e-9)) + 1
    return r_min * ratio ** np.arange(n)


def hl_maximal(m: WeightedMeasure, f, grid, radii=None, n_cells: int = 8192):
    """Hardy-Littlewood maximal function sup_r mu(B)^-1 int_B |f| dmu on ``grid``.

    ``f`` is a SampledFunction (or any callable with a ``support``).  The
    cumulative integral of |f| dmu is tabulated in the measure variable, so
    every ball average is a difference of two interpolated values.
    Returns a SampledFunction on the grid.
    """
    from .operators import SampledFunction

    grid = np.asarray(grid, dtype=float)
    lo, hi = f.support
    va, vb = float(m.antiderivative(lo)), float(m.antiderivative(hi))
    v = np.linspace(va, vb, n_cells + 1)
    # integrate |f(F^-1(v))| dv cell by cell with 8-point Gauss
    g, w = np.polynomial.legendre.leggauss(8)
    h = (vb - va) / n_cells
    nodes = v[:-1, None] + 0.5 * h * (g[None, :] + 1)
    cell = 0.5 * h * (np.abs(f(m.inverse(nodes))) @ w)
    cum = np.concatenate([[0.0], np.cumsum(cell)])

    def mass(a, b):
        a = np.clip(a, va, vb)
        b = np.clip(b, va, vb)
        return np.interp(b, v, cum) - np.interp(a, v, cum)

    vx = m.antiderivative(grid)
    if radii is None:
        span = max(vb - va, np.max(np.abs(vx - va)), np.max(np.abs(vx - vb)))
        radii = radius_sweep(max(h, 1e-12), 2 * span + h)
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0:
        raise ValueError("empty radius sweep")
    avg = mass(vx[:, None] - radii[None, :], vx[:, None] + radii[None, :]) / (2 * radii[None, :])
    vals = np.max(avg, axis=1)
    return SampledFunction(grid, vals, "linear")
