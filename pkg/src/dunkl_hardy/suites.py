"""Verification suites: each returns a VerificationReport of pass/fail rows."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import kernels as kz
from .maximal import (
    HarmonicField,
    HypothesisError,
    _cone_sup,
    _measure_halfwidth_mask,
    bump_maximals,
    classical_dilation_maximal,
    counterexample_decay,
    default_family,
    grand_maximal,
    lipschitz_bump_maximal,
    lp_quasinorm,
    nontangential_maximal,
    make_atom,
    schwartz_moment_bump,
)
from .measure import WeightedMeasure, ball_interval, radius_sweep
from .operators import DunklSpectrum, dunkl_transform
from .quadrature import integrate_weighted_line
from .special import LambdaParam

__all__ = [
    "SuiteConfig",
    "CheckRecord",
    "VerificationReport",
    "run_kernel_suite",
    "run_equivalence_suite",
    "run_cr_suite",
    "run_counterexample_suite",
    "run_atom_suite",
    "kernel_class_report",
    "equivalence_test_set",
    "THREADS_ENV",
]

THREADS_ENV = "DUNKL_THREADS"

# short property labels carried by every report row
ANCHORS = {
    "symmetry": "K: symmetric in (x, t)",
    "fixed_y_symmetry": "P: symmetric in (x, t) at fixed height",
    "scale_invariance": "K: invariant under x -> s x, r -> |s|^(2lam+1) r",
    "diagonal_min": "K: on-diagonal lower bound",
    "origin_value": "K: value a_lam at x = t = 0",
    "decay_exponent": "K: off-diagonal decay exponent",
    "holder_exponent": "K: Hoelder exponent in the measure variable",
    "holder_bound": "K: Hoelder constant on admissible pairs",
    "derived_bound": "K: two-point bound with alpha < gamma",
    "jump_detected": "class check rejects an injected jump",
    "triangular_class": "triangular kernel is compact class, gamma = 1",
    "poisson_mass": "P: unit mass",
    "poisson_positive": "P: positivity",
    "semigroup": "P: semigroup in y",
    "classical_limit": "P: lam = 0 is the classical kernel",
    "cr_order_u": "Cauchy-Riemann, D_x u = d_y v",
    "cr_order_v": "Cauchy-Riemann, d_y u = -D_x v",
    "harmonic_order": "Delta_lam (P f) = 0",
    "plancherel": "transform is an isometry",
    "gaussian_fixed_point": "Gaussian is a fixed point of the transform",
    "atom_support": "atom support in ball",
    "atom_size": "atom size bound",
    "atom_moments": "atom moments vanish",
    "atom_grand_uniform": "uniform bound of int (grand maximal)^p over atoms",
    "ratio_span": "maximal norms are equivalent (bounded ratio span)",
    "dilation_drift": "ratios are dilation stable",
    "cone_comparison": "Euclidean and measure cones give comparable norms",
    "l2_bound": "Poisson maximal bounded on L^2",
    "class_condition": "kernel class condition holds",
    "kernel_grand_sandwich": "compact-class kernel maximal <= C grand maximal",
    "lipschitz_bump_ratio": "smooth and triangle bump maximals comparable",
    "counterexample_slope": "decay rate of f * phi_t for phi in S^m",
    "counterexample_mass": "the witness f has nonzero integral",
    "counterexample_norm": "quasi-norm of the radial bump maximal",
}


@dataclass(frozen=True)
class SuiteConfig:
    lambdas: tuple = (0.25, 0.5, 1.0, 2.0)
    ps: tuple = (0.9, 1.0)
    profile: str = "strict"
    seed: int = 20240601
    out: str | None = None
    fmt: str = "csv"
    m_orders: tuple = (1, 2)
    span_bound: float = 20.0
    drift_bound: float = 0.10

    def __post_init__(self):
        if self.profile not in ("fast", "strict"):
            raise ValueError(f"unknown profile {self.profile!r}")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"unknown format {self.fmt!r}")
        if any(lam < 0 for lam in self.lambdas):
            raise ValueError("lambda must be >= 0")
        if any(not 0 < p <= 2 for p in self.ps):
            raise ValueError("p must lie in (0, 2]")

    @property
    def fast(self) -> bool:
        return self.profile == "fast"

    def rng(self, *key) -> np.random.Generator:
        """Independent stream for a named check, split from the master seed."""
        words = [abs(hash_str(str(k))) for k in key]
        return np.random.default_rng(np.random.SeedSequence([self.seed, *words]))


def hash_str(s: str) -> int:
    # stable across processes, unlike hash()
    h = 1469598103934665603
    for ch in s.encode():
        h = ((h ^ ch) * 1099511628211) % (1 << 63)
    return h


@dataclass
class CheckRecord:
    suite: str
    check: str
    lam: float
    p: float
    value: float
    lower: float
    upper: float
    status: str  # pass | fail | info
    witness: str = ""
    severity: str = "bracket"  # identity | bracket | info

    @property
    def anchor(self) -> str:
        return ANCHORS.get(self.check.split("[")[0], "")


@dataclass
class VerificationReport:
    suite: str
    config: SuiteConfig
    records: list = field(default_factory=list)
    runtime: float = 0.0

    def add(self, check, lam, p, value, lower, upper, witness="", severity="bracket", status=None):
        value = float(value)
        if status is None:
            ok = math.isfinite(value) and lower <= value <= upper
            status = "pass" if ok else "fail"
        self.records.append(CheckRecord(self.suite, check, float(lam), float(p), value, float(lower),
                                        float(upper), status, str(witness), severity))
        return status == "pass"

    def info(self, check, lam, p, value, witness=""):
        self.add(check, lam, p, value, -math.inf, math.inf, witness, "info", "info")

    def extend(self, other: "VerificationReport"):
        self.records.extend(other.records)
        self.runtime += other.runtime

    @property
    def exit_code(self) -> int:
        failed = [r for r in self.records if r.status == "fail"]
        if any(r.severity == "identity" for r in failed):
            return 1
        return 2 if failed else 0

    def failures(self):
        return [r for r in self.records if r.status == "fail"]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    n = _threads()
    if n == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _timed(fn):
    def wrapper(cfg: SuiteConfig) -> VerificationReport:
        t0 = time.perf_counter()
        rep = fn(cfg)
        rep.runtime = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b) / np.maximum(np.abs(b), 1e-300)


# ---------------------------------------------------------------------------
# kernel suite


def _kernel_rows(rep: VerificationReport, lam: float, cfg: SuiteConfig):
    lp = LambdaParam(lam)
    rng = cfg.rng("kernel", lam)
    n = 2000 if cfg.fast else 10_000
    r = 10.0 ** rng.uniform(-3, 3, n)
    x = rng.choice([-1.0, 1.0], n) * 2.0 ** rng.uniform(-6, 6, n)
    t = rng.choice([-1.0, 1.0], n) * 2.0 ** rng.uniform(-6, 6, n)
    k_xt = kz.scale_kernel_K(lp, r, x, t)
    k_tx = kz.scale_kernel_K(lp, r, t, x)
    err = _rel(k_tx, k_xt)
    j = int(np.argmax(err))
    rep.add("symmetry", lam, math.nan, err[j], 0.0, 1e-8, f"r={r[j]:.6g} x={x[j]:.6g} t={t[j]:.6g}", "identity")

    y = kz.scale_y(lp, r, x)
    p_xt = kz.poisson_kernel(lp, x, y, t)
    p_tx = kz.poisson_kernel(lp, t, y, x)
    err = _rel(p_tx, p_xt)
    j = int(np.argmax(err))
    rep.add("fixed_y_symmetry", lam, math.nan, err[j], 0.0, 1e-8, f"y={y[j]:.6g} x={x[j]:.6g} t={t[j]:.6g}", "identity")

    s = rng.choice([-1.0, 1.0], n) * 2.0 ** rng.uniform(-4, 4, n)
    k_s = kz.scale_kernel_K(lp, np.abs(s) ** lp.homogeneity * r, s * x, s * t)
    err = _rel(k_s, k_xt)
    j = int(np.argmax(err))
    rep.add("scale_invariance", lam, math.nan, err[j], 0.0, 1e-8, f"s={s[j]:.6g} r={r[j]:.6g} x={x[j]:.6g} t={t[j]:.6g}", "identity")

    plan = kz.SamplingPlan(n_pairs=1000 if cfg.fast else 2000, seed=int(rng.integers(2**31)))
    report = kz.check_kernel_class(kz.poisson_scale_kernel(lp), plan)
    dm = report.values["diagonal_min"] / lp.a_lambda
    rep.add("diagonal_min", lam, math.nan, dm, 0.05, math.inf, report.witnesses["diagonal"])
    k00 = float(kz.scale_kernel_K(lp, np.array([1e-3, 1.0, 1e3]), 0.0, 0.0).max())
    rep.add("origin_value", lam, math.nan, abs(k00 / lp.a_lambda - 1), 0.0, 1e-8, "r in {1e-3, 1, 1e3}", "identity")
    target = -(2 * lam + 2) / (2 * lam + 1)
    rep.add("decay_exponent", lam, math.nan, report.decay_exponent, target - 0.1, target + 0.1, "t -> K(1, 1, t)")
    g = lp.gamma_exponent
    rep.add("holder_exponent", lam, math.nan, report.holder_exponent, g - 0.15, g + 0.15, report.witnesses["holder"])
    rep.add("holder_bound", lam, math.nan, report.values["holder_bound"], 0.0, math.inf, report.witnesses["holder"])
    rep.add("derived_bound", lam, math.nan, report.values["derived_bound"], 0.0, math.inf,
            f"alpha={report.metadata['alpha']:.6g}")

    jump = kz.check_kernel_class(kz.injected_jump_kernel(kz.poisson_scale_kernel(lp)), plan)
    rep.add("jump_detected", lam, math.nan, float(not jump.status["holder"]), 1.0, 1.0, jump.witnesses["holder"], "identity")
    tri = kz.check_kernel_class(kz.triangular_kernel(WeightedMeasure.dunkl(lam)), plan)
    rep.add("triangular_class", lam, math.nan, tri.holder_exponent, 0.85, 1.15, f"passed={tri.passed}")

    _poisson_rows(rep, lp, rng, cfg)


def _poisson_rows(rep, lp, rng, cfg):
    lam = lp.lam
    worst = 0.0
    wit = ""
    for x0 in (0.0, 0.7, -2.5):
        for y0 in (0.05, 1.0, 6.0):
            val = integrate_weighted_line(lambda t: kz.poisson_kernel(lp, x0, y0, t), lp, tol=1e-11, abs_tol=1e-14,
                                          breakpoints=[x0, -x0]).value
            if abs(val - 1) >= worst:
                worst, wit = abs(val - 1), f"x={x0} y={y0}"
    rep.add("poisson_mass", lam, math.nan, worst, 0.0, 1e-7, wit, "identity")

    n = 2000 if cfg.fast else 10_000
    x = rng.normal(scale=5, size=n)
    t = rng.normal(scale=5, size=n)
    y = 10.0 ** rng.uniform(-3, 2, n)
    vals = kz.poisson_kernel(lp, x, y, t)
    j = int(np.argmin(vals))
    rep.add("poisson_positive", lam, math.nan, vals[j], 1e-300, math.inf, f"x={x[j]:.6g} y={y[j]:.6g} t={t[j]:.6g}", "identity")

    y1, y2 = 0.3, 0.5
    worst, wit = 0.0, ""
    for x0 in (0.0, 0.4, -1.3, 3.0):
        conv = integrate_weighted_line(lambda t: kz.poisson_kernel(lp, 0.0, y1, t) * kz.poisson_kernel(lp, x0, y2, t),
                                       lp, tol=1e-11, abs_tol=1e-14, breakpoints=[x0, -x0]).value
        ref = float(kz.poisson_kernel(lp, x0, y1 + y2, 0.0))
        e = abs(conv - ref) / abs(ref)
        if e >= worst:
            worst, wit = e, f"x={x0}"
    rep.add("semigroup", lam, math.nan, worst, 0.0, 1e-6, wit, "identity")


def _classical_rows(rep, cfg):
    lp = LambdaParam(0.0)
    rng = cfg.rng("classical")
    x, t = rng.normal(scale=3, size=(2, 1000))
    y = 10.0 ** rng.uniform(-3, 2, 1000)
    ours = lp.c_lambda * kz.poisson_kernel(lp, x, y, t)
    ref = y / (math.pi * (y * y + (x - t) ** 2))
    rep.add("classical_limit", 0.0, math.nan, float(np.max(_rel(ours, ref))), 0.0, 1e-10, "c_0 P vs y / (pi (y^2 + x^2))", "identity")
    near = LambdaParam(1e-6)
    approach = near.c_lambda * kz.poisson_kernel(near, x[:50], y[:50], t[:50])
    rep.info("classical_limit[lam->0]", 1e-6, math.nan, float(np.max(_rel(approach, ref[:50]))))


def kernel_class_report(k: kz.KernelHandle, cfg: SuiteConfig, lam: float = math.nan) -> VerificationReport:
    """Class conditions of an arbitrary kernel as identity rows, so a violation exits with 1."""
    rep = VerificationReport("kernel", cfg)
    plan = kz.SamplingPlan(n_pairs=1000 if cfg.fast else 2000, seed=int(cfg.rng("class", k.name).integers(2**31)))
    report = kz.check_kernel_class(k, plan)
    for cond, ok in report.status.items():
        wit = report.witnesses.get(cond, "")
        rep.add(f"class_condition[{cond}]", lam, math.nan, float(bool(ok)), 1.0, 1.0, wit, "identity")
    return rep


@_timed
def run_kernel_suite(cfg: SuiteConfig) -> VerificationReport:
    """Kernel identities, class conditions and Poisson structure per lambda."""
    rep = VerificationReport("kernel", cfg)
    for lam in cfg.lambdas:
        if lam == 0:
            _classical_rows(rep, cfg)
        else:
            _kernel_rows(rep, lam, cfg)
    return rep


# ---------------------------------------------------------------------------
# Cauchy-Riemann, harmonicity, Plancherel


def _fd_order(hs, res):
    res = np.asarray(res)
    ok = res > 0
    if ok.sum() < 2:
        return math.inf
    return float(np.polyfit(np.log(np.asarray(hs)[ok]), np.log(res[ok]), 1)[0])


@_timed
def run_cr_suite(cfg: SuiteConfig) -> VerificationReport:
    """Finite-difference residual orders of the lambda-CR system and Delta_lam(Pf)."""
    rep = VerificationReport("cr", cfg)
    hs = np.array([1e-2, 5e-3, 2.5e-3])
    xs = np.array([-1.2, -0.5, 0.4, 0.9, 1.6])
    ys = np.array([0.2, 0.4, 0.7, 1.0, 1.5])

    def f(x):
        x = np.asarray(x, dtype=float)
        return (1 + x) * np.exp(-0.5 * x * x)

    for lam in cfg.lambdas:
        lp = LambdaParam(lam)
        spec = DunklSpectrum(lp, f, (-9.0, 9.0), xi_max=14.0, u_max=2.0)
        res_u, res_v, res_h = [], [], []
        for h in hs:
            yy = np.concatenate([ys, ys + h, ys - h])
            sym = np.exp(-np.outer(yy, spec.xi))
            pts = np.concatenate([xs, xs + h, xs - h, -xs])
            U = spec.apply(pts, sym)
            V = spec.apply(pts, sym, conjugate=True)
            n = xs.size
            k = ys.size

            def split(A):
                base, xp, xm, refl = A[:n], A[n : 2 * n], A[2 * n : 3 * n], A[3 * n :]
                return base, xp, xm, refl

            ub, uxp, uxm, uref = split(U)
            vb, vxp, vxm, vref = split(V)
            sl0, slp, slm = slice(0, k), slice(k, 2 * k), slice(2 * k, 3 * k)
            refl_term = lam / xs[:, None]
            dxu = (uxp[:, sl0] - uxm[:, sl0]) / (2 * h) + refl_term * (ub[:, sl0] - uref[:, sl0])
            dxv = (vxp[:, sl0] - vxm[:, sl0]) / (2 * h) + refl_term * (vb[:, sl0] - vref[:, sl0])
            dyu = (ub[:, slp] - ub[:, slm]) / (2 * h)
            dyv = (vb[:, slp] - vb[:, slm]) / (2 * h)
            res_u.append(float(np.max(np.abs(dxu - dyv))))
            res_v.append(float(np.max(np.abs(dyu + dxv))))
            uxx = (uxp[:, sl0] - 2 * ub[:, sl0] + uxm[:, sl0]) / h**2
            ux = (uxp[:, sl0] - uxm[:, sl0]) / (2 * h)
            uyy = (ub[:, slp] - 2 * ub[:, sl0] + ub[:, slm]) / h**2
            lap = uxx + 2 * lam / xs[:, None] * ux - lam * (ub[:, sl0] - uref[:, sl0]) / xs[:, None] ** 2 + uyy
            res_h.append(float(np.max(np.abs(lap))))
        wit = "residuals " + " ".join(f"{v:.3e}" for v in res_u)
        if lam == 0:
            rep.add("cr_order_u", lam, math.nan, res_u[-1], 0.0, 1e-5, wit)
        else:
            rep.add("cr_order_u", lam, math.nan, _fd_order(hs, res_u), 1.7, math.inf, wit)
            rep.add("cr_order_v", lam, math.nan, _fd_order(hs, res_v), 1.7, math.inf,
                    "residuals " + " ".join(f"{v:.3e}" for v in res_v))
            rep.add("harmonic_order", lam, math.nan, _fd_order(hs, res_h), 1.7, math.inf,
                    "residuals " + " ".join(f"{v:.3e}" for v in res_h))
        _transform_rows(rep, lp)
    return rep


PLANCHEREL_BUMPS = ((0.0, 1.0), (0.5, 1.0), (-1.0, 0.7), (2.0, 1.5), (0.3, 3.0))


def _transform_rows(rep, lp):
    lam = lp.lam
    worst, wit = 0.0, ""
    for c, w in PLANCHEREL_BUMPS:
        def f(x, c=c, w=w):
            return kz.even_bump((np.asarray(x, dtype=float) - c) / w)

        support = (c - w, c + w)
        spec = DunklSpectrum(lp, f, support, xi_max=400.0 / w)
        norm_sq = integrate_weighted_line(lambda x: f(x) ** 2, lp, tol=1e-13, abs_tol=1e-16, support=support,
                                          breakpoints=[c]).value
        ratio = spec.plancherel_ratio(norm_sq)
        if abs(ratio - 1) >= worst:
            worst, wit = abs(ratio - 1), f"bump center={c} width={w} ratio={ratio:.17g}"
    rep.add("plancherel", lam, math.nan, worst, 0.0, 1e-5, wit, "identity")
    worst = 0.0
    for xi in (0.0, 1.0, 2.0):
        val = dunkl_transform(lambda x: np.exp(-0.5 * np.asarray(x) ** 2), lp, xi)
        worst = max(worst, abs(val - math.exp(-0.5 * xi * xi)))
    rep.add("gaussian_fixed_point", lam, math.nan, worst, 0.0, 1e-7, "xi in {0, 1, 2}", "identity")


# ---------------------------------------------------------------------------
# counterexample


@_timed
def run_counterexample_suite(cfg: SuiteConfig) -> VerificationReport:
    """Decay of f * phi_t for phi in S^m and a positive bump f."""
    rep = VerificationReport("counterexample", cfg)
    for p in cfg.ps:
        for m in cfg.m_orders:
            if not m > 1 / p - 1:
                raise HypothesisError(f"need m > 1/p - 1, got m={m}, p={p}")
    exact = _Exact(kz.even_bump, (-1.0, 1.0))
    tgrid = 2.0 ** np.arange(3.0, 8.01, 0.25)
    xg = np.concatenate([-np.geomspace(1e-2, 4e3, 120)[::-1], [0.0], np.geomspace(1e-2, 4e3, 120)])
    lebesgue = WeightedMeasure.lebesgue()
    for m in cfg.m_orders:
        phi = schwartz_moment_bump(m)
        table = counterexample_decay(m, exact, tgrid, phi=phi, x_points=1001 if cfg.fast else 4001)
        wit = "sup " + " ".join(f"{t:g}:{s:.4e}" for t, s in zip(table.t[::4], table.sup[::4]))
        rep.add(f"counterexample_slope[m={m}]", math.nan, math.nan, table.slope, -(m + 1) - 0.2, -(m + 1) + 0.2, wit)
        rep.add(f"counterexample_mass[m={m}]", math.nan, math.nan, table.mass, 1e-3, math.inf, "int f dx")
        plus = classical_dilation_maximal(exact, phi, xg, aperture=0.0,
                                      tgrid=radius_sweep(1e-2, 1e4, 2 ** 0.25 if cfg.fast else 2 ** 0.125))
        for p in cfg.ps:
            norm = lp_quasinorm(lebesgue, xg, plus, p)
            rep.info(f"counterexample_norm[m={m}]", math.nan, p, norm.value,
                     f"tail exponent {norm.decay_exponent:.4f}, finite={norm.finite}")
    return rep


class _Exact:
    """A callable with a declared support, for functions given by formula."""

    def __init__(self, fn: Callable, support):
        self.fn = fn
        self.support = (float(support[0]), float(support[1]))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        return np.where((x >= lo) & (x <= hi), self.fn(x), 0.0)


# ---------------------------------------------------------------------------
# atoms


def _atom_grid(m, atom, per_side):
    v0 = float(m.antiderivative(atom.ball.center))
    r0 = atom.ball.radius
    off = r0 * np.geomspace(1e-3, 1e4, per_side)
    v = np.concatenate([v0 - off[::-1], [v0], v0 + off])
    return m.inverse(v)


@_timed
def run_atom_suite(cfg: SuiteConfig) -> VerificationReport:
    """Invariants of seeded atoms and a uniform bound for int (grand maximal)^p."""
    rep = VerificationReport("atoms", cfg)
    n_atoms = 20 if cfg.fast else 50
    for lam in cfg.lambdas:
        if lam == 0:
            continue
        m = WeightedMeasure.dunkl(lam)
        lp = LambdaParam(lam)
        family = default_family(lp.gamma_exponent)
        for p in cfg.ps:
            if p > 1:
                continue
            n = int(math.floor(lp.homogeneity * (1 / p - 1)))
            rng = cfg.rng("atoms", lam, p)
            worst = {"support": 0.0, "size": 0.0, "moments": 0.0}
            integrals = []
            tails = []
            for k in range(n_atoms):
                x0 = float(rng.choice([-1.0, 1.0]) * 2.0 ** rng.uniform(-3, 3))
                r0 = float(10.0 ** rng.uniform(-2, 1))
                ball = ball_interval(m, x0, r0)
                atom = make_atom(m, p, n, ball, seed=int(rng.integers(2**31)))
                lo, hi = ball.lo, ball.hi
                w = hi - lo
                outside = np.concatenate([np.linspace(lo - w, lo, 200, endpoint=False), np.linspace(hi, hi + w, 201)[1:]])
                worst["support"] = max(worst["support"], float(np.max(np.abs(atom(outside)))))
                worst["size"] = max(worst["size"], atom.size_product() - 1.0)
                scale = (2 * r0) ** (1 - 1 / p)
                vscale = max(abs(float(m.antiderivative(x0))), r0)
                mom = atom.moments()
                rel = max(abs(mom[j]) / (scale * vscale**j) for j in range(n + 1))
                worst["moments"] = max(worst["moments"], rel)
                x = _atom_grid(m, atom, 40 if cfg.fast else 72)
                gm = grand_maximal(m, atom, x, lp.gamma_exponent, family)
                norm = lp_quasinorm(m, x, gm, p, c_lambda=1.0)
                integrals.append(norm.value**p if norm.finite else math.inf)
                tails.append(norm.decay_exponent)
            rep.add("atom_support", lam, p, worst["support"], 0.0, 1e-9, f"{n_atoms} atoms", "identity")
            rep.add("atom_size", lam, p, max(worst["size"], 0.0), 0.0, 1e-9, f"{n_atoms} atoms", "identity")
            rep.add("atom_moments", lam, p, worst["moments"], 0.0, 1e-9, f"n={n}", "identity")
            j = int(np.argmax(integrals))
            rep.add("atom_grand_uniform", lam, p, integrals[j], 0.0, math.inf,
                    f"C = sup int (f*)^p dmu over {n_atoms} atoms, worst atom {j}, "
                    f"slowest tail exponent {max(tails):.4f} (needs < {-1 / p:.4f})")
    return rep


# ---------------------------------------------------------------------------
# equivalence


@dataclass(frozen=True)
class TestCase:
    """One member of the equivalence test set, dilatable."""

    __test__ = False

    name: str
    fn: Callable
    support: tuple
    xi_max: float
    scale: float = 1.0

    def dilate(self, s: float) -> "TestCase":
        fn = self.fn
        return replace(self, fn=lambda x, fn=fn, s=s: fn(np.asarray(x, dtype=float) / s),
                       support=(self.support[0] * s, self.support[1] * s), xi_max=self.xi_max / s,
                       scale=self.scale * s)

    @property
    def callable(self):
        return _Exact(self.fn, self.support)


def _zero_mass(lp, h, g, support):
    # h - alpha g with alpha chosen so that the weighted mass vanishes
    mh = integrate_weighted_line(h, lp, tol=1e-13, abs_tol=1e-17, support=support).value
    mg = integrate_weighted_line(g, lp, tol=1e-13, abs_tol=1e-17, support=support).value
    alpha = mh / mg
    return lambda x: h(x) - alpha * g(x)


def equivalence_test_set(lp: LambdaParam, seed: int = 0) -> list:
    """Twelve functions with vanishing weighted mass: Gaussians, bumps and atoms."""
    lam = lp.lam
    c = 2.0 ** -(2 * lam + 1)

    def gauss(x, a=1.0):
        x = np.asarray(x, dtype=float)
        return np.exp(-x * x / a)

    bump = kz.even_bump
    cases = [
        TestCase("odd_gauss", lambda x: np.asarray(x) * gauss(x), (-6.5, 6.5), 14.0),
        TestCase("gauss_diff", lambda x: gauss(x) - c * gauss(x, 4.0), (-13.0, 13.0), 14.0),
        TestCase("cubic_gauss", lambda x: np.asarray(x) ** 3 * gauss(x, 2.0), (-10.0, 10.0), 12.0),
        TestCase("shifted_gauss", _zero_mass(lp, lambda x: gauss(np.asarray(x) - 1.0), lambda x: gauss(x, 4.0), (-14.0, 14.0)),
                 (-14.0, 14.0), 14.0),
        TestCase("sine_gauss", lambda x: np.sin(2 * np.asarray(x)) * gauss(x, 2.0), (-9.0, 9.0), 16.0),
        TestCase("bump_diff", lambda x: bump(x) - c * bump(np.asarray(x) / 2), (-2.0, 2.0), 300.0),
        TestCase("odd_bump", lambda x: np.asarray(x) * bump(x), (-1.0, 1.0), 300.0),
        TestCase("shifted_bump", _zero_mass(lp, lambda x: bump(np.asarray(x) - 2.0), lambda x: bump(np.asarray(x) / 3.0), (-3.0, 3.0)),
                 (-3.0, 3.0), 300.0),
    ]
    m = WeightedMeasure.dunkl(lam)
    rng = np.random.default_rng(seed)
    for x0, r0 in ((0.0, 1.0), (1.5, 0.5), (-2.0, 6.0), (0.7, 0.05)):
        ball = ball_interval(m, x0, r0)
        atom = make_atom(m, 1.0, 0, ball, seed=int(rng.integers(2**31)))
        cases.append(TestCase(f"atom(x0={x0},r0={r0})", atom.values.exact, (ball.lo, ball.hi), 200.0 / (ball.hi - ball.lo)))
    return cases


def _functionals(lp: LambdaParam, case: TestCase, ps, fast: bool):
    """All maximal quasi-norms of one (dilated) test function."""
    m = WeightedMeasure.dunkl(lp.lam)
    step = 2 if fast else 4
    k = np.arange(-10 * step, 11 * step + 1)
    pos = 2.0 ** (k / step)
    # a fixed dyadic grid plus the support resolved uniformly, with heights
    # reaching well below the support width; both pieces commute with dyadic dilation
    lo, hi = case.support
    x = np.union1d(np.concatenate([-pos[::-1], [0.0], pos]), np.linspace(lo, hi, 65))
    j_lo = min(-10 * step, math.floor(step * math.log2((hi - lo) / 256)))
    y = 2.0 ** (np.arange(j_lo, 13 * step + 1) / step)
    f = case.callable
    field_ = HarmonicField(lp, f, case.support, case.xi_max)

    # Poisson: Euclidean and measure cones, far pairs far below the cone scale skipped
    near = np.abs(x) <= field_.near
    dist = np.maximum(np.abs(x)[:, None] - field_.radius, 0.0)
    mask = (y[None, :] >= dist / 64) | near[:, None]
    pv = field_.evaluate("P", x, y, mask=mask)
    p_euclid = _cone_sup(pv, x, y, x, lambda xi, yy: yy)
    absval = np.abs(pv)
    p_measure = np.array([np.max(np.where(_measure_halfwidth_mask(lp, x, y, xi) | (x[:, None] == xi), absval, 0.0))
                          for xi in x])
    nabla, plus = bump_maximals(lp, f, x, y_grid=y, field=field_)
    gm = grand_maximal(m, f, x, lp.gamma_exponent, default_family(lp.gamma_exponent), support=case.support)
    # Theorem-u2-type quantity: sup_y of the L^p norm of |Pf + iQf|
    # heights past the grid reach would push the mass of F(., y) off the grid
    yc = y[:: max(1, step // 2)]
    yc = yc[yc <= x[-1] / 32]
    pc = field_.evaluate("P", x, yc)
    qc = field_.evaluate("Q", x, yc)
    amp = np.hypot(pc, qc)
    out = {}
    for p in ps:
        vals = {
            "grand": lp_quasinorm(m, x, gm, p, lp.c_lambda),
            "bump_nabla": lp_quasinorm(m, x, nabla, p, lp.c_lambda),
            "bump_plus": lp_quasinorm(m, x, plus, p, lp.c_lambda),
            "poisson_nabla": lp_quasinorm(m, x, p_euclid, p, lp.c_lambda),
            "poisson_nabla_measure": lp_quasinorm(m, x, p_measure, p, lp.c_lambda),
        }
        u2 = [lp_quasinorm(m, x, amp[:, j], p, lp.c_lambda) for j in range(yc.size)]
        vals["analytic_sup_y"] = max(u2, key=lambda r: r.value)
        out[p] = vals
    if 2.0 not in out:
        fx = f(x)
        l2 = lp_quasinorm(m, x, fx, 2.0, lp.c_lambda)
        pn = lp_quasinorm(m, x, p_euclid, 2.0, lp.c_lambda)
        out["l2"] = (pn.value, l2.value)
    return out


FUNCTIONALS = ("grand", "bump_nabla", "bump_plus", "poisson_nabla")
REFERENCE = "poisson_nabla"


@_timed
def run_equivalence_suite(cfg: SuiteConfig) -> VerificationReport:
    """Ratio matrix of maximal quasi-norms over the test set, with dilation drift."""
    rep = VerificationReport("equiv", cfg)
    dilations = (1.0, 2.0, 4.0)
    for lam in cfg.lambdas:
        if lam == 0:
            continue
        lp = LambdaParam(lam)
        ps = tuple(p for p in cfg.ps if p <= 1)
        cases = equivalence_test_set(lp, seed=int(cfg.rng("equiv", lam).integers(2**31)))
        jobs = [(c, s) for c in cases for s in dilations]
        results = _pmap(lambda job: _functionals(lp, job[0].dilate(job[1]), ps, cfg.fast), jobs)
        table = {(c.name, s): res for (c, s), res in zip(jobs, results)}
        for p in ps:
            names = FUNCTIONALS + ("poisson_nabla_measure", "analytic_sup_y")
            ratios = {}
            for (cname, s), res in table.items():
                ref = res[p][REFERENCE].value
                for name in names:
                    ratios.setdefault(name, {})[(cname, s)] = res[p][name].value / ref
            for a_i, a in enumerate(FUNCTIONALS):
                for b in FUNCTIONALS[a_i + 1 :]:
                    vals = np.array([table[key][p][a].value / table[key][p][b].value for key in table])
                    span = float(vals.max() / vals.min()) if np.all(np.isfinite(vals)) else math.inf
                    rep.add(f"ratio_span[{a}/{b}]", lam, p, span, 1.0, cfg.span_bound,
                            f"range [{vals.min():.6g}, {vals.max():.6g}]")
            for name in ("poisson_nabla_measure", "analytic_sup_y"):
                vals = np.array(list(ratios[name].values()))
                span = float(vals.max() / vals.min()) if np.all(np.isfinite(vals)) else math.inf
                check = "cone_comparison" if name == "poisson_nabla_measure" else f"ratio_span[{name}/{REFERENCE}]"
                rep.add(check, lam, p, span, 1.0, cfg.span_bound, f"range [{vals.min():.6g}, {vals.max():.6g}]")
            worst, wit = 0.0, ""
            for name in names:
                if name == REFERENCE:
                    continue
                for c in cases:
                    base = ratios[name][(c.name, 1.0)]
                    for s in dilations[1:]:
                        d = abs(ratios[name][(c.name, s)] / base - 1)
                        if not d <= worst:
                            worst, wit = d, f"{name}/{REFERENCE} f={c.name} s={s:g}"
            rep.add("dilation_drift", lam, p, worst, 0.0, cfg.drift_bound, wit)
            for c in cases:
                tails = [table[(c.name, 1.0)][p][n].tail_fraction for n in FUNCTIONALS]
                rep.info(f"tail_fraction[{c.name}]", lam, p, max(tails))
        l2 = [res["l2"][0] / res["l2"][1] for res in results if "l2" in res]
        if l2:
            rep.add("l2_bound", lam, 2.0, max(l2), 0.0, math.inf, "sup ||P*f||_2 / ||f||_2 over the test set")
        _sandwich_rows(rep, lp, cases[:3], cfg)
    _lipschitz_rows(rep, cfg)
    return rep


def _unit_smooth_bump():
    pg, wg = np.polynomial.legendre.leggauss(64)
    mass = float(kz.even_bump(pg) @ wg)
    return lambda u: kz.even_bump(u) / mass


def _triangle(u):
    return np.maximum(1.0 - np.abs(u), 0.0)


def _lipschitz_rows(rep: VerificationReport, cfg: SuiteConfig):
    # classical bumps of different Lipschitz order give comparable radial maximals
    lp = LambdaParam(0.0)
    m = WeightedMeasure.lebesgue()
    step = 1 if cfg.fast else 2
    pos = 2.0 ** (np.arange(-8 * step, 11 * step + 1) / step)
    smooth = _unit_smooth_bump()
    cases = equivalence_test_set(lp, seed=int(cfg.rng("lipschitz").integers(2**31)))

    def norms(case):
        x = np.union1d(np.concatenate([-pos[::-1], [0.0], pos]), np.linspace(*case.support, 33))
        f = case.callable
        a = lipschitz_bump_maximal(f, smooth, x, support=case.support)
        b = lipschitz_bump_maximal(f, _triangle, x, support=case.support)
        return x, a, b

    sampled = _pmap(norms, cases)
    for p in (q for q in cfg.ps if q <= 1):
        ratios = np.array([lp_quasinorm(m, x, a, p).value / lp_quasinorm(m, x, b, p).value for x, a, b in sampled])
        ok = np.all(np.isfinite(ratios)) and ratios.min() > 0
        span = float(ratios.max() / ratios.min()) if ok else math.inf
        rep.add("lipschitz_bump_ratio", 0.0, p, span, 1.0, cfg.span_bound,
                f"range [{ratios.min():.6g}, {ratios.max():.6g}]")


def _sandwich_rows(rep: VerificationReport, lp: LambdaParam, cases, cfg: SuiteConfig):
    # a compact-class kernel maximal is dominated by the grand maximal; C is reported
    m = WeightedMeasure.dunkl(lp.lam)
    k = kz.triangular_kernel(m)
    x = np.concatenate([-(2.0 ** np.arange(-3, 5)), [0.0], 2.0 ** np.arange(-3, 5)])
    worst, wit = 0.0, ""
    for case in cases:
        f = case.callable
        nt = nontangential_maximal(k, m, f, x, support=case.support, cone_points=5 if cfg.fast else 9)
        gm = grand_maximal(m, f, x, lp.gamma_exponent, support=case.support)
        keep = gm > 1e-12 * gm.max()
        ratio = nt[keep] / gm[keep]
        i = int(np.argmax(ratio))
        if ratio[i] > worst:
            worst, wit = float(ratio[i]), f"f={case.name} x={x[keep][i]:.6g}"
    rep.add("kernel_grand_sandwich", lp.lam, math.nan, worst, 0.0, math.inf, wit)
