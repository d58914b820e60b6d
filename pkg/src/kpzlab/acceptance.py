"""Registry of end-to-end verification criteria.

Each criterion is a function returning one or more :class:`Outcome` lines.
Tolerances and sample sizes are fixed here; callers only choose the seed and
thread count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import norm

from . import harness as H
from . import kernels as K
from . import lpp as _lpp
from . import tasep as _tasep
from .airy import airy
from .sampling import BoundaryParams, generate_tasep_field
from .scaling import FrameModel, FramePoint, ScalingFrame, gaussian_centering


@dataclass
class Outcome:
    criterion: str
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.criterion} {self.name}: {self.detail} ({self.seconds:.1f}s)"


@dataclass
class Context:
    seed: int = 20240611
    threads: Optional[int] = None


def _timed(budget):
    def wrap(fn):
        def run(ctx: Context):
            t0 = time.perf_counter()
            outs = fn(ctx)
            dt = time.perf_counter() - t0
            for o in outs:
                o.seconds = dt
            outs.append(
                Outcome(outs[0].criterion, "runtime", dt < budget, f"{dt:.1f}s against a {budget:.0f}s budget", dt)
            )
            return outs

        run.budget = budget
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


_F2_CACHE = {}


def f2_table():
    if "f2" not in _F2_CACHE:
        _F2_CACHE["f2"] = K.TabulatedCDF(K.airy2_cdf, -8.0, 5.0, step=0.05)
    return _F2_CACHE["f2"]


# --------------------------------------------------------------- criteria


@_timed(10)
def c01_coupling(ctx):
    """Path-wise coupling identities on random two-sided fields."""
    rep = H.coupling_suite(0.3, 0.4, 50, 50, 1000, ctx.seed, bump=(10, 10, 1.0))
    return [
        Outcome(
            "C1", "coupling", rep.passed, f"{rep.checks} checks on {rep.n_fields} fields, {len(rep.violations)} violations"
        )
    ]


def _exp_sum_cdf(t, eta):
    # Exp(1) + Exp(rate eta)
    return 1.0 - (eta * math.exp(-t) - math.exp(-eta * t)) / (eta - 1.0)


@_timed(300)
def c02_schur(ctx):
    """Finite-size Schur determinant against a closed form and against Monte Carlo."""
    outs = []
    err = max(abs(K.schur_joint_cdf(0.5, 1, [1], [t]).value - _exp_sum_cdf(t, 0.5)) for t in (1.0, 2.0, 4.0))
    outs.append(Outcome("C2", "closed form N=1 n=1", err < 1e-6, f"max |diff| = {err:.2e} (tol 1e-6)"))
    n = 1_000_000
    L = _lpp.passage_ensemble(BoundaryParams.one_sided(0.6), [(3, 3)], n, ctx.seed, threads=ctx.threads)[:, 0]
    worst = 0.0
    parts = []
    for S in (6.0, 8.0, 10.0):
        p = float(np.mean(L <= S))
        se = math.sqrt(p * (1 - p) / n)
        d = K.schur_joint_cdf(0.6, 3, [3], [S]).value
        z = abs(d - p) / se
        worst = max(worst, z)
        parts.append(f"S={S:g}: det {d:.5f} mc {p:.5f}")
    outs.append(Outcome("C2", "Monte Carlo N=3 n=3", worst < 3.0, "; ".join(parts) + f"; worst {worst:.2f} SE"))
    return outs


@_timed(60)
def c03_fredholm(ctx):
    """Determinant plumbing: Brownian closed form and Airy2 one-point sanity."""
    outs = []
    err = 0.0
    for tau in (0.5, 1.0, 2.0):
        for s in (-2.0, -1.0, 0.0, 1.0, 2.0):
            v = K.fredholm_joint_cdf(K.KernelSpec(K.Process.BROWNIAN, (tau,), (s,))).value
            err = max(err, abs(v - norm.cdf(s / math.sqrt(tau))))
    outs.append(Outcome("C3", "Brownian one-point", err < 1e-6, f"max |diff| = {err:.2e} (tol 1e-6)"))
    grid = np.arange(-6.0, 4.01, 0.25)
    vals = np.array([K.airy2_cdf(s) for s in grid])
    ok = bool(np.all(np.diff(vals) >= 0) and vals.min() >= 0 and vals.max() <= 1)
    outs.append(Outcome("C3", "Airy2 monotone in [0,1]", ok, f"range [{vals.min():.3g}, {vals.max():.6f}]"))
    s0 = -1.7711
    base = K.airy2_cdf(s0)
    fine = K.airy2_cdf(s0, K.QuadratureScheme(80))
    outs.append(
        Outcome("C3", "Airy2 refinement self-oracle", abs(base - fine) < 1e-3, f"|F(40) - F(80)| = {abs(base - fine):.2e}")
    )
    outs.append(
        Outcome("C3", "Airy2 value 0.5 at -1.7711", abs(base - 0.5) < 1e-3, f"F2(-1.7711) = {base:.7f}, target 0.5 +- 1e-3")
    )
    return outs


@_timed(120)
def c04_lln(ctx):
    """Law of large numbers on both sides of the transition."""
    T = 2000
    n = 200
    a = _lpp.passage_ensemble(BoundaryParams.one_sided(0.75), [(T // 4, T // 4)], n, ctx.seed, threads=ctx.threads)
    b = _lpp.passage_ensemble(BoundaryParams.one_sided(0.25), [(T, T)], n, ctx.seed + 1, threads=ctx.threads)
    ra = abs(a.mean() / T - 1.0)
    target = _lpp.limit_shape_one_sided(0.25, 1.0)
    rb = abs(b.mean() / T - target)
    return [
        Outcome("C4", "fan branch", ra < 0.02, f"|mean/T - 1| = {ra:.4f}"),
        Outcome("C4", "boundary branch", rb < 0.02, f"|mean/T - {target:.4f}| = {rb:.4f}"),
    ]


@_timed(900)
def c05_tracy_widom(ctx):
    """One-point GUE Tracy-Widom law and the two-time Airy2 joint law."""
    T, n = 1500, 10_000
    frame = ScalingFrame(FrameModel.LPP_ONE_SIDED_FIXED_Y, T, 1.0, points=[FramePoint(0.0), FramePoint(1.0)])
    spec = H.EnsembleSpec("lpp-one-sided", {"eta": 0.9}, frame, n, ctx.seed, ctx.threads)
    res = H.run_ensemble(spec)
    ks = H.ks_distance(res.point(0), f2_table())
    outs = [Outcome("C5", "KS to F2", ks < 0.05, f"KS = {ks:.4f} (tol 0.05)")]
    worst = 0.0
    for s1 in (-3.0, -2.0, -1.0, 0.0):
        for s2 in (-3.0, -2.0, -1.0, 0.0):
            d = K.fredholm_joint_cdf(K.KernelSpec(K.Process.AIRY2, (0.0, 1.0), (s1, s2))).value
            worst = max(worst, abs(res.standardized.cdf((s1, s2)) - d))
    outs.append(Outcome("C5", "two-time joint (gap 1)", worst < 0.08, f"max |emp - det| = {worst:.4f} (tol 0.08)"))
    return outs


@_timed(600)
def c06_gaussian(ctx):
    """Boundary-dominated variance and the Brownian covariance of two directions."""
    T, n, eta = 2000, 10_000, 0.25
    g1, g2 = 0.8, 1.0
    targets = [(T, int(math.floor(g1 * g1 * T))), (T, T)]
    L = _lpp.passage_ensemble(BoundaryParams.one_sided(eta), targets, n, ctx.seed, threads=ctx.threads)
    z = np.empty_like(L)
    v = []
    for k, g in enumerate((g1, g2)):
        z[:, k] = (L[:, k] - (g * g / eta + 1 / (1 - eta)) * T) / math.sqrt(T)
        v.append(g * g / eta**2 - 1 / (1 - eta) ** 2)
    var = z[:, 1].var(ddof=1)
    cov = np.cov(z[:, 0], z[:, 1])[0, 1]
    rv = abs(var / v[1] - 1)
    rc = abs(cov / min(v) - 1)
    return [
        Outcome("C6", "variance", rv < 0.05, f"var {var:.3f} vs {v[1]:.3f} (rel {rv:.3f}, tol 0.05)"),
        Outcome("C6", "covariance", rc < 0.10, f"cov {cov:.3f} vs {min(v):.3f} (rel {rc:.3f}, tol 0.10)"),
    ]


@_timed(600)
def c07_shock(ctx):
    """At the shock the fluctuation is the larger of two independent Gaussians."""
    eta, pi, g2, T, n = 0.2, 0.3, 7.0 / 12.0, 2000, 10_000
    gamma = math.sqrt(g2)
    shape = _lpp.limit_shape_two_sided(eta, pi, gamma)
    left = gaussian_centering("left", eta, gamma, 1.0, T)
    bottom = gaussian_centering("bottom", pi, gamma, 1.0, T)
    L = _lpp.passage_ensemble(
        BoundaryParams.two_sided(eta, pi), [(T, int(math.floor(g2 * T)))], n, ctx.seed, threads=ctx.threads
    )[:, 0]
    z = (L - shape.value * T) / math.sqrt(T)
    s1, s2 = math.sqrt(left.variance), math.sqrt(bottom.variance)
    ks = H.ks_distance(z, lambda s: norm.cdf(s / s1) * norm.cdf(s / s2))
    return [Outcome("C7", "product law", ks < 0.05, f"KS = {ks:.4f} (tol 0.05, on shock: {shape.on_shock})")]


@_timed(1200)
def c08_slow_decorrelation(ctx):
    """Normalized differences along characteristics shrink with T."""
    Ts = [500, 1000, 2000]
    a = H.slow_decorrelation_suite(0.9, 1.0, 0.5, Ts, 10_000, ctx.seed, threads=ctx.threads, cell_budget=2e10)
    b = H.slow_decorrelation_suite(0.25, 1.0, 0.75, Ts, 4_000, ctx.seed + 7, threads=ctx.threads, cell_budget=2e10)
    va = [r["var"] for r in a]
    eb = [r["exceedance"] for r in b]
    return [
        Outcome("C8", "case a variance decreasing", all(x > y for x, y in zip(va, va[1:])), f"{[round(x, 4) for x in va]}"),
        Outcome("C8", "case b exceedance decreasing", all(x > y for x, y in zip(eb, eb[1:])), f"{[round(x, 4) for x in eb]}"),
    ]


@_timed(600)
def c09_tasep_lpp(ctx):
    """Height function against last-passage times: path-wise (step) and in law (two-sided)."""
    mism = comps = skipped = 0
    nx, ny, t_max = 80, 120, 30.0
    lo, hi = -ny, nx + 1
    for k in range(100):
        f = generate_tasep_field(1.0, 0.0, nx, ny, ctx.seed + k)
        tr = _tasep.simulate_event_driven(
            _tasep.step_initial((lo, hi)), t_max, (lo, hi), ctx.seed + k, clocks=_tasep.step_clocks(f)
        )
        Lg = _lpp.passage_times(f).L
        for t in (0.0, 2.5, 10.0, 30.0):
            for j in range(-20, 21):
                try:
                    a = _tasep._height_on_grid(Lg, t, j, True)
                except ValueError:
                    continue
                try:
                    b = tr.height(t, j)
                except ValueError:
                    skipped += 1
                    continue
                comps += 1
                mism += a != b
    outs = [Outcome("C9", "step path-wise", mism == 0 and comps > 0, f"{comps} comparisons, {mism} mismatches, {skipped} outside the shielded interior")]
    n = 100_000
    trip = [(3, 2, 4.0), (4, 4, 8.0), (5, 3, 6.0)]
    L = _lpp.passage_ensemble(
        BoundaryParams.from_densities(0.7, 0.3),
        [(x, y) for x, y, _ in trip],
        n,
        ctx.seed,
        threads=ctx.threads,
        geometric_offsets=True,
    )
    Hs = _tasep.simulated_height_samples(0.7, 0.3, [(t, x - y) for x, y, t in trip], n, ctx.seed + 1)
    worst = 0.0
    parts = []
    for k, (x, y, t) in enumerate(trip):
        p = float(np.mean(L[:, k] <= t))
        q = float(np.mean(Hs[:, k] >= x + y))
        se = math.sqrt((p * (1 - p) + q * (1 - q)) / n)
        worst = max(worst, abs(p - q) / se)
        parts.append(f"({x},{y},{t:g}): {p:.4f} vs {q:.4f}")
    outs.append(Outcome("C9", "two-sided in law", worst < 3.0, "; ".join(parts) + f"; worst {worst:.2f} SE"))
    return outs


@_timed(600)
def c10_height_variance(ctx):
    """Height variance left of the shock."""
    rm, rp, xi, T, n = 0.2, 0.6, 0.1, 2000, 10_000
    j = int(round(xi * T))
    h = _tasep.lpp_height_samples(rm, rp, T, j, n, ctx.seed, threads=ctx.threads)
    target = 4 * rm * (1 - rm) * (1 - 2 * rm - xi) * T
    var = h.var(ddof=1)
    rel = abs(var / target - 1)
    return [Outcome("C10", "height variance", rel < 0.10, f"var {var:.1f} vs {target:.1f} (rel {rel:.3f}, tol 0.10)")]


@_timed(120)
def c11_numerics(ctx):
    """Airy ODE residual, conjugation invariance, monotonicity, stationarity, Brownian rectangles."""
    outs = []
    h = 1e-3
    # beyond |x| ~ 6 the h^2 x^2 Ai / 12 truncation of the difference itself passes 1e-6
    x = np.linspace(-6.0, 6.0, 1201)
    a = airy(x)[0]
    res = (airy(x + h)[0] - 2 * a + airy(x - h)[0]) / h**2 - x * a
    worst = float(np.max(np.abs(res) / np.maximum(1.0, np.abs(a))))
    outs.append(Outcome("C11", "Airy ODE residual", worst < 1e-6, f"max {worst:.2e} (tol 1e-6)"))
    spec = K.KernelSpec(K.Process.AIRY2, (0.0, 0.5), (-1.0, -0.5))
    base = K.fredholm_joint_cdf(spec).value
    conj = max(abs(K.fredholm_joint_cdf(spec, conjugation=c).value - base) for c in (-0.2, 0.2))
    sch = K.schur_joint_cdf(0.6, 3, [2, 3], [3.0, 4.0]).value
    sconj = max(abs(K.schur_joint_cdf(0.6, 3, [2, 3], [3.0, 4.0], conjugation=c).value - sch) for c in (-0.2, 0.2))
    outs.append(
        Outcome("C11", "conjugation invariance", max(conj, sconj) < 1e-8, f"Airy2 {conj:.1e}, Schur {sconj:.1e} (tol 1e-8)")
    )
    mono = True
    for proc, times in ((K.Process.AIRY2, (0.0, 0.5)), (K.Process.BM_TO_AIRY2, (0.0, 0.5))):
        prev = None
        for s in np.arange(-3.0, 1.01, 0.5):
            v = K.fredholm_joint_cdf(K.KernelSpec(proc, times, (s, -1.0))).value
            mono &= prev is None or v >= prev - 1e-12
            prev = v
    outs.append(Outcome("C11", "threshold monotonicity", bool(mono), "Airy2 and BM->Airy2, m=2"))
    st = abs(
        K.fredholm_joint_cdf(K.KernelSpec(K.Process.AIRY2, (0.0, 0.7), (-1.0, -2.0))).value
        - K.fredholm_joint_cdf(K.KernelSpec(K.Process.AIRY2, (1.3, 2.0), (-1.0, -2.0))).value
    )
    outs.append(Outcome("C11", "Airy2 stationarity", st < 1e-6, f"shift change {st:.1e} (tol 1e-6)"))
    err = 0.0
    from scipy.integrate import quad

    for t1, t2, s1, s2 in ((0.5, 1.0, 0.2, -0.3), (1.0, 2.5, -1.0, 0.5), (0.3, 0.9, 0.0, 0.0)):
        d = K.fredholm_joint_cdf(K.KernelSpec(K.Process.BROWNIAN, (t1, t2), (s1, s2))).value
        # independent increments: P(B(t1) <= s1, B(t2) <= s2)
        ref = quad(
            lambda x: norm.pdf(x, scale=math.sqrt(t1)) * norm.cdf((s2 - x) / math.sqrt(t2 - t1)),
            -np.inf,
            s1,
            epsabs=1e-13,
            epsrel=1e-13,
        )[0]
        err = max(err, abs(d - ref))
    outs.append(Outcome("C11", "Brownian rectangles", err < 1e-6, f"max |diff| = {err:.2e} (tol 1e-6)"))
    return outs


REGISTRY: dict[str, Callable] = {
    "C1": c01_coupling,
    "C2": c02_schur,
    "C3": c03_fredholm,
    "C4": c04_lln,
    "C5": c05_tracy_widom,
    "C6": c06_gaussian,
    "C7": c07_shock,
    "C8": c08_slow_decorrelation,
    "C9": c09_tasep_lpp,
    "C10": c10_height_variance,
    "C11": c11_numerics,
}

# criteria that finish in well under a minute on one core
QUICK = ("C1", "C3", "C4", "C11")


def run(names=None, ctx: Optional[Context] = None, echo: Optional[Callable] = None) -> list[Outcome]:
    ctx = ctx or Context()
    out = []
    for name in names or REGISTRY:
        if name not in REGISTRY:
            raise KeyError(f"unknown criterion {name!r}")
        for o in REGISTRY[name](ctx):
            out.append(o)
            if echo:
                echo(o.line())
    return out
