"""Correlation kernels and their Fredholm determinants.

Kernels are evaluated in blocks: a time pair ``(tau_i, tau_j)`` and two vectors
of space points give a matrix.  The z-integrals of the Airy-type kernels
share one quadrature grid per block, so a block is a single matrix product.

Determinants use the Nystrom method with square-root weights,
``det(I - W^(1/2) K W^(1/2))``, factorized by partially pivoted LU.  The Schur
kernel jumps across ``x = y`` between slices; those blocks use product
integration weights, so ``det(I - A)`` is formed with a non-symmetric ``A``.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import roots_legendre

from .airy import ai as _ai

# ------------------------------------------------------------- parameters


class Process(enum.Enum):
    AIRY2 = "airy2"
    BM_TO_AIRY2 = "bm-to-airy2"
    BROWNIAN = "brownian"
    SCHUR = "schur"


@dataclass(frozen=True)
class QuadratureScheme:
    nodes_per_slice: int = 40
    domain_cutoff: float = 10.0
    rule: str = "gauss-legendre"
    contour_points: int = 256
    contour_radii: Optional[tuple] = None  # (r_C, r_C'); None picks the defaults

    def __post_init__(self):
        if self.nodes_per_slice < 8:
            raise ValueError("nodes_per_slice must be at least 8")
        if self.domain_cutoff < 6:
            raise ValueError("domain_cutoff must be at least 6")
        if self.rule != "gauss-legendre":
            raise ValueError(f"unsupported rule {self.rule!r}")
        if self.contour_points < 16:
            raise ValueError("contour_points must be at least 16")

    def with_nodes(self, n: int) -> "QuadratureScheme":
        return QuadratureScheme(n, self.domain_cutoff, self.rule, self.contour_points, self.contour_radii)


@dataclass(frozen=True)
class KernelSpec:
    process: Process
    times: tuple
    thresholds: tuple
    eta: Optional[float] = None  # Schur only
    N: Optional[int] = None  # Schur only

    def __post_init__(self):
        object.__setattr__(self, "process", Process(self.process))
        object.__setattr__(self, "times", tuple(self.times))
        object.__setattr__(self, "thresholds", tuple(float(s) for s in self.thresholds))
        if len(self.times) != len(self.thresholds) or not self.times:
            raise ValueError("times and thresholds must be nonempty lists of equal length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        if self.process is Process.BROWNIAN and min(self.times) <= 0:
            raise ValueError("Brownian times must be positive")
        if self.process is Process.SCHUR:
            if self.eta is None or self.N is None:
                raise ValueError("Schur kernel needs eta and N")
            _check_schur(self.eta, self.N, self.times)
            if min(self.thresholds) <= 0:
                raise ValueError("Schur thresholds must be positive")


@dataclass
class FredholmResult:
    value: float
    convergence_estimate: float
    converged: bool = True
    raw_value: float = float("nan")
    notes: list = field(default_factory=list)


# --------------------------------------------------------- quadrature grids

_PANEL_NODES = 20
_POS_REACH = 14.0  # Ai(14) ~ 1e-16
_TRUNC = 1e-12


def _gl(n):
    x, w = roots_legendre(n)
    return x, w


def _panels(edges, nodes):
    t, w = _gl(nodes)
    a, b = edges[:-1, None], edges[1:, None]
    z = (a + b) / 2 + (b - a) / 2 * t
    wz = (b - a) / 2 * w
    return z.ravel(), wz.ravel()


def _positive_grid(s_min, refine=1, growth=0.0):
    """Nodes on [0, Z] for integrands carrying Ai(s + z) exp(growth z) with s >= s_min."""
    # Ai(x) exp(g x) ~ exp(-2/3 x^1.5 + g x): push the reach out by 4 g^2
    Z = max(2.0, _POS_REACH + 4.0 * max(growth, 0.0) ** 2 - s_min)
    edges = np.linspace(0.0, Z, int(math.ceil(Z)) + 1)
    return _panels(edges, _PANEL_NODES * refine)


def _oscillatory_grid(decay, s_lo, s_hi, refine=1, z_max=4000.0):
    """Nodes on [0, Z] for ``exp(-decay u) Ai(s - u) ...`` with s in [s_lo, s_hi].

    Z makes the envelope ``exp(-decay Z) Z^(-1/4)`` fall below 1e-12; panels
    shrink like ``1/sqrt(u)`` to follow the local oscillation frequency.
    """
    Z = max(0.0, s_hi) + math.log(1.0 / _TRUNC) / decay
    Z = min(max(Z, 2.0), z_max)
    edges = [0.0]
    while edges[-1] < Z:
        u = edges[-1]
        edges.append(min(Z, u + min(1.0, 3.0 / math.sqrt(1.0 + max(0.0, u - s_lo)))))
    return _panels(np.asarray(edges), _PANEL_NODES * refine)


# ------------------------------------------------------------ Airy kernels


def _airy2_block(ti, xi, tj, xj, refine=1):
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xj = np.atleast_1d(np.asarray(xj, dtype=float))
    if ti >= tj:
        z, wz = _positive_grid(min(xi.min(), xj.min()), refine)
        A = _ai(xi[:, None] + z)
        B = _ai(xj[:, None] + z)
        return (A * (wz * np.exp(-(ti - tj) * z))) @ B.T
    d = tj - ti
    lo = min(xi.min(), xj.min())
    hi = max(xi.max(), xj.max())
    u, wu = _oscillatory_grid(d, lo, hi, refine)
    A = _ai(xi[:, None] - u)
    B = _ai(xj[:, None] - u)
    return -((A * (wu * np.exp(-d * u))) @ B.T)


def k_airy2(tau, s, tau2, s2, refine: int = 1) -> float:
    """Extended Airy kernel ``K(tau, s; tau2, s2)``."""
    return float(_airy2_block(tau, s, tau2, s2, refine)[0, 0])


def _bm_perturbation(tau2, xj, form="auto", refine=1):
    """``g(tau2, s2)`` of the rank-one term ``Ai(s) g(tau2, s2)``."""
    xj = np.atleast_1d(np.asarray(xj, dtype=float))
    if form == "auto":
        form = "rewritten" if tau2 > 0 else "original"
    if form == "rewritten":
        if tau2 <= 0:
            raise ValueError("the rewritten form needs tau2 > 0")
        u, wu = _oscillatory_grid(tau2, xj.min(), xj.max(), refine)
        return (_ai(xj[:, None] - u) * (wu * np.exp(-tau2 * u))).sum(axis=1)
    if form != "original":
        raise ValueError(f"unknown form {form!r}")
    z, wz = _positive_grid(xj.min(), refine, tau2)
    integral = (_ai(xj[:, None] + z) * (wz * np.exp(tau2 * z))).sum(axis=1)
    return np.exp(tau2**3 / 3.0 - xj * tau2) - integral


def _bm2_block(ti, xi, tj, xj, refine=1, form="auto"):
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    base = _airy2_block(ti, xi, tj, xj, refine)
    return base + np.outer(_ai(xi), _bm_perturbation(tj, xj, form, refine))


def k_bm_to_2(tau, s, tau2, s2, form: str = "auto", refine: int = 1) -> float:
    """BM-to-Airy2 transition kernel; ``form`` selects the representation of the rank-one term."""
    return float(_bm2_block(tau, s, tau2, s2, refine, form)[0, 0])


def bm_to_2_perturbation(tau2, s2, form: str = "auto", refine: int = 1) -> float:
    return float(_bm_perturbation(tau2, s2, form, refine)[0])


def _gauss(t, x):
    return np.exp(-x * x / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def _brownian_block(ti, xi, tj, xj):
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xj = np.atleast_1d(np.asarray(xj, dtype=float))
    out = np.repeat(_gauss(ti, xi)[:, None], xj.size, axis=1)
    if ti > tj:
        out = out - _gauss(ti - tj, xi[:, None] - xj[None, :])
    return out


def k_brownian(tau, s, tau2, s2) -> float:
    if tau <= 0 or tau2 <= 0:
        raise ValueError("Brownian kernel needs positive times")
    return float(_brownian_block(tau, s, tau2, s2)[0, 0])


# ----------------------------------------------------------- Schur kernel


def _check_schur(eta, N, ns):
    if not (0.0 < eta < 1.0):
        raise ValueError("eta must lie in (0, 1)")
    if int(N) != N or not (1 <= N <= 12):
        raise ValueError("N must be an integer in [1, 12]")
    if any(int(n) != n or n < 0 for n in ns):
        raise ValueError("n must be a nonnegative integer")


def default_radii(eta):
    m = min(eta, 1.0 - eta)
    return m / 3.0, (1.0 - eta) / 2.0 + m / 4.0


def _contours(eta, quad: QuadratureScheme):
    r_c, r_cp = quad.contour_radii or default_radii(eta)
    c_cp = (eta - 1.0) / 2.0
    if not (0 < r_c and r_cp > (1.0 - eta) / 2.0):
        raise ValueError("contour C' must enclose 0 and eta - 1")
    if r_c + r_cp >= eta - c_cp:
        raise ValueError("contours C and C' intersect, or C' encloses eta")
    P = quad.contour_points
    th = 2.0 * np.pi * (np.arange(P) + 0.5) / P
    e = np.exp(1j * th)
    z = eta + r_c * e
    w = c_cp + r_cp * e
    # (1/2 pi i) dz = (r e^{i th} / P) per node
    return z, r_c * e / P, w, r_cp * e / P


def _schur_k1(eta, N, ni, x, nj, y, quad):
    """Double contour part; rows follow ``x``, columns follow ``y``.

    The exponents are ``n`` (lattice column of the target), so ``n`` here is
    one less than the column count ``n`` of the Schur-process formula.
    """
    z, dz, w, dw = _contours(eta, quad)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    fz = (z + 1.0 - eta) ** ni * z / (z - eta) ** N * dz
    fw = (w - eta) ** N / ((w + 1.0 - eta) ** nj * w) * dw
    A = np.exp(-np.outer(x, z)) * fz
    B = np.exp(np.outer(y, w)) * fw
    C = 1.0 / (w[None, :] - z[:, None])
    return (A @ C @ B.T).real


def _psi_contour(eta, ni, x, nj, y, quad):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if ni >= nj:
        return np.zeros((x.size, y.size))
    _, _, w, dw = _contours(eta, quad)
    d = y[None, :] - x[:, None]
    vals = (np.exp(d[..., None] * w) * ((w + 1.0 - eta) ** (ni - nj) * dw)).sum(axis=-1).real
    return np.where(d > 0, vals, 0.0)


def _psi_exact(eta, ni, x, nj, y):
    """Residue of ``exp(w d) (w + 1 - eta)^(ni - nj)`` at ``w = eta - 1``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if ni >= nj:
        return np.zeros((x.size, y.size))
    k = nj - ni
    d = y[None, :] - x[:, None]
    dp = np.where(d > 0, d, 0.0)
    vals = np.exp((eta - 1.0) * dp) * dp ** (k - 1) / math.factorial(k - 1)
    return np.where(d > 0, vals, 0.0)


def schur_kernel(eta, N, n_i, x, n_j, y, quad: Optional[QuadratureScheme] = None):
    """``K_N(n_i, x; n_j, y) = -Psi + K^1`` with both parts by contour quadrature.

    Scalars in, scalar out; arrays give the ``len(x) x len(y)`` block.
    """
    quad = quad or QuadratureScheme()
    _check_schur(eta, N, (n_i, n_j))
    block = _schur_k1(eta, N, n_i, x, n_j, y, quad) - _psi_contour(eta, n_i, x, n_j, y, quad)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(block[0, 0])
    return block


def _schur_block(eta, N, ni, x, nj, y, quad):
    return _schur_k1(eta, N, ni, x, nj, y, quad) - _psi_exact(eta, ni, x, nj, y)


# ------------------------------------------------------ Fredholm machinery


def _slice_nodes_finite(s, n, cutoff):
    t, w = _gl(n)
    return s + cutoff * (t + 1.0) / 2.0, cutoff / 2.0 * w


def _psi_product_weights(eta, ni, nj, xa, Sj, vj, rate, conj, sub=160):
    """Row-dependent weights for the jump of Psi at ``y = x``.

    ``(Psi f)(x_a) = int_{y > x_a} Psi(x_a, y) f(y) dy`` is integrated exactly
    against the Lagrange interpolant of ``f`` through the slice nodes (in the
    substituted variable), which restores spectral convergence.
    """
    from scipy.interpolate import BarycentricInterpolator

    k = nj - ni
    t, w = _gl(sub)
    basis = BarycentricInterpolator(vj, np.eye(vj.size))
    out = np.empty((xa.size, vj.size))
    for a, x in enumerate(xa):
        v0 = -math.expm1(-rate * max(x - Sj, 0.0))
        v = v0 + (1.0 - v0) * (t + 1.0) / 2.0
        wv = (1.0 - v0) / 2.0 * w
        y = Sj - np.log1p(-v) / rate
        d = y - x
        g = np.exp((eta - 1.0 - conj) * d) * d ** (k - 1) / math.factorial(k - 1)
        out[a] = (g * wv / (rate * (1.0 - v))) @ basis(v)
    return out


def _schur_det(spec: KernelSpec, quad: QuadratureScheme, n: int, conj: float) -> float:
    eta, N = spec.eta, spec.N
    rate = eta / 8.0
    c = conj + eta / 2.0  # balances e^{-eta x} against polynomial growth in y
    t, wgl = _gl(n)
    v = (t + 1.0) / 2.0
    m = len(spec.times)
    xs = [S - np.log1p(-v) / rate for S in spec.thresholds]
    ws = wgl / 2.0 / (rate * (1.0 - v))
    A = np.empty((m * n, m * n))
    for i in range(m):
        for j in range(m):
            ni, nj = int(spec.times[i]), int(spec.times[j])
            xi, xj = xs[i], xs[j]
            blk = _schur_k1(eta, N, ni, xi, nj, xj, quad) * np.exp(c * (xi[:, None] - xj[None, :])) * ws[None, :]
            if ni < nj:
                blk = blk - _psi_product_weights(eta, ni, nj, xi, spec.thresholds[j], v, rate, c)
            A[i * n : (i + 1) * n, j * n : (j + 1) * n] = blk
    return float(np.linalg.det(np.eye(m * n) - A))


def _det(spec: KernelSpec, quad: QuadratureScheme, n: int, conj: float = 0.0, refine: int = 1) -> float:
    if spec.process is Process.SCHUR:
        return _schur_det(spec, quad, n, conj)
    m = len(spec.times)
    proc = spec.process
    nodes = [_slice_nodes_finite(s, n, quad.domain_cutoff) for s in spec.thresholds]
    M = np.empty((m * n, m * n))
    for i in range(m):
        xi, wi = nodes[i]
        for j in range(m):
            xj, wj = nodes[j]
            ti, tj = spec.times[i], spec.times[j]
            if proc is Process.AIRY2:
                blk = _airy2_block(ti, xi, tj, xj, refine)
            elif proc is Process.BM_TO_AIRY2:
                blk = _bm2_block(ti, xi, tj, xj, refine)
            else:
                blk = _brownian_block(ti, xi, tj, xj)
            if conj:
                blk = blk * np.exp(conj * (xi[:, None] - xj[None, :]))
            M[i * n : (i + 1) * n, j * n : (j + 1) * n] = np.sqrt(wi)[:, None] * blk * np.sqrt(wj)[None, :]
    return float(np.linalg.det(np.eye(m * n) - M))


def fredholm_joint_cdf(
    spec: KernelSpec,
    quad: Optional[QuadratureScheme] = None,
    tol: float = 1e-6,
    conjugation: float = 0.0,
) -> FredholmResult:
    """``det(1 - chi K chi)`` on the slices ``(s_k, s_k + cutoff)`` (Schur: ``(S_k, inf)``).

    The convergence estimate is the change from a half-resolution solve.
    ``conjugation`` multiplies the kernel by ``exp(c (x - y))``, which leaves the
    determinant unchanged and is exposed for testing.
    """
    quad = quad or QuadratureScheme()
    n = quad.nodes_per_slice
    value = _det(spec, quad, n, conjugation)
    coarse = _det(spec, quad, max(4, n // 2), conjugation)
    est = max(abs(value - coarse), 1e-14)
    res = FredholmResult(value, est, est <= tol, value)
    if not res.converged:
        res.notes.append(f"refinement change {est:.3g} exceeds tolerance {tol:.3g}")
    eps = 1e-6
    if value < -eps or value > 1 + eps:
        warnings.warn(f"Fredholm determinant {value:.6g} outside [0, 1]; clamped", RuntimeWarning)
        res.notes.append("clamped")
    if value < 0 or value > 1:
        res.value = min(max(value, 0.0), 1.0)
    return res


def airy2_cdf(s, quad: Optional[QuadratureScheme] = None) -> float:
    """GUE Tracy-Widom ``F_2(s)`` as the one-time Airy2 determinant."""
    return fredholm_joint_cdf(KernelSpec(Process.AIRY2, (0.0,), (s,)), quad).value


def schur_joint_cdf(eta, N, n_list, S_list, quad: Optional[QuadratureScheme] = None, tol=1e-6, conjugation=0.0):
    """``P(L(n_k, N) <= S_k for all k)`` for one-sided LPP with boundary rate ``eta``."""
    spec = KernelSpec(Process.SCHUR, tuple(int(n) for n in n_list), tuple(S_list), eta=eta, N=int(N))
    return fredholm_joint_cdf(spec, quad, tol, conjugation)


class TabulatedCDF:
    """Cubic interpolation of a one-point CDF on a fine grid, clipped to [0, 1]."""

    def __init__(self, fn, lo, hi, step=0.02):
        from scipy.interpolate import CubicSpline

        self.lo, self.hi = lo, hi
        self.grid = np.arange(lo, hi + step / 2, step)
        self.values = np.array([fn(s) for s in self.grid])
        self._spline = CubicSpline(self.grid, self.values)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.clip(self._spline(np.clip(s, self.lo, self.hi)), 0.0, 1.0)
        out = np.where(s < self.lo, np.minimum(out, self.values[0]), out)
        return np.where(s > self.hi, 1.0, out)


def write_cdf_table(path, rows) -> None:
    """Rows of ``(s, value, convergence_estimate)``."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["s", "value", "convergence_estimate"])
        for s, v, e in rows:
            wr.writerow([repr(float(s)), repr(float(v)), repr(float(e))])
