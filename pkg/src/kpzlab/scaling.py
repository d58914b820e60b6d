"""Coordinates and centering constants for the fluctuation scalings.

Everything here is closed-form arithmetic.  Real-valued lattice coordinates
are floored once, at the very end.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .lpp import RegimeError


class FrameModel(enum.Enum):
    TASEP_HEIGHT = "tasep-height"
    LPP_ONE_SIDED_FIXED_Y = "lpp-one-sided-fixed-y"
    LPP_CUT = "lpp-cut"


class Regime(enum.Enum):
    FAN = "fan"
    BOUNDARY_LEFT = "boundary-left"
    BOUNDARY_BOTTOM = "boundary-bottom"


def gamma_from_xi(xi: float) -> float:
    return (1.0 - xi) / (1.0 + xi)


def xi_from_gamma(gamma: float) -> float:
    return (1.0 - gamma) / (1.0 + gamma)


def _check_nu(nu):
    if not (0.0 <= nu < 1.0):
        raise ValueError(f"nu must lie in [0, 1), got {nu!r}")


def tasep_scaling(T, nu, xi, tau, theta, s):
    """Site ``X`` and height threshold ``H`` for the point ``(tau, theta, s)``."""
    if abs(xi) >= 1.0:
        raise ValueError("need |xi| < 1")
    _check_nu(nu)
    tt = T + theta * T**nu
    kx = (2.0 * (1.0 - xi * xi)) ** (1.0 / 3.0)
    kh = (1.0 - xi * xi) ** (2.0 / 3.0) / 2.0 ** (1.0 / 3.0)
    X = xi * tt + tau * kx * T ** (2.0 / 3.0)
    H = (1.0 + xi * xi) / 2.0 * tt + xi * tau * kx * T ** (2.0 / 3.0) + (tau * tau - s) * kh * T ** (1.0 / 3.0)
    return int(math.floor(X)), H


def tasep_fluctuation_scale(T, xi):
    """Height fluctuations are ``-kh T^(1/3)`` times the limit variable."""
    return (1.0 - xi * xi) ** (2.0 / 3.0) / 2.0 ** (1.0 / 3.0) * T ** (1.0 / 3.0)


def lpp_scaling0(T, gamma, tau, s):
    """Fixed-row scaling around ``(T/(1+g)^2, g^2 T/(1+g)^2)``."""
    if gamma <= 0:
        raise ValueError("need gamma > 0")
    g = gamma
    c = 2.0 * g ** (-2.0 / 3.0) * (1.0 + g) ** (-2.0 / 3.0)
    x = T / (1.0 + g) ** 2 + tau * c * T ** (2.0 / 3.0)
    y = g * g * T / (1.0 + g) ** 2
    ell = (
        T
        + 2.0 * tau * (1.0 + g) ** (1.0 / 3.0) * g ** (-2.0 / 3.0) * T ** (2.0 / 3.0)
        + (s - tau * tau) * (1.0 + g) ** (2.0 / 3.0) * g ** (-1.0 / 3.0) * T ** (1.0 / 3.0)
    )
    return int(math.floor(x)), int(math.floor(y)), ell


def lpp_scaling1(T, nu, gamma, tau, theta, s):
    """Scaling on the cut ``x + y = const``, moved by ``theta T^nu`` along the characteristic."""
    if gamma <= 0:
        raise ValueError("need gamma > 0")
    _check_nu(nu)
    g = gamma
    tt = T + theta * T**nu
    c = 2.0 * g ** (4.0 / 3.0) / ((1.0 + g * g) * (1.0 + g) ** (2.0 / 3.0))
    x = tt / (1.0 + g) ** 2 + tau * c * T ** (2.0 / 3.0)
    y = g * g * tt / (1.0 + g) ** 2 - tau * c * T ** (2.0 / 3.0)
    ell = (
        tt
        + tau * 2.0 * g ** (1.0 / 3.0) * (1.0 + g) ** (1.0 / 3.0) * (g - 1.0) / (1.0 + g * g) * T ** (2.0 / 3.0)
        + (s - tau * tau) * (1.0 + g) ** (2.0 / 3.0) * g ** (-1.0 / 3.0) * T ** (1.0 / 3.0)
    )
    return int(math.floor(x)), int(math.floor(y)), ell


def lpp_fluctuation_scale(T, gamma):
    return (1.0 + gamma) ** (2.0 / 3.0) * gamma ** (-1.0 / 3.0) * T ** (1.0 / 3.0)


def tasep_to_lpp(X, H):
    """Lattice point whose passage time decides ``h(X) >= H``."""
    return (X + H) / 2.0, (H - X) / 2.0


class CharacteristicRay(NamedTuple):
    P: tuple
    Q: tuple
    direction: tuple
    drift: float
    regime: Regime


def characteristic_project(T, r, eta, gamma) -> CharacteristicRay:
    """Base point ``P`` at time scale ``T`` and the point ``Q`` a distance ``r`` up the characteristic.

    Fan case (``gamma <= eta/(1-eta)``): the ray through the origin, drift ``r``.
    Boundary case: slope ``eta^2/(1-eta)^2`` from ``(T, gamma^2 T)``, drift ``r/(1-eta)^2``.
    """
    if not (0.0 < eta < 1.0) or gamma <= 0:
        raise ValueError("need eta in (0, 1) and gamma > 0")
    if r < 0:
        raise ValueError("r must be nonnegative")
    g2 = gamma * gamma
    if gamma <= eta / (1.0 - eta):
        k = (1.0 + gamma) ** 2
        P = (math.floor(T / k), math.floor(g2 * T / k))
        Q = (math.floor((T + r) / k), math.floor(g2 * (T + r) / k))
        return CharacteristicRay(P, Q, (1.0, g2), float(r), Regime.FAN)
    slope = eta * eta / (1.0 - eta) ** 2
    P = (math.floor(T), math.floor(g2 * T))
    Q = (math.floor(T + r), math.floor(g2 * T + r * slope))
    return CharacteristicRay(P, Q, (1.0, slope), r / (1.0 - eta) ** 2, Regime.BOUNDARY_LEFT)


class GaussianFrame(NamedTuple):
    center: float
    scale: float
    variance: float
    at_boundary: bool


def gaussian_centering(edge, param, gamma, theta, T, tol=1e-12) -> GaussianFrame:
    """Center, scale ``T^(1/2)`` and limiting variance of a boundary-dominated passage time.

    ``edge`` is ``"left"`` (``param = eta``) or ``"bottom"`` (``param = pi``).
    """
    edge = getattr(edge, "value", edge)
    g2 = gamma * gamma
    if not (0.0 < param < 1.0):
        raise ValueError("boundary parameter must lie in (0, 1)")
    if edge == "left":
        center = (g2 / param + 1.0 / (1.0 - param)) * theta * T
        var = theta * (g2 / param**2 - 1.0 / (1.0 - param) ** 2)
        ref = theta * g2 / param**2
    elif edge == "bottom":
        center = (1.0 / param + g2 / (1.0 - param)) * theta * T
        var = theta * (1.0 / param**2 - g2 / (1.0 - param) ** 2)
        ref = theta / param**2
    else:
        raise ValueError(f"unknown edge {edge!r}")
    if abs(var) <= tol * abs(ref):
        return GaussianFrame(center, math.sqrt(T), 0.0, True)
    if var < 0:
        raise RegimeError(f"variance {var:.6g} is negative: not in the Gaussian regime")
    return GaussianFrame(center, math.sqrt(T), var, False)


@dataclass(frozen=True)
class FramePoint:
    tau: float = 0.0
    theta: float = 0.0
    s: float = 0.0


@dataclass
class ScalingFrame:
    """A set of scaling points with raw and standardized accessors."""

    model: FrameModel
    T: float
    geometry: float  # xi for TASEP frames, gamma for LPP frames
    nu: float = 0.0
    points: Sequence[FramePoint] = field(default_factory=lambda: [FramePoint()])

    def __post_init__(self):
        _check_nu(self.nu)
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.model is FrameModel.TASEP_HEIGHT:
            if abs(self.geometry) >= 1:
                raise ValueError("need |xi| < 1")
        elif self.geometry <= 0:
            raise ValueError("need gamma > 0")
        self.points = [p if isinstance(p, FramePoint) else FramePoint(*p) for p in self.points]

    def _one(self, p: FramePoint, s=None):
        s = p.s if s is None else s
        if self.model is FrameModel.TASEP_HEIGHT:
            return tasep_scaling(self.T, self.nu, self.geometry, p.tau, p.theta, s)
        if self.model is FrameModel.LPP_ONE_SIDED_FIXED_Y:
            return lpp_scaling0(self.T, self.geometry, p.tau, s)
        return lpp_scaling1(self.T, self.nu, self.geometry, p.tau, p.theta, s)

    def lattice_points(self) -> np.ndarray:
        """Integer sites ``X`` (TASEP) or ``(x, y)`` (LPP) for each point."""
        out = [self._one(p)[:-1] for p in self.points]
        return np.array(out, dtype=np.int64)

    def thresholds(self) -> np.ndarray:
        """Height threshold ``H`` or passage threshold ``ell`` at each point's ``s``."""
        return np.array([self._one(p)[-1] for p in self.points])

    def centers(self) -> np.ndarray:
        """Thresholds at ``s = 0``."""
        return np.array([self._one(p, 0.0)[-1] for p in self.points])

    @property
    def scale(self) -> float:
        if self.model is FrameModel.TASEP_HEIGHT:
            return tasep_fluctuation_scale(self.T, self.geometry)
        return lpp_fluctuation_scale(self.T, self.geometry)

    def standardize(self, raw: np.ndarray) -> np.ndarray:
        """Map observables to the limit variable ``s`` at each point.

        LPP: ``(L - ell(s=0)) / scale``.  TASEP: ``(H(s=0) - h) / scale``, so the
        event ``h >= H(s)`` is the event ``value <= s``.
        """
        raw = np.asarray(raw, dtype=float)
        z = (raw - self.centers()) / self.scale
        return -z if self.model is FrameModel.TASEP_HEIGHT else z
