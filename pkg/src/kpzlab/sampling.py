"""Waiting-time fields and Bernoulli initial data.

Fields are indexed ``values[i, j]`` for ``0 <= i <= nx`` (horizontal) and
``0 <= j <= ny`` (vertical).  Random cells are drawn row by row (``j`` outer,
``i`` inner) from one per-field stream, skipping cells whose law is the point
mass at zero.  The streaming passage-time kernels in :mod:`kpzlab.lpp` reuse
:func:`_draw_row`, so a field materialized here and a field consumed on the fly
are bit-identical.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from . import _rng

ONE_SIDED = 0
TWO_SIDED = 1


class BoundaryKind(enum.Enum):
    ONE_SIDED = ONE_SIDED
    TWO_SIDED = TWO_SIDED


@dataclass(frozen=True)
class BoundaryParams:
    """Boundary means: left column ``1/eta``, bottom row ``1/pi``."""

    eta: float
    pi: float = 1.0
    kind: BoundaryKind = BoundaryKind.ONE_SIDED

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"eta must lie in (0, 1], got {self.eta!r}")
        if self.kind is BoundaryKind.TWO_SIDED and not (0.0 < self.pi <= 1.0):
            raise ValueError(f"pi must lie in (0, 1], got {self.pi!r}")

    @classmethod
    def one_sided(cls, eta: float) -> "BoundaryParams":
        return cls(eta=eta, pi=1.0, kind=BoundaryKind.ONE_SIDED)

    @classmethod
    def two_sided(cls, eta: float, pi: float) -> "BoundaryParams":
        return cls(eta=eta, pi=pi, kind=BoundaryKind.TWO_SIDED)

    @classmethod
    def from_densities(cls, rho_minus: float, rho_plus: float) -> "BoundaryParams":
        """TASEP densities to LPP boundary rates (``eta = rho_-``, ``pi = 1 - rho_+``)."""
        return cls.two_sided(rho_minus, 1.0 - rho_plus)


@dataclass(frozen=True)
class SeedPolicy:
    master_seed: int

    def stream(self, sample_index: int) -> int:
        return _rng.stream_seed(self.master_seed, sample_index)


@dataclass
class WaitingField:
    nx: int
    ny: int
    values: np.ndarray
    params: BoundaryParams
    seed: int
    # zero-weight prefixes of the bottom row / left column (exact TASEP mapping);
    # -1 means the whole edge is zero
    bottom_offset: Optional[int] = None
    left_offset: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        """Debug dump, one ``i,j,w`` row per cell."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["i", "j", "w"])
            for j in range(self.ny + 1):
                for i in range(self.nx + 1):
                    writer.writerow([i, j, repr(float(self.values[i, j]))])


@numba.njit(cache=True)
def _draw_row(state, j, row, kind, eta, pi, g_bottom, g_left):
    """Fill ``row[i] = w[i, j]`` for one row, consuming draws in order."""
    nx1 = row.shape[0]
    if j == 0:
        row[0] = 0.0
        for i in range(1, nx1):
            if kind == ONE_SIDED or (g_bottom >= 0 and i <= g_bottom) or g_bottom == -1:
                row[i] = 0.0
            else:
                row[i] = _rng.exponential(state, 1.0 / pi)
        return
    if g_left == -1 or (g_left >= 0 and j <= g_left):
        row[0] = 0.0
    else:
        row[0] = _rng.exponential(state, 1.0 / eta)
    for i in range(1, nx1):
        row[i] = _rng.exponential(state, 1.0)


@numba.njit(cache=True)
def _draw_offsets(state, eta, pi):
    """Gap variables of two-sided Bernoulli data with ``rho_- = eta``, ``rho_+ = 1 - pi``.

    ``g_bottom``: empty sites in {1, 2, ...} before the first particle.
    ``g_left``: particles in {..., -1, 0} (scanning left from 0) before the
    first hole; site 0 carries density ``rho_+``.  -1 encodes "infinite".
    """
    rho_plus = 1.0 - pi
    g_bottom = _rng.geometric_failures(state, rho_plus)
    if _rng.uniform_open0(state) <= pi:
        g_left = 0
    else:
        tail = _rng.geometric_failures(state, 1.0 - eta)
        g_left = -1 if tail < 0 else tail + 1
    return g_bottom, g_left


@numba.njit(cache=True)
def _fill_field(kind, eta, pi, nx, ny, seed, offsets):
    state = _rng.new_state(seed)
    g_bottom = -2
    g_left = -2
    if offsets:
        g_bottom, g_left = _draw_offsets(state, eta, pi)
    out = np.empty((nx + 1, ny + 1))
    row = np.empty(nx + 1)
    for j in range(ny + 1):
        _draw_row(state, j, row, kind, eta, pi, g_bottom, g_left)
        out[:, j] = row
    return out, g_bottom, g_left


def _check_dims(nx: int, ny: int) -> None:
    if nx < 0 or ny < 0:
        raise ValueError(f"grid dimensions must be nonnegative, got ({nx}, {ny})")


def generate_one_sided(eta: float, nx: int, ny: int, seed: int) -> WaitingField:
    """Exp(1) bulk, Exp(1/eta) on the left column, zero bottom row."""
    params = BoundaryParams.one_sided(eta)
    _check_dims(nx, ny)
    values, _, _ = _fill_field(ONE_SIDED, float(eta), 1.0, nx, ny, _rng.as_seed(seed), False)
    return WaitingField(nx, ny, values, params, int(seed))


def generate_two_sided(
    eta: float,
    pi: float,
    nx: int,
    ny: int,
    seed: int,
    geometric_offsets: bool = False,
) -> WaitingField:
    """Exp(1) bulk, Exp(1/eta) left column, Exp(1/pi) bottom row, zero origin.

    With ``geometric_offsets`` the leading edge cells are zeroed according to
    the gaps of a sampled two-sided Bernoulli configuration, which makes the
    passage times equal in law to TASEP heights (not only asymptotically).
    """
    params = BoundaryParams.two_sided(eta, pi)
    _check_dims(nx, ny)
    values, gb, gl = _fill_field(
        TWO_SIDED, float(eta), float(pi), nx, ny, _rng.as_seed(seed), bool(geometric_offsets)
    )
    if not geometric_offsets:
        return WaitingField(nx, ny, values, params, int(seed))
    return WaitingField(nx, ny, values, params, int(seed), bottom_offset=int(gb), left_offset=int(gl))


def generate_tasep_field(rho_minus: float, rho_plus: float, nx: int, ny: int, seed: int) -> WaitingField:
    """Exact-law LPP field for TASEP with two-sided Bernoulli data.

    ``rho_minus = 1, rho_plus = 0`` is the step initial condition.
    """
    if not (0.0 < rho_minus <= 1.0) or not (0.0 <= rho_plus < 1.0):
        raise ValueError("need rho_minus in (0, 1] and rho_plus in [0, 1)")
    f = generate_two_sided(rho_minus, 1.0 - rho_plus, nx, ny, seed, geometric_offsets=True)
    f.meta["rho_minus"] = float(rho_minus)
    f.meta["rho_plus"] = float(rho_plus)
    return f


@numba.njit(cache=True)
def _bernoulli_fill(state, lo, out, rho_minus, rho_plus):
    for k in range(out.shape[0]):
        p = rho_minus if lo + k < 0 else rho_plus
        # u in (0, 1]; occupied with probability p exactly
        out[k] = 1 if _rng.uniform_open0(state) <= p else 0


@numba.njit(cache=True)
def _bernoulli(lo, hi, rho_minus, rho_plus, seed):
    state = _rng.new_state(seed)
    out = np.zeros(hi - lo + 1, dtype=np.int8)
    _bernoulli_fill(state, lo, out, rho_minus, rho_plus)
    return out


def generate_bernoulli_profile(rho_minus: float, rho_plus: float, window, seed: int) -> np.ndarray:
    """Occupations on ``window = (lo, hi)`` (inclusive): density ``rho_-`` below 0, ``rho_+`` from 0 on."""
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise ValueError(f"empty window {window!r}")
    step = rho_minus == 1.0 and rho_plus == 0.0
    if not step and not (0.0 <= rho_minus < 1.0 and 0.0 < rho_plus <= 1.0):
        raise ValueError(
            "densities must satisfy rho_minus in [0, 1), rho_plus in (0, 1] (or the step case (1, 0))"
        )
    return _bernoulli(lo, hi, float(rho_minus), float(rho_plus), _rng.as_seed(seed))
