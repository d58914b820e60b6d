"""Last-passage times on waiting-time fields, plus the deterministic shape formulas.

All recursions use ``L(x, y) = w[x, y] + max(L(x-1, y), L(x, y-1))`` with
out-of-grid neighbours at ``-inf``, so the bottom row and left column are
prefix sums.  Restricted variants only change which cells are reachable, so
``max(X, Y) == L`` holds bit-for-bit (floating addition is monotone).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numba
import numpy as np

from . import _rng
from .sampling import ONE_SIDED, TWO_SIDED, BoundaryKind, BoundaryParams, WaitingField, _draw_offsets, _draw_row


class RegimeError(ValueError):
    """Parameters fall outside the regime where a formula applies."""


class Edge(enum.Enum):
    BOTTOM = "bottom"
    LEFT = "left"


@dataclass
class PassageGrid:
    nx: int
    ny: int
    L: np.ndarray

    def __getitem__(self, xy):
        return self.L[xy]


@dataclass
class RestrictedPassage:
    X: np.ndarray
    Y: np.ndarray

    @property
    def Z(self) -> np.ndarray:
        return np.maximum(self.X, self.Y)


@numba.njit(cache=True)
def _dp(w, block_col0, block_row0):
    nx1, ny1 = w.shape
    L = np.empty((nx1, ny1))
    ninf = -np.inf
    for j in range(ny1):
        for i in range(nx1):
            if i == 0 and j == 0:
                L[0, 0] = w[0, 0]
                continue
            if (block_col0 and i == 0) or (block_row0 and j == 0):
                L[i, j] = ninf
                continue
            left = L[i - 1, j] if i > 0 else ninf
            down = L[i, j - 1] if j > 0 else ninf
            L[i, j] = w[i, j] + (left if left > down else down)
    return L


def _as_values(field) -> np.ndarray:
    w = field.values if isinstance(field, WaitingField) else np.asarray(field, dtype=float)
    if w.ndim != 2:
        raise ValueError("waiting times must form a 2-d array")
    return np.ascontiguousarray(w, dtype=np.float64)


def passage_times(field) -> PassageGrid:
    w = _as_values(field)
    L = _dp(w, False, False)
    return PassageGrid(w.shape[0] - 1, w.shape[1] - 1, L)


def _targets(target) -> tuple[np.ndarray, np.ndarray, bool]:
    arr = np.asarray(target)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    return np.floor(arr[:, 0]).astype(np.int64), np.floor(arr[:, 1]).astype(np.int64), single


def restricted_grids(field) -> tuple[np.ndarray, np.ndarray]:
    """Full grids of X (first step right) and Y (first step up)."""
    w = _as_values(field)
    return _dp(w, True, False), _dp(w, False, True)


def restricted_passage(field, target) -> RestrictedPassage:
    """X and Y at one target ``(x, y)`` or an ``(m, 2)`` array of targets, all with x, y >= 1."""
    w = _as_values(field)
    xs, ys, single = _targets(target)
    if np.any(xs < 1) or np.any(ys < 1):
        raise ValueError("restricted passage needs targets with x >= 1 and y >= 1")
    if np.any(xs >= w.shape[0]) or np.any(ys >= w.shape[1]):
        raise ValueError("target outside the field")
    sub = w[: xs.max() + 1, : ys.max() + 1]
    X, Y = restricted_grids(sub)
    if single:
        return RestrictedPassage(X[xs[0], ys[0]], Y[xs[0], ys[0]])
    return RestrictedPassage(X[xs, ys], Y[xs, ys])


@numba.njit(cache=True)
def _pinned(w, tx, ty, entry, bottom):
    # boundary sum feeds the first bulk cell, so additions happen in the same
    # order as in the full recursion and the result never exceeds L in floating point
    acc = 0.0
    if bottom:
        for i in range(entry + 1):
            acc += w[i, 0]
        sub = w[entry : tx + 1, 1 : ty + 1].copy()
    else:
        for j in range(entry + 1):
            acc += w[0, j]
        sub = w[1 : tx + 1, entry : ty + 1].copy()
    sub[0, 0] = sub[0, 0] + acc
    L = _dp(sub, False, False)
    return L[sub.shape[0] - 1, sub.shape[1] - 1]


def _edge(edge) -> Edge:
    return edge if isinstance(edge, Edge) else Edge(str(edge).lower())


def boundary_pinned_passage(field, target, entry: int, edge) -> float:
    """Best path that runs ``entry`` cells along the chosen edge and then leaves it.

    Bottom: ``(0,0) -> (entry,0) -> (entry,1) -> target``; Left is the mirror image.
    """
    w = _as_values(field)
    edge = _edge(edge)
    tx, ty = int(math.floor(target[0])), int(math.floor(target[1]))
    if not (0 <= tx < w.shape[0] and 0 <= ty < w.shape[1]):
        raise ValueError("target outside the field")
    limit = tx if edge is Edge.BOTTOM else ty
    other = ty if edge is Edge.BOTTOM else tx
    if not (0 <= entry <= limit):
        raise ValueError(f"entry {entry} outside [0, {limit}]")
    if other < 1:
        raise ValueError("target must leave the edge (needs the other coordinate >= 1)")
    return float(_pinned(w, tx, ty, int(entry), edge is Edge.BOTTOM))


def optimal_entry_distance(params: BoundaryParams, gamma: float, theta: float, T: float, edge) -> int:
    """Macroscopic point where the maximizing path leaves the boundary, on the lattice."""
    edge = _edge(edge)
    g2 = gamma * gamma
    if edge is Edge.BOTTOM:
        if params.kind is not BoundaryKind.TWO_SIDED:
            raise RegimeError("one-sided fields have no random bottom row")
        if params.pi >= 1.0:
            raise RegimeError("pi = 1: bottom row is bulk-like, no boundary entry")
        coef = 1.0 - g2 / (1.0 / params.pi - 1.0) ** 2
        length = theta * T
    else:
        if params.eta >= 1.0:
            raise RegimeError("eta = 1: left column is bulk-like, no boundary entry")
        coef = g2 - 1.0 / (1.0 / params.eta - 1.0) ** 2
        length = g2 * theta * T
    value = coef * theta * T
    if value < -1e-12 * max(1.0, abs(theta * T) * (1.0 + g2)):
        raise RegimeError(f"entry distance {value:.6g} is negative: not in the Gaussian regime for this edge")
    return int(min(max(round(value), 0), math.floor(length + 1e-9)))


def limit_shape_one_sided(eta: float, gamma: float) -> float:
    """``lim L1(T, gamma^2 T) / T``."""
    if not (0.0 < eta <= 1.0) or gamma <= 0:
        raise ValueError("need eta in (0, 1] and gamma > 0")
    if eta >= gamma / (1.0 + gamma):
        return (1.0 + gamma) ** 2
    return 1.0 / (1.0 - eta) + gamma * gamma / eta


class TwoSidedShape(NamedTuple):
    value: float
    branch: str  # "bulk", "left", "bottom"
    on_shock: bool


def limit_shape_two_sided(eta: float, pi: float, gamma: float, rtol: float = 1e-12) -> TwoSidedShape:
    """``lim L2(T, gamma^2 T) / T``: largest of the bulk and the admissible boundary branches."""
    if not (0.0 < eta <= 1.0 and 0.0 < pi <= 1.0) or gamma <= 0:
        raise ValueError("need eta, pi in (0, 1] and gamma > 0")
    g2 = gamma * gamma
    cands = [((1.0 + gamma) ** 2, "bulk")]
    if eta < gamma / (1.0 + gamma):
        cands.append((g2 / eta + 1.0 / (1.0 - eta), "left"))
    if pi < 1.0 / (1.0 + gamma):
        cands.append((g2 / (1.0 - pi) + 1.0 / pi, "bottom"))
    value, branch = max(cands)
    vals = dict((b, v) for v, b in cands)
    on_shock = "left" in vals and "bottom" in vals and abs(vals["left"] - vals["bottom"]) <= rtol * value
    return TwoSidedShape(value, branch, on_shock)


def shock_slope(eta: float, pi: float) -> float:
    if not (0.0 < eta < 1.0 and 0.0 < pi < 1.0):
        raise ValueError("need eta, pi in (0, 1)")
    if eta + pi >= 1.0:
        raise RegimeError("no shock unless eta + pi < 1")
    return eta * (1.0 - pi) / (pi * (1.0 - eta))


# ---------------------------------------------------------------- ensembles


@numba.njit(cache=True)
def _stream_one(kind, eta, pi, nx, ny, seed, offsets, tx, row_ptr, out):
    """One field, consumed row by row; writes L at the requested targets.

    Targets are sorted by row; ``row_ptr[j]:row_ptr[j+1]`` indexes row ``j``.
    """
    state = _rng.new_state(seed)
    gb = -2
    gl = -2
    if offsets:
        gb, gl = _draw_offsets(state, eta, pi)
    w = np.empty(nx + 1)
    L = np.empty(nx + 1)
    for j in range(ny + 1):
        if j == 0:
            _draw_row(state, 0, w, kind, eta, pi, gb, gl)
            acc = 0.0
            for i in range(nx + 1):
                acc += w[i]
                L[i] = acc
        else:
            # same draw order as _draw_row, fused with the recursion
            if gl == -1 or (gl >= 0 and j <= gl):
                L[0] += 0.0
            else:
                L[0] += _rng.exponential(state, 1.0 / eta)
            prev = L[0]
            for i in range(1, nx + 1):
                down = L[i]
                prev = _rng.exponential(state, 1.0) + (prev if prev > down else down)
                L[i] = prev
        for k in range(row_ptr[j], row_ptr[j + 1]):
            out[k] = L[tx[k]]


@numba.njit(cache=True, parallel=True)
def _stream_many(kind, eta, pi, nx, ny, master, first, n, offsets, tx, row_ptr):
    out = np.empty((n, tx.shape[0]))
    for s in numba.prange(n):
        seed = _rng._stream_seed(master, np.uint64(first + s))
        _stream_one(kind, eta, pi, nx, ny, seed, offsets, tx, row_ptr, out[s])
    return out


def cell_updates(targets) -> int:
    xs, ys, _ = _targets(targets)
    return int((xs.max() + 1) * (ys.max() + 1))


def passage_ensemble(
    params: BoundaryParams,
    targets,
    n_samples: int,
    master_seed: int,
    first_index: int = 0,
    threads: Optional[int] = None,
    geometric_offsets: bool = False,
) -> np.ndarray:
    """Passage times at ``targets`` for ``n_samples`` independent fields, shape ``(n, m)``.

    Sample ``k`` is bit-identical to ``passage_times(field)`` where ``field`` is
    generated with seed ``stream_seed(master_seed, first_index + k)`` on the grid
    ``(0..max x) x (0..max y)``.  The thread count does not change the output.
    """
    xs, ys, _ = _targets(targets)
    if np.any(xs < 0) or np.any(ys < 0):
        raise ValueError("targets must have nonnegative coordinates")
    if geometric_offsets and params.kind is not BoundaryKind.TWO_SIDED:
        raise ValueError("geometric offsets need a two-sided field")
    nx, ny = int(xs.max()), int(ys.max())
    order = np.argsort(ys, kind="stable")
    row_ptr = np.searchsorted(ys[order], np.arange(ny + 2), side="left").astype(np.int64)
    kind = TWO_SIDED if params.kind is BoundaryKind.TWO_SIDED else ONE_SIDED
    if threads is not None:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    raw = _stream_many(
        kind,
        float(params.eta),
        float(params.pi),
        nx,
        ny,
        _rng.as_seed(master_seed),
        int(first_index),
        int(n_samples),
        bool(geometric_offsets),
        np.ascontiguousarray(xs[order]),
        row_ptr,
    )
    out = np.empty_like(raw)
    out[:, order] = raw
    return out


def passage_at(field, targets: Sequence) -> np.ndarray:
    xs, ys, _ = _targets(targets)
    return passage_times(field).L[xs, ys]
