"""Continuous-time TASEP on a finite window and its last-passage representation.

Particles are labelled right to left, ``p = 0, 1, ...`` in the initial window.
Each particle carries its own sequence of exponential waiting times; a wait
starts when the particle's previous jump is done and its target site is free.
By memorylessness this is TASEP in law, and it is exactly the recursion of
last-passage percolation, which is what makes the step-initial-data coupling
with :func:`height_from_lpp` path-wise.

Windows are finite.  A particle leaving the right edge is removed and nothing
enters from the left, so the outermost sites are wrong in general.  The error
spreads inward at most one site per clock ring, which is dominated by a rate-1
Poisson process; one such front is drawn per edge (after the dynamics, from
the same stream) and queries that it could have reached are rejected.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from . import _rng
from .lpp import passage_ensemble, passage_times
from .sampling import BoundaryParams, WaitingField, _bernoulli_fill


def shielding_margin(t_max: float) -> int:
    """Sites added on each side of an interior so that edge effects stay out of it."""
    return int(math.ceil(t_max + 6.0 * math.sqrt(t_max)))


def shielded_window(interior, t_max: float) -> tuple[int, int]:
    m = shielding_margin(t_max)
    return int(interior[0]) - m, int(interior[1]) + m


@dataclass(frozen=True)
class HeightQuery:
    t: float
    j: int

    def __post_init__(self):
        if not (self.t >= 0.0):
            raise ValueError(f"query time must be nonnegative, got {self.t!r}")


# ------------------------------------------------------------------ dynamics


@numba.njit(cache=True)
def _heap_push(ht, hp, size, t, p):
    k = size
    ht[k] = t
    hp[k] = p
    while k > 0:
        parent = (k - 1) // 2
        if ht[parent] <= ht[k]:
            break
        ht[parent], ht[k] = ht[k], ht[parent]
        hp[parent], hp[k] = hp[k], hp[parent]
        k = parent
    return size + 1


@numba.njit(cache=True)
def _heap_pop(ht, hp, size):
    t = ht[0]
    p = hp[0]
    size -= 1
    ht[0] = ht[size]
    hp[0] = hp[size]
    k = 0
    while True:
        a = 2 * k + 1
        if a >= size:
            break
        if a + 1 < size and ht[a + 1] < ht[a]:
            a += 1
        if ht[k] <= ht[a]:
            break
        ht[a], ht[k] = ht[k], ht[a]
        hp[a], hp[k] = hp[k], hp[a]
        k = a
    return t, p, size


@numba.njit(cache=True)
def _wait(state, clocks, use_clocks, p, k):
    if use_clocks:
        if k >= clocks.shape[1]:
            raise ValueError("clock table exhausted: a particle needs more jumps than provided")
        return clocks[p, k]
    return _rng.exponential(state, 1.0)


@numba.njit(cache=True)
def _run(occ, lo, hi, t_max, state, clocks, use_clocks):
    """Event-driven dynamics.  Returns (times, from_sites, particles)."""
    n = 0
    for k in range(occ.shape[0]):
        n += occ[k]
    pos = np.empty(n, dtype=np.int64)
    c = 0
    for k in range(occ.shape[0] - 1, -1, -1):
        if occ[k]:
            pos[c] = lo + k
            c += 1
    if use_clocks and clocks.shape[0] < n:
        raise ValueError("clock table has fewer rows than particles")
    gone = np.int64(1) << np.int64(62)
    jumps = np.zeros(n, dtype=np.int64)
    ht = np.empty(max(n, 1))
    hp = np.empty(max(n, 1), dtype=np.int64)
    size = 0
    for p in range(n):
        if p == 0 or pos[p] + 1 < pos[p - 1]:
            size = _heap_push(ht, hp, size, _wait(state, clocks, use_clocks, p, 0), p)
    cap = 16 + 4 * n
    times = np.empty(cap)
    froms = np.empty(cap, dtype=np.int64)
    who = np.empty(cap, dtype=np.int64)
    m = 0
    while size > 0:
        if ht[0] > t_max:
            break
        t, p, size = _heap_pop(ht, hp, size)
        if m == cap:
            cap *= 2
            times2 = np.empty(cap)
            froms2 = np.empty(cap, dtype=np.int64)
            who2 = np.empty(cap, dtype=np.int64)
            times2[:m] = times[:m]
            froms2[:m] = froms[:m]
            who2[:m] = who[:m]
            times, froms, who = times2, froms2, who2
        times[m] = t
        froms[m] = pos[p]
        who[m] = p
        m += 1
        jumps[p] += 1
        # the left neighbour was blocked iff it sat right behind the old position
        freed = p + 1 < n and pos[p + 1] == pos[p] - 1
        if pos[p] == hi:
            pos[p] = gone
        else:
            pos[p] += 1
            if p == 0 or pos[p] + 1 < pos[p - 1]:
                size = _heap_push(ht, hp, size, t + _wait(state, clocks, use_clocks, p, jumps[p]), p)
        if freed:
            q = p + 1
            size = _heap_push(ht, hp, size, t + _wait(state, clocks, use_clocks, q, jumps[q]), q)
    return times[:m].copy(), froms[:m].copy(), who[:m].copy()


@numba.njit(cache=True)
def _front(state, t_max):
    """Arrival times of a rate-1 Poisson process on [0, t_max]."""
    out = np.empty(16)
    m = 0
    t = _rng.exponential(state, 1.0)
    while t <= t_max:
        if m == out.shape[0]:
            tmp = np.empty(2 * m)
            tmp[:m] = out[:m]
            out = tmp
        out[m] = t
        m += 1
        t += _rng.exponential(state, 1.0)
    return out[:m].copy()


@numba.njit(cache=True)
def _simulate(occ, lo, hi, t_max, seed, clocks, use_clocks):
    state = _rng.new_state(seed)
    times, froms, who = _run(occ, lo, hi, t_max, state, clocks, use_clocks)
    left = _front(state, t_max)
    right = _front(state, t_max)
    return times, froms, who, left, right


@dataclass(frozen=True)
class TasepTrajectory:
    """Initial occupations on ``window = (lo, hi)`` plus the ordered jump log.

    ``from_sites[k]`` is the site particle ``particles[k]`` left at
    ``times[k]``; a jump from ``hi`` leaves the window.
    """

    window: tuple
    initial: np.ndarray
    times: np.ndarray
    from_sites: np.ndarray
    particles: np.ndarray
    t_max: float
    left_front: np.ndarray  # arrival times of the edge-contamination fronts
    right_front: np.ndarray

    @property
    def lo(self) -> int:
        return self.window[0]

    @property
    def hi(self) -> int:
        return self.window[1]

    def clean_range(self, t: float) -> tuple[int, int]:
        """Sites that edge effects cannot have reached by time ``t``."""
        a = int(np.searchsorted(self.left_front, t, side="right"))
        b = int(np.searchsorted(self.right_front, t, side="right"))
        return self.lo + a, self.hi - b

    def _check_time(self, t):
        if not (0.0 <= t <= self.t_max):
            raise ValueError(f"time {t!r} outside [0, {self.t_max}]")

    def occupation_at(self, t: float) -> np.ndarray:
        self._check_time(t)
        occ = self.initial.astype(np.int8).copy()
        k = int(np.searchsorted(self.times, t, side="right"))
        src = self.from_sites[:k] - self.lo
        np.subtract.at(occ, src, 1)
        dst = src[src + 1 < occ.size] + 1
        np.add.at(occ, dst, 1)
        return occ

    def flux(self, j: int, t: float) -> int:
        """Jumps across the bond ``j -> j+1`` during ``[0, t]``."""
        self._check_time(t)
        k = int(np.searchsorted(self.times, t, side="right"))
        return int(np.count_nonzero(self.from_sites[:k] == j))

    def height(self, query, j: Optional[int] = None) -> int:
        """``h_t(j)`` from the occupation variables and the current through bond ``0 -> 1``."""
        q = query if isinstance(query, HeightQuery) else HeightQuery(float(query), int(j))
        self._check_time(q.t)
        a, b = self.clean_range(q.t)
        need_lo, need_hi = min(q.j, 0), max(q.j, 0) + 1
        if need_lo < a or need_hi > b:
            raise ValueError(
                f"site {q.j} at time {q.t} is outside the shielded interior [{a}, {b - 1}]"
            )
        occ = self.occupation_at(q.t)
        h = 2 * self.flux(0, q.t)
        if q.j >= 1:
            seg = occ[1 - self.lo : q.j + 1 - self.lo]
            h += int(np.sum(1 - 2 * seg.astype(np.int64)))
        elif q.j <= -1:
            seg = occ[q.j + 1 - self.lo : 1 - self.lo]
            h -= int(np.sum(1 - 2 * seg.astype(np.int64)))
        return h


def simulate_event_driven(
    init,
    t_max: float,
    window,
    seed: int,
    clocks: Optional[np.ndarray] = None,
) -> TasepTrajectory:
    """Run TASEP from occupations ``init`` on sites ``window[0] .. window[1]`` up to ``t_max``.

    ``clocks[p, k]`` optionally fixes the ``k``-th waiting time of particle
    ``p`` (labels right to left); otherwise waits are drawn from ``seed``.
    """
    lo, hi = int(window[0]), int(window[1])
    occ = np.asarray(init, dtype=np.int8)
    if occ.shape != (hi - lo + 1,):
        raise ValueError(f"init must have {hi - lo + 1} sites for window {window!r}")
    if np.any((occ != 0) & (occ != 1)):
        raise ValueError("occupations must be 0 or 1")
    if not (t_max >= 0.0):
        raise ValueError("t_max must be nonnegative")
    use = clocks is not None
    table = np.ascontiguousarray(clocks, dtype=np.float64) if use else np.empty((0, 0))
    times, froms, who, left, right = _simulate(
        occ, lo, hi, float(t_max), _rng.as_seed(seed), table, use
    )
    return TasepTrajectory((lo, hi), occ.copy(), times, froms, who, float(t_max), left, right)


def step_initial(window) -> np.ndarray:
    lo, hi = int(window[0]), int(window[1])
    return (np.arange(lo, hi + 1) < 0).astype(np.int8)


def step_clocks(field: WaitingField) -> np.ndarray:
    """Waiting-time table that drives the simulator with the jumps of a step-data field.

    Particle ``p`` (initially at ``-p-1``) is row ``p + 1`` of the field, and
    its ``k``-th jump waits ``w[k, p + 1]``.
    """
    return np.ascontiguousarray(field.values[:, 1:].T)


# ------------------------------------------------- last-passage representation


def _is_step(field: WaitingField) -> bool:
    return field.left_offset == 0 and field.bottom_offset == -1


def height_from_lpp(field: WaitingField, query, j: Optional[int] = None) -> int:
    """``h_t(j)`` read off a field built with exact two-sided offsets.

    Uses ``h_t(j) >= j + 2y  <=>  L(j + y, y) <= t`` along the diagonal
    ``x - y = j``.  Queries whose answer depends on cells outside the field are
    rejected.
    """
    q = query if isinstance(query, HeightQuery) else HeightQuery(float(query), int(j))
    if field.left_offset is None or field.bottom_offset is None:
        raise ValueError("field lacks the exact initial-data offsets (use generate_tasep_field)")
    L = passage_times(field).L
    return _height_on_grid(L, q.t, q.j, _is_step(field))


def _height_on_grid(L, t, j, step):
    y0 = max(0, -j)
    ys = np.arange(y0, min(L.shape[1] - 1, L.shape[0] - 1 - j) + 1)
    if ys.size == 0:
        raise ValueError(f"site {j} is not covered by the field")
    ok = L[j + ys, ys] <= t
    if not ok[0]:
        if j < 0 and step:
            return -j - 2  # the packed particles left of j have not moved past it
        raise ValueError(f"h_t({j}) lies below the range the field can resolve")
    if ok[-1]:
        raise ValueError(f"h_t({j}) exceeds the field; enlarge it")
    return int(j + 2 * ys[np.argmin(ok) - 1])


def lpp_height_samples(
    rho_minus: float,
    rho_plus: float,
    t: float,
    j: int,
    n_samples: int,
    master_seed: int,
    y_max: Optional[int] = None,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Samples of ``h_t(j)`` via passage times on exact two-sided fields.

    The diagonal is cut at ``y_max`` (by default well above the macroscopic
    height); a sample that reaches the cut raises.
    """
    if not (0.0 < rho_minus <= 1.0) or not (0.0 <= rho_plus < 1.0):
        raise ValueError("need rho_minus in (0, 1] and rho_plus in [0, 1)")
    y0 = max(0, -j)
    if y_max is None:
        hm = h_ma(j / t if t > 0 else 0.0, rho_minus, rho_plus) * t
        y_max = int(math.ceil((hm - j) / 2.0 + 8.0 * math.sqrt(t) + 10))
    y_max = max(y_max, y0 + 1)
    ys = np.arange(y0, y_max + 1)
    targets = np.stack([j + ys, ys], axis=1)
    params = BoundaryParams.from_densities(rho_minus, rho_plus)
    L = passage_ensemble(params, targets, n_samples, master_seed, threads=threads, geometric_offsets=True)
    ok = L <= t
    if np.any(ok[:, -1]):
        raise ValueError("a sample reached the diagonal cut; raise y_max")
    bad = ~ok[:, 0]
    if np.any(bad):
        if not (j < 0 and rho_minus == 1.0 and rho_plus == 0.0):
            raise ValueError(f"{int(bad.sum())} samples fall below the resolvable range at site {j}")
    k = np.argmin(ok, axis=1) - 1
    h = j + 2 * ys[np.maximum(k, 0)]
    return np.where(bad, -j - 2, h).astype(np.int64)


# ------------------------------------------------------------ simulated ensembles


@numba.njit(cache=True)
def _height_from_log(occ0, lo, froms, times, t, j):
    # h_t(j) = h_0(j) + 2 * flux(j)
    h = 0
    if j >= 1:
        for i in range(1, j + 1):
            h += 1 - 2 * occ0[i - lo]
    elif j <= -1:
        for i in range(j + 1, 1):
            h -= 1 - 2 * occ0[i - lo]
    for k in range(times.shape[0]):
        if times[k] > t:
            break
        if froms[k] == j:
            h += 2
    return h


@numba.njit(cache=True)
def _height_ensemble(rho_minus, rho_plus, lo, hi, t_max, qt, qj, master, n):
    out = np.empty((n, qt.shape[0]), dtype=np.int64)
    dummy = np.empty((0, 0))
    occ = np.empty(hi - lo + 1, dtype=np.int8)
    for s in range(n):
        state = _rng.new_state(_rng._stream_seed(master, np.uint64(s)))
        _bernoulli_fill(state, lo, occ, rho_minus, rho_plus)
        times, froms, who = _run(occ, lo, hi, t_max, state, dummy, False)
        for k in range(qt.shape[0]):
            out[s, k] = _height_from_log(occ, lo, froms, times, qt[k], qj[k])
    return out


def simulated_height_samples(rho_minus, rho_plus, queries, n_samples: int, master_seed: int) -> np.ndarray:
    """``h_t(j)`` at each ``(t, j)`` query from independent simulations, shape ``(n, m)``.

    The window is the query span widened by the shielding margin of the
    latest query time.
    """
    q = np.asarray(queries, dtype=float).reshape(-1, 2)
    qt, qj = q[:, 0].copy(), q[:, 1].astype(np.int64)
    t_max = float(qt.max())
    lo, hi = shielded_window((min(qj.min(), 0), max(qj.max(), 0) + 1), t_max)
    return _height_ensemble(
        float(rho_minus), float(rho_plus), lo, hi, t_max, qt, qj, _rng.as_seed(master_seed), int(n_samples)
    )


# -------------------------------------------------------- macroscopic profiles


def _check_densities(rho_minus, rho_plus):
    if not (0.0 <= rho_minus <= 1.0 and 0.0 <= rho_plus <= 1.0):
        raise ValueError("densities must lie in [0, 1]")


def shock_position(rho_minus: float, rho_plus: float) -> float:
    return 1.0 - (rho_minus + rho_plus)


def density_profile(xi: float, rho_minus: float, rho_plus: float) -> float:
    """Macroscopic density at ``xi t`` and time ``t``."""
    _check_densities(rho_minus, rho_plus)
    if rho_minus >= rho_plus:
        if xi <= 1.0 - 2.0 * rho_minus:
            return rho_minus
        if xi >= 1.0 - 2.0 * rho_plus:
            return rho_plus
        return (1.0 - xi) / 2.0
    xs = shock_position(rho_minus, rho_plus)
    if xi < xs:
        return rho_minus
    if xi > xs:
        return rho_plus
    return (rho_minus + rho_plus) / 2.0


def h_ma(xi: float, rho_minus: float, rho_plus: float) -> float:
    """Limit shape ``lim h_t(xi t) / t``."""
    _check_densities(rho_minus, rho_plus)

    def lin(r):
        return 2.0 * r * (1.0 - r) + (1.0 - 2.0 * r) * xi

    if rho_minus >= rho_plus:
        if xi <= 1.0 - 2.0 * rho_minus:
            return lin(rho_minus)
        if xi >= 1.0 - 2.0 * rho_plus:
            return lin(rho_plus)
        return (1.0 + xi * xi) / 2.0
    return lin(rho_minus) if xi <= shock_position(rho_minus, rho_plus) else lin(rho_plus)


def write_height_profile(path, trajectory: TasepTrajectory, times, sites) -> None:
    """CSV with columns ``t, j, h``."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "j", "h"])
        for t in times:
            for j in sites:
                wr.writerow([repr(float(t)), int(j), trajectory.height(HeightQuery(float(t), int(j)))])
