"""Monte Carlo ensembles, empirical laws and the self-checking suites."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import lpp as _lpp
from .sampling import BoundaryParams, BoundaryKind, generate_two_sided
from .scaling import FrameModel, Regime, ScalingFrame, characteristic_project

DEFAULT_CELL_BUDGET = 5e9


class ResourceGuardError(RuntimeError):
    """Predicted work exceeds the configured budget."""


class RegimeViolation(ValueError):
    pass


# ------------------------------------------------------------ distributions


class EmpiricalDistribution:
    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size < 1:
            raise ValueError("need at least one sample")
        if np.isnan(x).any():
            raise ValueError("samples contain NaN")
        self.samples = x
        self.n = x.size

    def cdf(self, s):
        return np.searchsorted(self.samples, s, side="right") / self.n

    def __len__(self):
        return self.n


class JointSamples:
    """Tuples ``(n, m)``; joint CDFs by counting."""

    def __init__(self, values):
        v = np.asarray(values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("joint samples must have shape (n, m) with n >= 1")
        self.values = v

    @property
    def n(self):
        return self.values.shape[0]

    def marginal(self, k) -> EmpiricalDistribution:
        return EmpiricalDistribution(self.values[:, k])

    def cdf(self, s) -> float:
        return float(np.mean(np.all(self.values <= np.asarray(s, dtype=float), axis=1)))


def ks_distance(emp, cdf: Callable) -> float:
    """``sup |F_n - F|`` with both one-sided limits of ``F_n`` at every distinct sample."""
    if not isinstance(emp, EmpiricalDistribution):
        emp = EmpiricalDistribution(emp)
    x = emp.samples
    u, first = np.unique(x, return_index=True)
    last = np.append(first[1:], x.size)
    F = np.asarray(cdf(u), dtype=float)
    below = first / emp.n  # F_n just left of u
    at = last / emp.n
    return float(max(np.max(np.abs(at - F)), np.max(np.abs(below - F))))


@dataclass
class Moments:
    mean: float
    var: float
    skew: float
    se_mean: float
    se_var: float
    se_skew: float


def _stats_from_sums(n, s1, s2, s3):
    mean = s1 / n
    m2 = s2 / n - mean * mean
    m3 = s3 / n - 3 * mean * s2 / n + 2 * mean**3
    var = m2 * n / (n - 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        g1 = m3 / m2**1.5
        skew = np.where(m2 > 0, g1 * np.sqrt(n * (n - 1)) / (n - 2), 0.0)
    return mean, var, skew


def moments(emp) -> Moments:
    """Unbiased mean and variance, adjusted sample skewness; jackknife standard errors."""
    x = emp.samples if isinstance(emp, EmpiricalDistribution) else np.asarray(emp, dtype=float)
    n = x.size
    if n < 3:
        raise ValueError("need at least three samples")
    c = x.mean()  # shift for stable power sums
    y = x - c
    s1, s2, s3 = y.sum(), (y * y).sum(), (y**3).sum()
    mean, var, skew = _stats_from_sums(n, s1, s2, s3)
    jm, jv, js = _stats_from_sums(n - 1, s1 - y, s2 - y * y, s3 - y**3)

    def se(j):
        return float(np.sqrt((n - 1) / n * np.sum((j - j.mean()) ** 2)))

    return Moments(float(mean + c), float(var), float(skew), se(jm), se(jv), se(js))


# ---------------------------------------------------------------- ensembles


@dataclass
class EnsembleSpec:
    """``model``: ``"lpp-one-sided"`` or ``"lpp-two-sided"``."""

    model: str
    params: dict
    frame: ScalingFrame
    n_samples: int
    master_seed: int
    parallelism: Optional[int] = None
    cell_budget: float = DEFAULT_CELL_BUDGET
    geometric_offsets: bool = False

    def boundary(self) -> BoundaryParams:
        if self.model == "lpp-one-sided":
            return BoundaryParams.one_sided(self.params["eta"])
        if self.model == "lpp-two-sided":
            return BoundaryParams.two_sided(self.params["eta"], self.params["pi"])
        raise ValueError(f"unknown model {self.model!r}")


@dataclass
class EnsembleResult:
    spec: EnsembleSpec
    targets: np.ndarray
    raw: np.ndarray
    standardized: JointSamples

    def point(self, k) -> EmpiricalDistribution:
        return self.standardized.marginal(k)


def predicted_cells(targets, n_samples) -> float:
    return float(_lpp.cell_updates(targets)) * float(n_samples)


def check_budget(targets, n_samples, budget=DEFAULT_CELL_BUDGET) -> float:
    cells = predicted_cells(targets, n_samples)
    if cells > budget:
        raise ResourceGuardError(f"{cells:.3g} cell updates requested, budget is {budget:.3g}")
    return cells


def run_ensemble(spec: EnsembleSpec) -> EnsembleResult:
    if spec.frame.model is FrameModel.TASEP_HEIGHT:
        raise ValueError("run_ensemble works on LPP frames; use kpzlab.tasep for heights")
    if spec.n_samples < 1:
        raise ValueError("n_samples must be positive")
    params = spec.boundary()
    targets = spec.frame.lattice_points()
    check_budget(targets, spec.n_samples, spec.cell_budget)
    raw = _lpp.passage_ensemble(
        params,
        targets,
        spec.n_samples,
        spec.master_seed,
        threads=spec.parallelism,
        geometric_offsets=spec.geometric_offsets,
    )
    return EnsembleResult(spec, targets, raw, JointSamples(spec.frame.standardize(raw)))


# ------------------------------------------------------------------- suites


def slow_decorrelation_suite(
    eta: float,
    gamma: float,
    nu: Optional[float],
    T_list: Sequence[float],
    n_samples: int,
    seed: int,
    M: float = 1.0,
    threads: Optional[int] = None,
    cell_budget: float = DEFAULT_CELL_BUDGET,
) -> list[dict]:
    """Statistics of ``L(Q) - L(P) - drift`` with ``Q`` at distance ``T^nu`` up the characteristic.

    ``nu=None`` puts ``Q`` on ``P`` (``r = 0``).

    The case follows the regime: the fan is normalized by ``T^(1/3)`` and
    needs ``nu < 1``; the boundary regime by ``T^(1/2)`` with ``nu < 3/2``.
    """
    rows = []
    for k, T in enumerate(T_list):
        r = float(T) ** nu if nu is not None else 0.0
        ray = characteristic_project(T, r, eta, gamma)
        fan = ray.regime is Regime.FAN
        if nu is not None and fan and nu >= 1.0:
            raise RegimeViolation("fan regime needs nu < 1")
        if nu is not None and not fan and nu >= 1.5:
            raise RegimeViolation("boundary regime needs nu < 3/2")
        targets = np.array([ray.P, ray.Q], dtype=np.int64)
        check_budget(targets, n_samples, cell_budget)
        L = _lpp.passage_ensemble(BoundaryParams.one_sided(eta), targets, n_samples, seed + k, threads=threads)
        d = L[:, 1] - L[:, 0] - ray.drift
        scale = float(T) ** (1.0 / 3.0 if fan else 0.5)
        z = d / scale
        rows.append(
            {
                "T": float(T),
                "r": r,
                "case": "a" if fan else "b",
                "P": list(map(int, ray.P)),
                "Q": list(map(int, ray.Q)),
                "mean": float(z.mean()),
                "var": float(z.var(ddof=1)),
                "exceedance": float(np.mean(np.abs(z) >= M)),
                "M": M,
                "n": int(n_samples),
            }
        )
    return rows


@dataclass
class CouplingReport:
    n_fields: int
    checks: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def coupling_suite(
    eta: float,
    pi: float,
    nx: int,
    ny: int,
    n_fields: int,
    master_seed: int,
    bump: Optional[tuple] = None,
) -> CouplingReport:
    """Exact per-field checks on two-sided fields; violations record the field seed.

    * ``L = max(X, Y)`` everywhere with ``x, y >= 1``;
    * every boundary-pinned value at the far corner is at most ``L`` there;
    * raising one weight (``bump = (i, j, delta)``) moves ``L`` by an amount in
      ``[0, delta]``, and only on the quadrant above and right of the cell.
    """
    rep = CouplingReport(n_fields)
    from .sampling import SeedPolicy

    policy = SeedPolicy(master_seed)
    for k in range(n_fields):
        seed = policy.stream(k)
        f = generate_two_sided(eta, pi, nx, ny, seed)
        L = _lpp.passage_times(f).L
        X, Y = _lpp.restricted_grids(f)
        Z = np.maximum(X, Y)
        bad = np.count_nonzero(Z[1:, 1:] != L[1:, 1:])
        rep.checks += 1
        if bad:
            rep.violations.append({"seed": seed, "kind": "max-identity", "cells": int(bad)})
        target = (nx, ny)
        top = L[nx, ny]
        for edge, lim in ((_lpp.Edge.BOTTOM, nx), (_lpp.Edge.LEFT, ny)):
            for e in range(lim + 1):
                v = _lpp.boundary_pinned_passage(f, target, e, edge)
                rep.checks += 1
                if v > top:
                    rep.violations.append({"seed": seed, "kind": f"pinned-{edge.value}", "entry": e})
        if bump is not None:
            i, j, delta = bump
            w = f.values.copy()
            w[i, j] += delta
            L2 = _lpp.passage_times(w).L
            diff = L2 - L
            rep.checks += 1
            outside = diff.copy()
            outside[i:, j:] = 0.0
            if np.any(diff < 0) or np.any(diff > delta * (1 + 1e-12) + 1e-12) or np.any(outside != 0):
                rep.violations.append({"seed": seed, "kind": "monotone-bump"})
    return rep


# --------------------------------------------------------------------- output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if hasattr(obj, "value") and hasattr(obj, "name"):
        return obj.value
    if hasattr(obj, "__dataclass_fields__"):
        return _jsonable(asdict(obj))
    return obj


def results_document(spec: dict, per_point: list, verdicts: dict, metadata: Optional[dict] = None) -> dict:
    doc = {"spec": spec, "per_point": per_point, "verdicts": verdicts}
    if metadata is not None:
        doc["metadata"] = metadata
    return _jsonable(doc)


def write_json(path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_samples_csv(path, values, header: Sequence[str]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(list(header))
        for row in np.atleast_2d(values):
            wr.writerow([repr(float(v)) for v in row])
