"""Batch command line: ``kpzlab --scenario NAME [--config FILE] [flags]``.

The configuration is one flat JSON object; command-line flags override its
values.  Unknown keys are rejected.  Exit codes: 0 pass, 1 verification
failure, 2 usage or configuration error, 3 I/O error, 4 resource guard.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_GUARD = 0, 1, 2, 3, 4

SCENARIOS = ("simulate-lpp", "simulate-tasep", "limit-cdf", "schur-cdf", "verify")


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ schema


def _real(lo=-math.inf, hi=math.inf, lo_open=False, hi_open=False):
    def check(key, v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{key}: expected a finite number, got {v!r}")
        bad_lo = v <= lo if lo_open else v < lo
        bad_hi = v >= hi if hi_open else v > hi
        if bad_lo or bad_hi:
            lb = "(" if lo_open else "["
            rb = ")" if hi_open else "]"
            raise ConfigError(f"{key}: {v!r} outside {lb}{lo}, {hi}{rb}")
        return float(v)

    return check


def _int(lo=None, hi=None):
    def check(key, v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or float(v) != int(v):
            raise ConfigError(f"{key}: expected an integer, got {v!r}")
        v = int(v)
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            raise ConfigError(f"{key}: {v} outside [{lo}, {hi}]")
        return v

    return check


def _choice(*opts):
    def check(key, v):
        if v not in opts:
            raise ConfigError(f"{key}: {v!r} is not one of {', '.join(opts)}")
        return v

    return check


def _list(item):
    def check(key, v):
        if not isinstance(v, (list, tuple)) or not v:
            raise ConfigError(f"{key}: expected a nonempty list")
        return [item(f"{key}[{i}]", x) for i, x in enumerate(v)]

    return check


def _string(key, v):
    if not isinstance(v, str):
        raise ConfigError(f"{key}: expected a string")
    return v


def _points(key, v):
    rows = _list(_list(_real()))(key, v)
    for i, r in enumerate(rows):
        if len(r) != 2:
            raise ConfigError(f"{key}[{i}]: expected [tau, theta]")
    return rows


_COMMON = {
    "scenario": (_choice(*SCENARIOS), None),
    "seed": (_int(0, 2**64 - 1), 0),
    "samples": (_int(1), 1000),
    "threads": (_int(1), None),
    "out": (_string, "kpzlab-out"),
    "cell_budget": (_real(0, lo_open=True), 5e9),
}

_SCHEMA: dict[str, dict[str, tuple[Callable, Any]]] = {
    "simulate-lpp": {
        "model": (_choice("one-sided", "two-sided"), "one-sided"),
        "eta": (_real(0, 1, lo_open=True), None),
        "pi": (_real(0, 1, lo_open=True), 1.0),
        "gamma": (_real(0, lo_open=True), 1.0),
        "T": (_real(1), None),
        "frame": (_choice("fixed-y", "cut"), "fixed-y"),
        "nu": (_real(0, 1, hi_open=True), 0.0),
        "points": (_points, [[0.0, 0.0]]),
        "write_samples": (lambda k, v: bool(v), True),
    },
    "simulate-tasep": {
        "rho_minus": (_real(0, 1), None),
        "rho_plus": (_real(0, 1), None),
        "t_max": (_real(0, lo_open=True), None),
        "sites": (_list(_int()), [0]),
        "profile_times": (_list(_real(0)), None),
    },
    "limit-cdf": {
        "process": (_choice("airy2", "bm-to-airy2", "brownian"), "airy2"),
        "tau": (_real(), None),
        "s_min": (_real(), -5.0),
        "s_max": (_real(), 2.0),
        "s_step": (_real(0, lo_open=True), 0.1),
        "nodes": (_int(8, 2000), 40),
        "cutoff": (_real(6), 10.0),
    },
    "schur-cdf": {
        "eta": (_real(0, 1, lo_open=True, hi_open=True), None),
        "N": (_int(1, 12), None),
        "n": (_list(_int(0)), None),
        "S": (_list(_real(0, lo_open=True)), None),
        "S_grid": (_list(_real()), None),
        "nodes": (_int(8, 2000), 40),
    },
    "verify": {
        "criteria": (_list(_string), None),
    },
}

_REQUIRED = {
    "simulate-lpp": ("eta", "T"),
    "simulate-tasep": ("rho_minus", "rho_plus", "t_max"),
    "limit-cdf": (),
    "schur-cdf": ("eta", "N", "n"),
    "verify": (),
}


@dataclass
class RunConfig:
    scenario: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]


def _validate(raw: dict) -> RunConfig:
    scenario = raw.get("scenario")
    if scenario is None:
        raise ConfigError("scenario: missing (one of " + ", ".join(SCENARIOS) + ")")
    _choice(*SCENARIOS)("scenario", scenario)
    schema = dict(_COMMON)
    schema.update(_SCHEMA[scenario])
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) for {scenario}: {', '.join(unknown)}")
    vals = {}
    for key, (check, default) in schema.items():
        if key in raw and raw[key] is not None:
            vals[key] = check(key, raw[key])
        else:
            vals[key] = default
    for key in _REQUIRED[scenario]:
        if vals.get(key) is None:
            raise ConfigError(f"{key}: required for {scenario}")
    _cross_checks(scenario, vals)
    return RunConfig(scenario, vals)


def _cross_checks(scenario, v):
    if scenario == "simulate-lpp":
        if v["model"] == "one-sided" and v["pi"] != 1.0:
            raise ConfigError("pi: only meaningful for the two-sided model")
        if v["frame"] == "fixed-y" and any(th != 0.0 for _, th in v["points"]):
            raise ConfigError("points: theta must be 0 in the fixed-y frame")
    elif scenario == "simulate-tasep":
        step = v["rho_minus"] == 1.0 and v["rho_plus"] == 0.0
        if not step and not (v["rho_minus"] < 1.0 and v["rho_plus"] > 0.0):
            raise ConfigError("rho_minus, rho_plus: need rho_minus < 1 and rho_plus > 0 (or the step case 1, 0)")
    elif scenario == "limit-cdf":
        if v["s_max"] < v["s_min"]:
            raise ConfigError("s_max: must not be below s_min")
        if v["tau"] is None:
            v["tau"] = 1.0 if v["process"] == "brownian" else 0.0
        if v["process"] == "brownian" and v["tau"] <= 0:
            raise ConfigError("tau: Brownian times must be positive")
    elif scenario == "schur-cdf":
        if (v["S"] is None) == (v["S_grid"] is None):
            raise ConfigError("S / S_grid: give exactly one (joint thresholds, or a [min, max, step] grid)")
        if v["S"] is not None and len(v["S"]) != len(v["n"]):
            raise ConfigError("S: needs one threshold per entry of n")
        if v["S_grid"] is not None:
            if len(v["n"]) != 1 or len(v["S_grid"]) != 3:
                raise ConfigError("S_grid: [min, max, step] with a single n")
            lo, hi, st = v["S_grid"]
            if not (0 < lo <= hi and st > 0):
                raise ConfigError("S_grid: need 0 < min <= max and step > 0")
        if any(b <= a for a, b in zip(v["n"], v["n"][1:])):
            raise ConfigError("n: must be strictly increasing")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kpzlab", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="flat JSON configuration file")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--threads", type=int, help="worker threads (default: $KPZLAB_THREADS)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--cell-budget", type=float)
    g = p.add_argument_group("scenario parameters (same names as the config keys)")
    for name, typ in (
        ("model", str),
        ("eta", float),
        ("pi", float),
        ("gamma", float),
        ("T", float),
        ("frame", str),
        ("nu", float),
        ("rho-minus", float),
        ("rho-plus", float),
        ("t-max", float),
        ("process", str),
        ("tau", float),
        ("s-min", float),
        ("s-max", float),
        ("s-step", float),
        ("nodes", int),
        ("cutoff", float),
        ("N", int),
    ):
        g.add_argument(f"--{name}", type=typ, dest=name.replace("-", "_"))
    g.add_argument("--points", type=json.loads, help='JSON list of [tau, theta], e.g. "[[0,0],[1,0]]"')
    g.add_argument("--sites", type=int, nargs="+")
    g.add_argument("--profile-times", type=float, nargs="+", dest="profile_times")
    g.add_argument("--n", type=int, nargs="+")
    g.add_argument("--S", type=float, nargs="+")
    g.add_argument("--S-grid", type=float, nargs=3, dest="S_grid")
    g.add_argument("--criteria", nargs="+")
    return p


def parse_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    raw: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: not valid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be a JSON object")
    for key, val in vars(args).items():
        if key == "config" or val is None:
            continue
        raw[key] = val
    if raw.get("threads") is None and os.environ.get("KPZLAB_THREADS"):
        try:
            raw["threads"] = int(os.environ["KPZLAB_THREADS"])
        except ValueError as exc:
            raise ConfigError("KPZLAB_THREADS: expected an integer") from exc
    return _validate(raw)


# -------------------------------------------------------------------- runs


def _metadata(cfg: RunConfig) -> dict:
    from . import __version__

    return {"version": __version__, "created": time.strftime("%Y-%m-%dT%H:%M:%S%z")}


def _run_limit_cdf(cfg, out: Path) -> int:
    from . import kernels as K

    v = cfg.values
    quad = K.QuadratureScheme(v["nodes"], v["cutoff"])
    n = int(math.floor((v["s_max"] - v["s_min"]) / v["s_step"] + 1e-9)) + 1
    grid = v["s_min"] + v["s_step"] * np.arange(n)
    rows = []
    for s in grid:
        r = K.fredholm_joint_cdf(K.KernelSpec(K.Process(v["process"]), (v["tau"],), (float(s),)), quad)
        rows.append((round(float(s), 12), r.value, r.convergence_estimate))
    K.write_cdf_table(out / f"{v['process']}-cdf.csv", rows)
    return EXIT_OK


def _run_schur(cfg, out: Path) -> int:
    from . import kernels as K

    v = cfg.values
    quad = K.QuadratureScheme(v["nodes"])
    if v["S_grid"] is not None:
        lo, hi, st = v["S_grid"]
        n = int(math.floor((hi - lo) / st + 1e-9)) + 1
        rows = []
        for S in lo + st * np.arange(n):
            r = K.schur_joint_cdf(v["eta"], v["N"], v["n"], [float(S)], quad)
            rows.append((round(float(S), 12), r.value, r.convergence_estimate))
        K.write_cdf_table(out / "schur-cdf.csv", rows)
    else:
        r = K.schur_joint_cdf(v["eta"], v["N"], v["n"], v["S"], quad)
        with open(out / "schur-cdf.csv", "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow([f"S{k}" for k in range(len(v["S"]))] + ["value", "convergence_estimate"])
            wr.writerow([repr(float(s)) for s in v["S"]] + [repr(r.value), repr(r.convergence_estimate)])
    return EXIT_OK


def _lpp_frame(v):
    from .scaling import FrameModel, FramePoint, ScalingFrame

    model = FrameModel.LPP_ONE_SIDED_FIXED_Y if v["frame"] == "fixed-y" else FrameModel.LPP_CUT
    pts = [FramePoint(tau, theta) for tau, theta in v["points"]]
    return ScalingFrame(model, v["T"], v["gamma"], v["nu"], pts)


def _run_simulate_lpp(cfg, out: Path) -> int:
    from . import harness as H

    v = cfg.values
    frame = _lpp_frame(v)
    model = "lpp-one-sided" if v["model"] == "one-sided" else "lpp-two-sided"
    params = {"eta": v["eta"], "pi": v["pi"]}
    spec = H.EnsembleSpec(model, params, frame, v["samples"], v["seed"], v["threads"], v["cell_budget"])
    spec.boundary()
    H.check_budget(frame.lattice_points(), v["samples"], v["cell_budget"])
    res = H.run_ensemble(spec)
    per_point = []
    for k, p in enumerate(frame.points):
        m = H.moments(res.point(k)) if res.standardized.n >= 3 else None
        per_point.append(
            {
                "params": {"tau": p.tau, "theta": p.theta},
                "lattice": res.targets[k].tolist(),
                "n": res.standardized.n,
                "mean": m.mean if m else None,
                "var": m.var if m else None,
                "skew": m.skew if m else None,
            }
        )
    doc = H.results_document(dict(cfg.values), per_point, {}, _metadata(cfg))
    H.write_json(out / "simulate-lpp.json", doc)
    if v["write_samples"]:
        header = [f"L{k}" for k in range(len(frame.points))] + [f"z{k}" for k in range(len(frame.points))]
        H.write_samples_csv(out / "simulate-lpp-samples.csv", np.hstack([res.raw, res.standardized.values]), header)
    return EXIT_OK


def _run_simulate_tasep(cfg, out: Path) -> int:
    from . import harness as H
    from . import tasep as TS
    from .sampling import generate_bernoulli_profile

    v = cfg.values
    t = v["t_max"]
    sites = v["sites"]
    q = [(t, j) for j in sites]
    h = TS.simulated_height_samples(v["rho_minus"], v["rho_plus"], q, v["samples"], v["seed"])
    per_point = []
    for k, j in enumerate(sites):
        col = h[:, k].astype(float)
        per_point.append(
            {
                "params": {"t": t, "j": j},
                "n": int(col.size),
                "mean": float(col.mean()),
                "var": float(col.var(ddof=1)) if col.size > 1 else 0.0,
                "h_ma_times_t": TS.h_ma(j / t, v["rho_minus"], v["rho_plus"]) * t,
            }
        )
    H.write_json(out / "simulate-tasep.json", H.results_document(dict(cfg.values), per_point, {}, _metadata(cfg)))
    H.write_samples_csv(out / "simulate-tasep-heights.csv", h, [f"h{j}" for j in sites])
    times = v["profile_times"] or [t]
    window = TS.shielded_window((min(min(sites), 0), max(max(sites), 0) + 1), max(times))
    init = generate_bernoulli_profile(v["rho_minus"], v["rho_plus"], window, v["seed"])
    tr = TS.simulate_event_driven(init, max(times), window, v["seed"])
    TS.write_height_profile(out / "simulate-tasep-profile.csv", tr, times, sites)
    return EXIT_OK


def _run_verify(cfg, out: Path, echo) -> int:
    from . import acceptance as A
    from . import harness as H

    names = cfg.values["criteria"] or list(A.REGISTRY)
    unknown = [n for n in names if n not in A.REGISTRY]
    if unknown:
        raise ConfigError(f"criteria: unknown {', '.join(unknown)} (known: {', '.join(A.REGISTRY)})")
    outcomes = A.run(names, A.Context(cfg.values["seed"] or A.Context().seed, cfg.values["threads"]), echo=echo)
    verdicts = {f"{o.criterion} {o.name}": o.passed for o in outcomes}
    details = [{"criterion": o.criterion, "name": o.name, "passed": o.passed, "detail": o.detail} for o in outcomes]
    meta = _metadata(cfg)
    meta["seconds"] = {f"{o.criterion} {o.name}": round(o.seconds, 3) for o in outcomes}
    H.write_json(out / "verify.json", H.results_document(dict(cfg.values), details, verdicts, meta))
    failed = [k for k, ok in verdicts.items() if not ok]
    if failed:
        echo(f"{len(failed)} of {len(verdicts)} checks failed: " + "; ".join(failed))
        return EXIT_FAIL
    echo(f"all {len(verdicts)} checks passed")
    return EXIT_OK


def run(cfg: RunConfig, echo: Callable[[str], None] = print) -> int:
    from .harness import ResourceGuardError
    from .lpp import RegimeError

    out = Path(cfg.values["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        echo(f"error: cannot create output directory {out}: {exc}")
        return EXIT_IO
    if cfg.values["threads"]:
        import numba

        numba.set_num_threads(max(1, min(cfg.values["threads"], numba.config.NUMBA_NUM_THREADS)))
    try:
        if cfg.scenario == "limit-cdf":
            return _run_limit_cdf(cfg, out)
        if cfg.scenario == "schur-cdf":
            return _run_schur(cfg, out)
        if cfg.scenario == "simulate-lpp":
            return _run_simulate_lpp(cfg, out)
        if cfg.scenario == "simulate-tasep":
            return _run_simulate_tasep(cfg, out)
        return _run_verify(cfg, out, echo)
    except ResourceGuardError as exc:
        echo(f"refused: {exc}")
        return EXIT_GUARD
    except (ConfigError, RegimeError) as exc:
        echo(f"error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        echo(f"error: {exc}")
        return EXIT_IO


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SystemExit as exc:  # argparse
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return run(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
