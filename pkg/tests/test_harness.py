import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import expon, kstwo, norm

from kpzlab import harness as H
from kpzlab.scaling import FrameModel, FramePoint, ScalingFrame


@pytest.mark.parametrize("n", [1, 9, 99])
def test_ks_quantile_samples(n):
    q = np.arange(1, n + 1) / (n + 1)
    d = H.ks_distance(norm.ppf(q), norm.cdf)
    assert d == pytest.approx(1 / (n + 1), abs=1e-12)


def test_ks_single_sample_and_zero_cdf():
    assert H.ks_distance([0.0], norm.cdf) == pytest.approx(0.5)
    assert H.ks_distance([1.0, 2.0, 3.0], lambda s: np.zeros_like(s)) == 1.0


def test_ks_ties_use_both_limits():
    # F_n jumps from 0 to 1 at the single atom
    assert H.ks_distance([0.0, 0.0, 0.0], norm.cdf) == pytest.approx(0.5)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=50))
def test_ks_matches_scipy(xs):
    from scipy.stats import kstest

    if len(set(xs)) != len(xs):
        return
    assert H.ks_distance(xs, norm.cdf) == pytest.approx(kstest(xs, norm.cdf).statistic, abs=1e-12)


def test_moments_constant():
    m = H.moments(np.full(10, 3.0))
    assert m.mean == 3.0 and m.var == 0.0 and m.skew == 0.0


def test_moments_gaussian_and_exponential():
    rng = np.random.default_rng(1)
    g = H.moments(rng.standard_normal(100_000))
    assert abs(g.var - 1) < 3 * g.se_var
    e = H.moments(rng.exponential(size=100_000))
    assert abs(e.skew - 2) < 3 * e.se_skew
    assert abs(e.mean - 1) < 3 * e.se_mean


def test_moments_match_scipy():
    from scipy.stats import skew

    x = np.random.default_rng(2).gamma(2.0, size=500)
    m = H.moments(x)
    assert m.var == pytest.approx(x.var(ddof=1))
    assert m.skew == pytest.approx(skew(x, bias=False))


def test_jackknife_mean_se_is_classical():
    x = np.random.default_rng(3).standard_normal(200)
    assert H.moments(x).se_mean == pytest.approx(x.std(ddof=1) / math.sqrt(200))


def test_joint_cdf_counting():
    j = H.JointSamples([[0, 0], [1, 2], [2, 1]])
    assert j.cdf((1, 1)) == pytest.approx(1 / 3)
    assert j.cdf((2, 2)) == 1.0
    assert j.marginal(1).cdf(1.5) == pytest.approx(2 / 3)


def _spec(**kw):
    frame = ScalingFrame(FrameModel.LPP_ONE_SIDED_FIXED_Y, 400, 1.0, points=[FramePoint(0.0), FramePoint(0.5)])
    base = dict(model="lpp-one-sided", params={"eta": 0.9}, frame=frame, n_samples=64, master_seed=11)
    base.update(kw)
    return H.EnsembleSpec(**base)


def test_ensemble_deterministic_and_schedule_free():
    a = H.run_ensemble(_spec(parallelism=1))
    b = H.run_ensemble(_spec(parallelism=1))
    c = H.run_ensemble(_spec(parallelism=8))
    assert np.array_equal(a.raw, b.raw) and np.array_equal(a.raw, c.raw)
    assert a.standardized.values.shape == (64, 2)


def test_resource_guard():
    with pytest.raises(H.ResourceGuardError):
        H.run_ensemble(_spec(n_samples=10**6, cell_budget=1e6))


def test_tasep_frame_rejected():
    frame = ScalingFrame(FrameModel.TASEP_HEIGHT, 100, 0.0)
    with pytest.raises(ValueError):
        H.run_ensemble(_spec(frame=frame))


def test_slow_decorrelation_r_zero():
    rows = H.slow_decorrelation_suite(0.9, 1.0, None, [200, 400], 50, 1)
    for r in rows:
        assert r["P"] == r["Q"] and r["mean"] == 0.0 and r["var"] == 0.0


def test_slow_decorrelation_regime_violation():
    with pytest.raises(H.RegimeViolation):
        H.slow_decorrelation_suite(0.9, 1.0, 1.0, [200], 10, 1)
    with pytest.raises(H.RegimeViolation):
        H.slow_decorrelation_suite(0.25, 1.0, 1.5, [200], 10, 1)


def test_coupling_suite_clean():
    rep = H.coupling_suite(0.4, 0.6, 30, 30, 20, 5, bump=(10, 10, 1.0))
    assert rep.passed and rep.checks == 20 * (1 + 31 + 31 + 1)


def test_coupling_suite_catches_planted_violation(monkeypatch):
    from kpzlab import lpp

    real = lpp.passage_times

    def off_by_one(field):
        g = real(field)
        g.L[5, 5] += 1.0
        return g

    monkeypatch.setattr(lpp, "passage_times", off_by_one)
    rep = H.coupling_suite(0.4, 0.6, 8, 8, 2, 5)
    assert not rep.passed
    assert {v["kind"] for v in rep.violations} == {"max-identity"}
    assert "seed" in rep.violations[0]


def test_json_and_csv(tmp_path):
    doc = H.results_document({"a": np.int64(1)}, [{"mean": np.float64(0.5)}], {"ok": np.bool_(True)})
    p = tmp_path / "r.json"
    H.write_json(p, doc)
    back = json.loads(p.read_text())
    assert back["spec"]["a"] == 1 and back["per_point"][0]["mean"] == 0.5 and back["verdicts"]["ok"] is True
    q = tmp_path / "s.csv"
    H.write_samples_csv(q, np.array([[1.0, 2.0]]), ["L0", "L1"])
    assert q.read_text().splitlines() == ["L0,L1", "1.0,2.0"]


def test_bulk_exponential_law_and_independence():
    from kpzlab.sampling import generate_one_sided

    f = generate_one_sided(0.5, 100, 100, 7)
    bulk = f.values[1:, 1:].ravel()
    assert H.ks_distance(bulk, expon.cdf) < kstwo(bulk.size).ppf(0.99)
    x = bulk - bulk.mean()
    r = np.dot(x[:-1], x[1:]) / np.dot(x, x)
    assert abs(r) < 4 / math.sqrt(bulk.size)
