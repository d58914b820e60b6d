import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpzlab import tasep as T
from kpzlab.sampling import generate_bernoulli_profile, generate_tasep_field


def _single_particle(t_max, seed):
    init = np.zeros(2 * T.shielding_margin(t_max) + 1, dtype=np.int8)
    m = T.shielding_margin(t_max)
    init[m] = 1
    return T.simulate_event_driven(init, t_max, (-m, m), seed)


def test_single_particle_moves_poisson():
    jumps = np.array([_single_particle(5.0, k).times.size for k in range(3000)])
    assert abs(jumps.mean() - 5.0) < 3 * math.sqrt(5.0 / 3000)
    assert abs(jumps.var() - 5.0) < 0.5


@given(st.integers(0, 2**32), st.floats(0.1, 0.9), st.floats(0.1, 0.9))
@settings(max_examples=20)
def test_exclusion_and_conservation(seed, rm, rp):
    win = (-40, 40)
    init = generate_bernoulli_profile(rm, rp, win, seed)
    tr = T.simulate_event_driven(init, 6.0, win, seed + 1)
    n0 = int(init.sum())
    for t in (0.0, 2.0, 6.0):
        occ = tr.occupation_at(t)
        assert set(np.unique(occ)) <= {0, 1}
        exits = tr.flux(win[1], t)
        assert occ.sum() == n0 - exits
    # particles keep their order: each jump is into an empty site
    occ = init.astype(int).copy()
    for s in tr.from_sites:
        assert occ[s - win[0]] == 1
        occ[s - win[0]] = 0
        if s < win[1]:
            assert occ[s + 1 - win[0]] == 0
            occ[s + 1 - win[0]] = 1


def test_initial_height_and_one_jump():
    win = (-30, 30)
    tr = T.simulate_event_driven(T.step_initial(win), 0.0, win, 0)
    assert tr.height(0.0, 0) == 0
    # site 0 starts empty, so left of the origin the profile sits two units below |j|
    for j in (-5, -1):
        assert tr.height(0.0, j) == -j - 2
    for j in (1, 5):
        assert tr.height(0.0, j) == j
    rows = np.full((60, 60), 100.0)
    rows[0, 0] = 0.1  # the particle at -1 jumps at 0.1, nothing else moves
    tr = T.simulate_event_driven(T.step_initial(win), 1.0, win, 0, clocks=rows)
    # the jump -1 -> 0 crosses bond (-1, 0) only: h(-1) rises by 2
    assert tr.height(0.05, -1) == -1
    assert tr.height(1.0, -1) == 1
    assert tr.height(1.0, 0) == 0 and tr.height(1.0, -2) == 0


def test_step_lpp_initial_profile():
    f = generate_tasep_field(1.0, 0.0, 20, 20, 0)
    assert T.height_from_lpp(f, 0.0, -3) == 1
    assert T.height_from_lpp(f, 0.0, 0) == 0
    assert T.height_from_lpp(f, 0.0, 4) == 4


@given(st.integers(0, 2**32))
@settings(max_examples=15)
def test_height_gradient(seed):
    win = (-60, 60)
    tr = T.simulate_event_driven(generate_bernoulli_profile(0.5, 0.3, win, seed), 4.0, win, seed)
    occ = tr.occupation_at(4.0)
    a, b = tr.clean_range(4.0)
    for j in range(max(a, -20), min(b - 1, 20)):
        assert tr.height(4.0, j + 1) - tr.height(4.0, j) == 1 - 2 * occ[j + 1 - win[0]]


def test_step_coupling_pathwise():
    t_max = 8.0
    for seed in range(10):
        f = generate_tasep_field(1.0, 0.0, 80, 80, seed)
        win = T.shielded_window((-10, 10), t_max)
        tr = T.simulate_event_driven(T.step_initial(win), t_max, win, 0, clocks=T.step_clocks(f))
        for t in (1.0, 4.0, 8.0):
            for j in range(-8, 9):
                assert tr.height(t, j) == T.height_from_lpp(f, t, j)


def test_contaminated_query_rejected():
    win = (-5, 5)
    tr = T.simulate_event_driven(T.step_initial(win), 50.0, win, 3)
    with pytest.raises(ValueError):
        tr.height(50.0, 4)


def test_clock_table_exhaustion_raises():
    win = (-20, 20)
    with pytest.raises(Exception):
        T.simulate_event_driven(T.step_initial(win), 50.0, win, 0, clocks=np.full((20, 2), 0.01))


def test_lpp_height_rejects_field_without_offsets():
    from kpzlab.sampling import generate_two_sided

    with pytest.raises(ValueError):
        T.height_from_lpp(generate_two_sided(0.5, 0.5, 5, 5, 0), 1.0, 0)


def test_simulated_and_lpp_heights_agree_in_law():
    from scipy.stats import ks_2samp

    # at j = 0 the height is twice the current, never below the field's range
    a = T.simulated_height_samples(0.6, 0.3, [(8.0, 0)], 3000, 1)[:, 0]
    b = T.lpp_height_samples(0.6, 0.3, 8.0, 0, 3000, 2)
    assert ks_2samp(a, b).pvalue > 1e-3


def test_h_ma_values():
    assert T.h_ma(0.0, 1.0, 0.0) == pytest.approx(0.5)
    xs = T.shock_position(0.2, 0.6)
    assert xs == pytest.approx(0.2)
    assert T.h_ma(xs - 1e-12, 0.2, 0.6) == pytest.approx(0.44)
    assert T.h_ma(xs + 1e-12, 0.2, 0.6) == pytest.approx(0.44)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(-0.99, 0.99))
def test_h_ma_derivative_is_one_minus_twice_density(rm, rp, xi):
    if rm < rp and abs(xi - T.shock_position(rm, rp)) < 1e-3:
        return
    d = 1e-6
    slope = (T.h_ma(xi + d, rm, rp) - T.h_ma(xi - d, rm, rp)) / (2 * d)
    assert slope == pytest.approx(1 - 2 * T.density_profile(xi, rm, rp), abs=1e-4)


def test_density_profile_fan_and_shock():
    assert T.density_profile(0.0, 1.0, 0.0) == 0.5
    assert T.density_profile(-1.5, 1.0, 0.0) == 1.0
    assert T.density_profile(0.5, 0.8, 0.2) == pytest.approx(0.25)
    xs = T.shock_position(0.2, 0.6)
    assert T.density_profile(xs, 0.2, 0.6) == pytest.approx(0.4)
    assert T.density_profile(xs - 0.01, 0.2, 0.6) == 0.2
    with pytest.raises(ValueError):
        T.density_profile(0.0, 1.5, 0.0)


def test_write_height_profile(tmp_path):
    win = T.shielded_window((-3, 3), 2.0)
    tr = T.simulate_event_driven(T.step_initial(win), 2.0, win, 0)
    p = tmp_path / "h.csv"
    T.write_height_profile(p, tr, [0.0, 2.0], range(-3, 4))
    lines = p.read_text().splitlines()
    assert lines[0] == "t,j,h" and len(lines) == 15
    assert lines[1] == "0.0,-3,1"
