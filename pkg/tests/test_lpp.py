import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kpzlab import lpp
from kpzlab.sampling import BoundaryParams, generate_one_sided, generate_two_sided


def _brute(w, tx, ty, first=None):
    """Max over all up-right paths by enumeration; ``first`` forces the first step."""
    best = -math.inf
    steps = tx + ty
    for rights in itertools.combinations(range(steps), tx):
        rs = set(rights)
        if first == "right" and 0 not in rs:
            continue
        if first == "up" and 0 in rs:
            continue
        x = y = 0
        acc = w[0, 0]
        for k in range(steps):
            if k in rs:
                x += 1
            else:
                y += 1
            acc += w[x, y]
        best = max(best, acc)
    return best


SMALL = np.array([[0.0, 2.0], [3.0, 1.0]])  # w[i, j]: w10 = 3, w01 = 2, w11 = 1


def test_small_example():
    L = lpp.passage_times(SMALL)
    assert L[1, 1] == 4.0
    assert L[0, 0] == 0.0
    r = lpp.restricted_passage(SMALL, (1, 1))
    assert (r.X, r.Y, r.Z) == (4.0, 3.0, 4.0)
    assert lpp.boundary_pinned_passage(SMALL, (1, 1), 1, "bottom") == 4.0


def test_strip():
    assert lpp.passage_times(np.array([[0.0], [2.5]]))[1, 0] == 2.5


weights = arrays(np.float64, (5, 4), elements=st.floats(0, 10, allow_nan=False))


@given(weights)
def test_dp_matches_enumeration(w):
    L = lpp.passage_times(w).L
    for tx in range(5):
        for ty in range(4):
            assert L[tx, ty] == pytest.approx(_brute(w, tx, ty), abs=1e-12)


@given(weights)
def test_restricted_match_enumeration(w):
    X, Y = lpp.restricted_grids(w)
    for tx in range(1, 5):
        for ty in range(1, 4):
            assert X[tx, ty] == pytest.approx(_brute(w, tx, ty, "right"), abs=1e-12)
            assert Y[tx, ty] == pytest.approx(_brute(w, tx, ty, "up"), abs=1e-12)


@given(st.integers(0, 2**32), st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_max_identity_exact(seed, eta, pi):
    f = generate_two_sided(eta, pi, 20, 15, seed)
    L = lpp.passage_times(f).L
    X, Y = lpp.restricted_grids(f)
    assert np.array_equal(np.maximum(X, Y)[1:, 1:], L[1:, 1:])


@given(st.integers(0, 2**32), st.integers(1, 15), st.integers(1, 10), st.floats(0.0, 5.0))
def test_monotone_under_bump(seed, i, j, delta):
    f = generate_two_sided(0.4, 0.6, 15, 10, seed)
    L = lpp.passage_times(f).L
    w = f.values.copy()
    w[i, j] += delta
    d = lpp.passage_times(w).L - L
    assert d.min() >= 0
    assert d.max() <= delta + 1e-9
    assert np.all(d[:i, :] == 0) and np.all(d[:, :j] == 0)


@given(st.integers(0, 2**32), st.sampled_from(["bottom", "left"]))
def test_pinned_never_exceeds_L(seed, edge):
    f = generate_two_sided(0.3, 0.4, 12, 9, seed)
    L = lpp.passage_times(f).L[12, 9]
    lim = 12 if edge == "bottom" else 9
    vals = [lpp.boundary_pinned_passage(f, (12, 9), e, edge) for e in range(lim + 1)]
    assert max(vals) <= L
    # every path leaves the bottom row somewhere, so the best pin is L itself
    if edge == "bottom":
        assert max(vals) == pytest.approx(L, abs=1e-12)


def test_pinned_full_bottom_row():
    w = np.arange(12, dtype=float).reshape(4, 3)
    w[0, 0] = 0
    v = lpp.boundary_pinned_passage(w, (3, 2), 3, "bottom")
    assert v == w[:, 0].sum() + w[3, 1] + w[3, 2]


def test_pinned_left_enumeration():
    w = np.array([[0.0, 1.0, 5.0], [2.0, 0.5, 0.25], [4.0, 3.0, 1.0]])
    # entry 1 on the left: (0,0)->(0,1)->(1,1)-> ... -> (2,2)
    v = lpp.boundary_pinned_passage(w, (2, 2), 1, "left")
    assert v == 0.0 + 1.0 + 0.5 + max(3.0 + 1.0, 0.25 + 1.0)


def test_pinned_validation():
    with pytest.raises(ValueError):
        lpp.boundary_pinned_passage(SMALL, (1, 1), 2, "bottom")
    with pytest.raises(ValueError):
        lpp.boundary_pinned_passage(SMALL, (1, 0), 0, "bottom")


def test_restricted_needs_interior_target():
    with pytest.raises(ValueError):
        lpp.restricted_passage(SMALL, (0, 1))


def test_optimal_entry_examples():
    assert lpp.optimal_entry_distance(BoundaryParams.two_sided(0.5, 0.25), 1.0, 1.0, 1000, "bottom") == 889
    assert lpp.optimal_entry_distance(BoundaryParams.one_sided(0.25), 1.0, 1.0, 900, "left") == 800
    g = 1.5
    assert lpp.optimal_entry_distance(BoundaryParams.one_sided(g / (1 + g)), g, 1.0, 500, "left") == 0
    with pytest.raises(lpp.RegimeError):
        lpp.optimal_entry_distance(BoundaryParams.one_sided(0.75), 1.0, 1.0, 100, "left")


def test_limit_shapes():
    assert lpp.limit_shape_one_sided(0.75, 1.0) == 4.0
    assert lpp.limit_shape_one_sided(0.25, 1.0) == pytest.approx(16 / 3)
    assert lpp.limit_shape_one_sided(0.5, 1.0) == pytest.approx(4.0)
    assert 1 / (1 - 0.5) + 1 / 0.5 == pytest.approx(4.0)


@given(st.floats(0.1, 5.0))
def test_one_sided_shape_continuous(g):
    c = g / (1 + g)
    a = lpp.limit_shape_one_sided(c * (1 - 1e-9), g)
    b = lpp.limit_shape_one_sided(c * (1 + 1e-9), g)
    assert a == pytest.approx(b, rel=1e-6)


def test_shock():
    assert lpp.shock_slope(0.2, 0.3) == pytest.approx(7 / 12)
    s = lpp.limit_shape_two_sided(0.2, 0.3, math.sqrt(7 / 12))
    assert s.value == pytest.approx(50 / 12)
    assert s.on_shock
    assert lpp.limit_shape_two_sided(0.2, 0.3, 1.0).value == pytest.approx(6.25)
    with pytest.raises(lpp.RegimeError):
        lpp.shock_slope(0.5, 0.6)


@given(st.floats(0.05, 0.45), st.floats(0.05, 0.45))
def test_two_sided_branches_meet_on_shock(eta, pi):
    if eta + pi >= 1:
        return
    g = math.sqrt(lpp.shock_slope(eta, pi))
    left = g * g / eta + 1 / (1 - eta)
    bottom = g * g / (1 - pi) + 1 / pi
    assert left == pytest.approx(bottom, rel=1e-12)


def test_ensemble_matches_materialized_fields():
    from kpzlab.sampling import SeedPolicy

    targets = np.array([[7, 3], [2, 5], [7, 5], [0, 0]])
    p = BoundaryParams.two_sided(0.3, 0.6)
    E = lpp.passage_ensemble(p, targets, 6, 77, first_index=4)
    for k in range(6):
        f = generate_two_sided(0.3, 0.6, 7, 5, SeedPolicy(77).stream(4 + k))
        assert np.array_equal(E[k], lpp.passage_at(f, targets))


def test_ensemble_with_offsets_matches_fields():
    from kpzlab.sampling import SeedPolicy, generate_tasep_field

    targets = np.array([[4, 4], [6, 2]])
    E = lpp.passage_ensemble(BoundaryParams.from_densities(0.7, 0.3), targets, 5, 3, geometric_offsets=True)
    for k in range(5):
        f = generate_tasep_field(0.7, 0.3, 6, 4, SeedPolicy(3).stream(k))
        assert np.array_equal(E[k], lpp.passage_at(f, targets))


def test_ensemble_thread_independent():
    p = BoundaryParams.one_sided(0.6)
    a = lpp.passage_ensemble(p, [(30, 20)], 40, 9, threads=1)
    b = lpp.passage_ensemble(p, [(30, 20)], 40, 9, threads=4)
    assert np.array_equal(a, b)


def test_one_sided_stream_matches_field():
    from kpzlab.sampling import SeedPolicy

    E = lpp.passage_ensemble(BoundaryParams.one_sided(0.4), [(5, 5)], 3, 1)
    for k in range(3):
        f = generate_one_sided(0.4, 5, 5, SeedPolicy(1).stream(k))
        assert E[k, 0] == lpp.passage_times(f)[5, 5]
