import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kpzlab.lpp import RegimeError, limit_shape_one_sided
from kpzlab.scaling import (
    FrameModel,
    FramePoint,
    Regime,
    ScalingFrame,
    characteristic_project,
    gamma_from_xi,
    gaussian_centering,
    lpp_scaling0,
    lpp_scaling1,
    tasep_scaling,
    tasep_to_lpp,
    xi_from_gamma,
)


def test_tasep_origin():
    X, H = tasep_scaling(1000, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert X == 0 and H == pytest.approx(500.0)


def test_lpp_scaling0_diagonal():
    x, y, ell = lpp_scaling0(1024, 1.0, 0.0, 0.0)
    assert (x, y) == (256, 256) and ell == pytest.approx(1024.0)


def test_lpp_scaling0_s_shift():
    _, _, ell = lpp_scaling0(1000, 1.0, 0.0, 1.0)
    assert ell - 1000 == pytest.approx(2 ** (2 / 3) * 10)


@given(st.floats(0.2, 5.0), st.floats(-1.0, 1.0))
def test_scaling1_stays_on_cut(g, tau):
    T = 1e6
    x0, y0, _ = lpp_scaling1(T, 0.5, g, 0.0, 0.0, 0.0)
    x1, y1, _ = lpp_scaling1(T, 0.5, g, tau, 0.0, 0.0)
    assert abs((x1 + y1) - (x0 + y0)) <= 2


@given(st.floats(-0.9, 0.9))
def test_xi_gamma_roundtrip(xi):
    assert xi_from_gamma(gamma_from_xi(xi)) == pytest.approx(xi, abs=1e-12)


@given(st.integers(-50, 50), st.integers(0, 100))
def test_tasep_to_lpp_roundtrip(X, k):
    H = abs(X) + 2 * k
    x, y = tasep_to_lpp(X, H)
    assert x - y == X and x + y == H


def test_characteristic_fan():
    ray = characteristic_project(900, 100, 0.6, 1.0)
    assert ray.P == (225, 225) and ray.Q == (250, 250)
    assert ray.drift == 100 and ray.regime is Regime.FAN


def test_characteristic_boundary():
    ray = characteristic_project(900, 100, 0.25, 1.0)
    assert ray.regime is Regime.BOUNDARY_LEFT
    assert ray.P == (900, 900)
    assert ray.Q == (1000, 900 + math.floor(100 / 9))
    assert ray.drift == pytest.approx(100 / 0.5625)


def test_gaussian_variance_and_boundary_flag():
    fr = gaussian_centering("left", 0.25, 1.0, 1.0, 400)
    assert fr.variance == pytest.approx(128 / 9)
    assert fr.center == pytest.approx(limit_shape_one_sided(0.25, 1.0) * 400)
    assert fr.scale == 20
    b = gaussian_centering("left", 0.5, 1.0, 1.0, 400)
    assert b.at_boundary and b.variance == 0.0
    with pytest.raises(RegimeError):
        gaussian_centering("left", 0.75, 1.0, 1.0, 400)
    bot = gaussian_centering("bottom", 0.25, 1.0, 1.0, 400)
    assert bot.variance == pytest.approx(128 / 9)


def test_frame_standardize_roundtrip():
    fr = ScalingFrame(FrameModel.LPP_CUT, 5000, 1.0, 0.5, [FramePoint(0.0, 0.0, 0.3), FramePoint(0.5, 1.0, -0.2)])
    th = fr.thresholds()
    assert np.allclose(fr.standardize(th), [0.3, -0.2])
    assert fr.lattice_points().shape == (2, 2)


def test_frame_tasep_sign():
    fr = ScalingFrame(FrameModel.TASEP_HEIGHT, 1000, 0.2, 0.0, [FramePoint(0.0, 0.0, 1.0)])
    H = fr.thresholds()
    # the event h >= H(s) is the event standardized <= s
    assert fr.standardize(H)[0] == pytest.approx(1.0)


def test_frame_rejects_bad_arguments():
    with pytest.raises(ValueError):
        ScalingFrame(FrameModel.TASEP_HEIGHT, 10, 1.0)
    with pytest.raises(ValueError):
        ScalingFrame(FrameModel.LPP_CUT, 10, 1.0, nu=1.0)
    with pytest.raises(ValueError):
        ScalingFrame(FrameModel.LPP_CUT, -1, 1.0)
