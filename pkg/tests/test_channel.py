import math

import numpy as np
import pytest

from fbsim.channel import (
    Environment,
    elevation_angle,
    los_probability,
    mean_path_loss,
    nlos_probability,
    taylor_gate,
)
from fbsim.geometry import Point3

# Paper-profile constants: urban fit, 2 GHz, 110 dB budget, c = 3e8.
ENV = Environment(a=9.61, b=0.16, delta_los=1.0, delta_nlos=20.0, fc=2.0e9, c=3.0e8, pl_max=110.0)


def test_elevation_overhead_is_90():
    assert elevation_angle(Point3(0, 0, 100), Point3(0, 0, 0)) == 90.0


def test_elevation_equal_legs_is_45():
    assert elevation_angle(Point3(100, 0, 100), Point3(0, 0, 0)) == pytest.approx(45.0, abs=1e-12)


def test_elevation_30_degrees():
    # frozen: atan(100/173.205) = 30.000011567576129 deg
    got = elevation_angle(Point3(173.205, 0, 100), Point3(0, 0, 0))
    assert got == pytest.approx(30.000011567576129, abs=1e-9)


def test_elevation_rejects_fbs_not_above():
    with pytest.raises(ValueError):
        elevation_angle(Point3(0, 0, 50), Point3(10, 0, 50))
    with pytest.raises(ValueError):
        elevation_angle(Point3(0, 0, 10), Point3(0, 0, 20))


def test_los_probability_at_theta_equal_a():
    # Exponent vanishes: 1 / (1 + 9.61)
    assert los_probability(9.61, ENV) == pytest.approx(0.094250706880301602, rel=1e-12)


def test_los_probability_at_zenith():
    assert los_probability(90.0, ENV) == pytest.approx(0.99997507453790302, rel=1e-12)


def test_los_plus_nlos_is_exactly_one():
    for theta in np.linspace(1e-6, 90.0, 500):
        assert los_probability(theta, ENV) + nlos_probability(theta, ENV) == 1.0


def test_los_probability_domain():
    with pytest.raises(ValueError):
        los_probability(0.0, ENV)
    with pytest.raises(ValueError):
        los_probability(90.0001, ENV)


def test_los_probability_strictly_increasing():
    thetas = np.linspace(0.5, 90.0, 400)
    vals = [los_probability(t, ENV) for t in thetas]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_path_loss_los_and_nlos_frozen():
    # frozen: 20 log10(4 pi * 2e9 * 1000 / 3e8) + 1 = 99.4623720993283
    free_space = 20.0 * math.log10(4 * math.pi * ENV.fc * 1000.0 / ENV.c)
    assert free_space + ENV.delta_los == pytest.approx(99.4623720993283, abs=1e-9)
    assert free_space + ENV.delta_nlos == pytest.approx(118.4623720993283, abs=1e-9)


def test_mean_path_loss_near_los_at_zenith():
    # frozen independent evaluation at d=1000, theta=90
    got = mean_path_loss(1000.0, 90.0, ENV)
    assert got == pytest.approx(99.462845683108143, abs=1e-9)
    # within 0.001 dB of the pure-LoS loss
    assert abs(got - 99.4623720993283) < 1e-3


def test_mean_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        mean_path_loss(0.0, 45.0, ENV)


def test_mean_path_loss_increasing_in_distance():
    rng = np.random.default_rng(17)
    d = np.sort(rng.uniform(1.0, 5000.0, 10_000))
    theta = rng.uniform(1.0, 90.0)
    vals = [mean_path_loss(x, theta, ENV) for x in d]
    diffs = np.diff(vals)
    assert np.all(diffs[np.diff(d) > 0] > 0)


def test_mean_path_loss_nonincreasing_in_theta():
    # Higher elevation shifts weight toward the smaller LoS loss.
    rng = np.random.default_rng(23)
    for _ in range(200):
        d = rng.uniform(10, 4000)
        t1, t2 = sorted(rng.uniform(1, 90, 2))
        assert mean_path_loss(d, t2, ENV) <= mean_path_loss(d, t1, ENV) + 1e-12


def test_taylor_gate_probability_sum_collapses():
    # Gate is (PL_lin - A (d^2 - h0^2)) / (2 A h0): frozen independent value.
    assert taylor_gate(500.0, 355.0, ENV) == pytest.approx(19893.403450286971, rel=1e-12)


def test_taylor_gate_quadratic_term_vanishes_at_d_equal_h0():
    a_coef = ENV.fspl_coeff
    expect = ENV.pl_max_linear / (2 * a_coef * 355.0)
    assert taylor_gate(355.0, 355.0, ENV) == pytest.approx(expect, rel=1e-14)
    assert expect == pytest.approx(20068.016126343309, rel=1e-12)


def test_taylor_gate_rejects_bad_inputs():
    with pytest.raises(ValueError):
        taylor_gate(100.0, 0.0, ENV)
    with pytest.raises(ValueError):
        taylor_gate(0.0, 355.0, ENV)


def test_environment_validation():
    with pytest.raises(ValueError):
        Environment(a=0)
    with pytest.raises(ValueError):
        Environment(pl_max=-1)


def test_default_environment_uses_physical_light_speed():
    assert Environment().c == pytest.approx(2.99792458e8)
