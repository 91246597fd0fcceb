import math

import numpy as np
import pytest

from fbsim.geometry import Point3
from fbsim.scenario import (
    MobilityMix,
    Region,
    mean_speed,
    snapshot_interval,
    spawn_users,
    step_random_waypoint,
)

REGION = Region(5000.0, 5000.0)
MIX = MobilityMix(50, 30, 20, v_pedestrian=1.0, v_vehicular=10.0)


def test_mix_validation():
    with pytest.raises(ValueError):
        MobilityMix(50, 30, 30)
    with pytest.raises(ValueError):
        MobilityMix(50, 30, 20, v_pedestrian=-1)


def test_mean_speed_all_stationary():
    assert mean_speed(MobilityMix(100, 0, 0)) == 0.0


def test_mean_speed_weighted():
    # (0 + 30*1 + 20*10) / 100
    assert mean_speed(MIX) == pytest.approx(2.3, abs=1e-12)


def test_mean_speed_single_class():
    assert mean_speed(MobilityMix(0, 100, 0, v_pedestrian=1.0)) == pytest.approx(1.0)


def test_snapshot_interval():
    assert snapshot_interval(110.0, MIX) == pytest.approx(47.826086956521739, rel=1e-12)
    fast = MobilityMix(0, 0, 100, v_vehicular=15.0)
    assert snapshot_interval(225.0, fast) == pytest.approx(15.0, rel=1e-12)


def test_snapshot_interval_all_stationary_errors():
    with pytest.raises(ValueError):
        snapshot_interval(110.0, MobilityMix(100, 0, 0))


def test_spawn_inside_region_and_count():
    users = spawn_users(REGION, 80, MIX, seed=1)
    assert len(users) == 80
    assert all(REGION.contains(u.pos.x, u.pos.y) for u in users)
    assert all(0 <= u.pos.z <= 150.0 for u in users)


def test_spawn_rejects_bad_count():
    with pytest.raises(ValueError):
        spawn_users(REGION, 0, MIX, seed=1)


def test_spawn_deterministic():
    a = spawn_users(REGION, 50, MIX, seed=9)
    b = spawn_users(REGION, 50, MIX, seed=9)
    assert a == b
    c = spawn_users(REGION, 50, MIX, seed=10)
    assert a != c


def test_spawn_demand_statistics():
    # Uniform(0, 6]: mean 3.0 within 0.05 over 1e5 draws
    users = spawn_users(REGION, 100_000, MIX, seed=3, d_max=6.0)
    demands = np.array([u.demand for u in users])
    assert demands.mean() == pytest.approx(3.0, abs=0.05)
    assert demands.min() > 0.0
    assert demands.max() <= 6.0


def test_spawn_class_split():
    users = spawn_users(REGION, 80, MIX, seed=4)
    counts = {"stationary": 0, "pedestrian": 0, "vehicular": 0}
    for u in users:
        counts[u.mobility_class] += 1
    assert counts == {"stationary": 40, "pedestrian": 24, "vehicular": 16}


def test_step_stationary_unchanged():
    users = spawn_users(REGION, 30, MobilityMix(100, 0, 0), seed=5)
    stepped = step_random_waypoint(users, REGION, 15.0, seed=6, mix=MobilityMix(100, 0, 0))
    assert stepped == users


def test_step_straight_line_kinematics():
    from fbsim.scenario import User

    u = User(id=0, pos=Point3(0, 0, 0), demand=1.0, mobility_class="pedestrian",
             waypoint=Point3(100, 0, 0))
    mix = MobilityMix(0, 100, 0, v_pedestrian=1.0)
    out = step_random_waypoint([u], REGION, 15.0, seed=0, mix=mix)[0]
    assert out.pos.x == pytest.approx(15.0, abs=1e-9)
    assert out.pos.y == 0.0 and out.pos.z == 0.0


def test_step_speed_bound_and_region_containment():
    mix = MIX
    users = spawn_users(REGION, 200, mix, seed=7)
    rng = np.random.default_rng(8)
    for step in range(50):
        dt = float(rng.uniform(1.0, 60.0))
        moved = step_random_waypoint(users, REGION, dt, seed=step, mix=mix)
        for old, new in zip(users, moved):
            v = mix.speed_of(old.mobility_class)
            d = math.hypot(new.pos.x - old.pos.x, new.pos.y - old.pos.y)
            assert d <= v * dt + 1e-6
            assert new.pos.z == old.pos.z
            assert REGION.contains(new.pos.x, new.pos.y)
        users = moved


def test_step_demands_fixed():
    users = spawn_users(REGION, 40, MIX, seed=11)
    moved = step_random_waypoint(users, REGION, 30.0, seed=12, mix=MIX)
    assert [u.demand for u in users] == [u.demand for u in moved]
