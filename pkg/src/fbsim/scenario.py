"""World generation and user dynamics: seeded user spawning at mixed
altitudes, uniform demand sampling, random-waypoint motion, and the
snapshot-interval computation.

Scenario values are immutable; stepping users produces a new list, so
independent replications can run in parallel with independent seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import BoxObstacle, Point3


@dataclass(frozen=True)
class Region:
    """Axis-aligned ground rectangle [0, width] x [0, height]."""

    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("region sides must be positive")

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)


STATIONARY = "stationary"
PEDESTRIAN = "pedestrian"
VEHICULAR = "vehicular"


@dataclass(frozen=True)
class MobilityMix:
    """Population split in percent plus per-class speeds (stationary moves at 0)."""

    alpha_pct: float = 50.0
    beta_pct: float = 30.0
    gamma_pct: float = 20.0
    v_pedestrian: float = 1.0
    v_vehicular: float = 10.0

    def __post_init__(self):
        total = self.alpha_pct + self.beta_pct + self.gamma_pct
        if abs(total - 100.0) > 1e-9:
            raise ValueError(f"class percentages must sum to 100, got {total}")
        if min(self.alpha_pct, self.beta_pct, self.gamma_pct) < 0:
            raise ValueError("class percentages must be non-negative")
        if self.v_pedestrian < 0 or self.v_vehicular < 0:
            raise ValueError("speeds must be non-negative")

    def speed_of(self, mobility_class: str) -> float:
        return {
            STATIONARY: 0.0,
            PEDESTRIAN: self.v_pedestrian,
            VEHICULAR: self.v_vehicular,
        }[mobility_class]


@dataclass(frozen=True)
class User:
    id: int
    pos: Point3
    demand: float
    mobility_class: str
    waypoint: Point3 | None = None


@dataclass(frozen=True)
class FleetParams:
    """Fleet-wide placement and flight parameters."""

    psi_fbs: int = 40              # per-FBS channel count
    backhaul_mbps: float = 100.0
    h_min: float = 110.0
    h_max: float = 600.0
    theta_deg: float = 45.0        # coverage-cone elevation angle
    v_fbs: float = 15.0
    safety_radius: float = 5.0
    candidate_spacing: float = 110.0  # desk-scale runs usually override
    taylor_h0: float | None = None    # default: mid altitude band

    def __post_init__(self):
        if not (0 < self.h_min < self.h_max):
            raise ValueError("need 0 < h_min < h_max")
        if not (0 < self.theta_deg <= 90):
            raise ValueError("theta_deg must be in (0, 90]")
        if self.v_fbs <= 0:
            raise ValueError("v_fbs must be positive")

    @property
    def h0(self) -> float:
        return self.taylor_h0 if self.taylor_h0 is not None else 0.5 * (self.h_min + self.h_max)

    @property
    def cot_theta(self) -> float:
        return 1.0 / math.tan(math.radians(self.theta_deg))

    @property
    def r_min(self) -> float:
        """Coverage radius at the altitude floor; drives the snapshot interval."""
        return self.h_min * self.cot_theta


def mean_speed(mix: MobilityMix) -> float:
    """Population-weighted mean speed (stationary class contributes zero)."""
    return (
        mix.beta_pct * mix.v_pedestrian + mix.gamma_pct * mix.v_vehicular
    ) / 100.0


def snapshot_interval(r_min: float, mix: MobilityMix) -> float:
    """Seconds until an average user may leave the minimum coverage range."""
    gamma = mean_speed(mix)
    if gamma <= 0:
        raise ValueError(
            "snapshot interval undefined for an all-stationary population; "
            "pin the interval in the run config instead"
        )
    return r_min / gamma


def _class_counts(count: int, mix: MobilityMix) -> tuple[int, int, int]:
    """Largest-remainder split of `count` into the three classes."""
    raw = np.array([mix.alpha_pct, mix.beta_pct, mix.gamma_pct]) * count / 100.0
    base = np.floor(raw).astype(int)
    rem = count - int(base.sum())
    order = np.argsort(-(raw - base), kind="stable")
    for k in range(rem):
        base[order[k]] += 1
    return int(base[0]), int(base[1]), int(base[2])


def spawn_users(
    region: Region,
    count: int,
    mix: MobilityMix,
    seed: int,
    rooftop_fraction: float = 0.2,
    bh_max: float = 150.0,
    d_max: float = 6.0,
) -> list[User]:
    """Spawn `count` users uniformly i.i.d. in the region.

    A seeded fraction sits at rooftop altitudes uniform in [0, bh_max]; the
    rest are at ground level. Demands are uniform in (0, d_max]. Demands are
    fixed for the whole episode at spawn time.
    """
    if count <= 0:
        raise ValueError(f"count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, region.width, count)
    ys = rng.uniform(0.0, region.height, count)
    # half-open uniform flipped onto (0, d_max]
    demands = d_max * (1.0 - rng.random(count))
    n_roof = int(round(rooftop_fraction * count))
    roof_idx = set(rng.permutation(count)[:n_roof].tolist())
    zs = np.where([i in roof_idx for i in range(count)], rng.uniform(0.0, bh_max, count), 0.0)

    n_s, n_p, n_v = _class_counts(count, mix)
    classes = [STATIONARY] * n_s + [PEDESTRIAN] * n_p + [VEHICULAR] * n_v

    users = []
    for i in range(count):
        wp = None
        if classes[i] != STATIONARY:
            wp = Point3(rng.uniform(0, region.width), rng.uniform(0, region.height), zs[i])
        users.append(
            User(
                id=i,
                pos=Point3(float(xs[i]), float(ys[i]), float(zs[i])),
                demand=float(demands[i]),
                mobility_class=classes[i],
                waypoint=wp,
            )
        )
    return users


def step_random_waypoint(
    users: list[User], region: Region, dt: float, seed: int, mix: MobilityMix
) -> list[User]:
    """Advance each mobile user toward its waypoint for dt seconds.

    On arrival a fresh uniform waypoint is drawn (same altitude); leftover
    travel time within dt carries into the new leg. Positions stay inside the
    region and altitudes never change during motion.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    rng = np.random.default_rng(seed)
    out: list[User] = []
    for u in users:
        v = mix.speed_of(u.mobility_class)
        if v == 0.0 or u.waypoint is None:
            out.append(u)
            continue
        px, py = u.pos.x, u.pos.y
        wx, wy = u.waypoint.x, u.waypoint.y
        budget = v * dt
        for _ in range(64):  # plenty: each leg is at least a fresh draw away
            leg = math.hypot(wx - px, wy - py)
            if leg > budget:
                px += (wx - px) * budget / leg
                py += (wy - py) * budget / leg
                budget = 0.0
                break
            px, py = wx, wy
            budget -= leg
            wx = rng.uniform(0, region.width)
            wy = rng.uniform(0, region.height)
            if budget <= 0:
                break
        out.append(
            replace(u, pos=Point3(px, py, u.pos.z), waypoint=Point3(wx, wy, u.pos.z))
        )
    return out


@dataclass(frozen=True)
class Scenario:
    """Immutable world description: geometry, channel, fleet, and population."""

    region: Region
    obstacles: tuple[BoxObstacle, ...]
    base: Point3
    env: "Environment"  # fbsim.channel.Environment
    fleet: FleetParams
    mix: MobilityMix
    user_count: int = 80
    rooftop_fraction: float = 0.2
    bh_min: float = 30.0
    bh_max: float = 150.0
    d_max_mbps: float = 6.0
    edge_spacing: float = 10.0

    def __post_init__(self):
        for box in self.obstacles:
            if not (self.bh_min <= box.height <= self.bh_max):
                raise ValueError(
                    f"obstacle {box.id} height {box.height} outside [{self.bh_min}, {self.bh_max}]"
                )
            if not (
                self.region.contains(box.min_corner.x, box.min_corner.y)
                and self.region.contains(box.max_corner.x, box.max_corner.y)
            ):
                raise ValueError(f"obstacle {box.id} leaves the region")


def generate_obstacles(
    region: Region,
    count: int,
    seed: int,
    bh_min: float = 30.0,
    bh_max: float = 150.0,
    footprint_min: float = 20.0,
    footprint_max: float = 60.0,
    base: Point3 | None = None,
    base_margin: float = 300.0,
) -> tuple[BoxObstacle, ...]:
    """Non-overlapping random building boxes, kept clear of the base corner."""
    rng = np.random.default_rng(seed)
    boxes: list[BoxObstacle] = []
    attempts = 0
    while len(boxes) < count and attempts < 200 * max(count, 1):
        attempts += 1
        w = rng.uniform(footprint_min, footprint_max)
        d = rng.uniform(footprint_min, footprint_max)
        h = rng.uniform(bh_min, bh_max)
        x = rng.uniform(0, region.width - w)
        y = rng.uniform(0, region.height - d)
        if base is not None and math.hypot(x + w / 2 - base.x, y + d / 2 - base.y) < base_margin:
            continue
        clash = any(
            not (x + w < b.min_corner.x - 1 or b.max_corner.x + 1 < x
                 or y + d < b.min_corner.y - 1 or b.max_corner.y + 1 < y)
            for b in boxes
        )
        if clash:
            continue
        boxes.append(BoxObstacle(Point3(x, y, 0.0), Point3(x + w, y + d, h), id=f"b{len(boxes)}"))
    if len(boxes) < count:
        raise ValueError(f"could not place {count} non-overlapping obstacles")
    return tuple(boxes)
