"""Air-to-ground channel: LoS probability, LoS/NLoS path loss, probabilistic
mean path loss, elevation angle, and the Taylor-linearized altitude gate that
the placement MILP uses to forbid links past the loss budget.

All functions are pure over an immutable Environment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Point3

SPEED_OF_LIGHT = 2.99792458e8


@dataclass(frozen=True)
class Environment:
    """Channel constants.

    a, b are the environment's LoS fit constants; delta_los/delta_nlos the
    mean excess losses (dB) of the two link states; fc the carrier (Hz);
    c the propagation speed (m/s, overridable); pl_max the network's maximum
    allowed path loss (dB).
    """

    a: float = 9.61
    b: float = 0.16
    delta_los: float = 1.0
    delta_nlos: float = 20.0
    fc: float = 2.0e9
    c: float = SPEED_OF_LIGHT
    pl_max: float = 110.0

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("LoS constants a, b must be positive")
        if self.fc <= 0 or self.c <= 0:
            raise ValueError("carrier frequency and propagation speed must be positive")
        if self.pl_max <= 0:
            raise ValueError("pl_max must be positive")

    @property
    def pl_max_linear(self) -> float:
        """Loss budget as a linear power ratio."""
        return 10.0 ** (self.pl_max / 10.0)

    @property
    def fspl_coeff(self) -> float:
        """Free-space quadratic coefficient: linear loss at distance d is coeff * d^2."""
        return (4.0 * math.pi * self.fc / self.c) ** 2


def elevation_angle(fbs: Point3, user: Point3) -> float:
    """Elevation angle in degrees seen from the user toward the FBS, in (0, 90].

    Returns 90 for an FBS directly overhead. The FBS must be strictly above
    the user.
    """
    dz = fbs.z - user.z
    if dz <= 0:
        raise ValueError(f"FBS must be above the user (fbs.z={fbs.z}, user.z={user.z})")
    horiz = fbs.horizontal_distance(user)
    if horiz == 0.0:
        return 90.0
    return math.degrees(math.atan(dz / horiz))


def los_probability(theta: float, env: Environment) -> float:
    """Probability of a line-of-sight link at elevation angle theta (degrees)."""
    if not (0.0 < theta <= 90.0):
        raise ValueError(f"elevation angle must be in (0, 90], got {theta}")
    return 1.0 / (1.0 + env.a * math.exp(-env.b * (theta - env.a)))


def nlos_probability(theta: float, env: Environment) -> float:
    """Exact complement of los_probability."""
    return 1.0 - los_probability(theta, env)


def mean_path_loss(d: float, theta: float, env: Environment) -> float:
    """Probabilistic long-term mean path loss in dB at 3D distance d (meters).

    Free-space term plus the LoS/NLoS excess losses weighted by the
    elevation-dependent LoS probability; strictly increasing in d.
    """
    if d <= 0:
        raise ValueError(f"distance must be > 0, got {d}")
    p_los = los_probability(theta, env)
    free_space = 20.0 * math.log10(4.0 * math.pi * env.fc * d / env.c)
    l_los = free_space + env.delta_los
    l_nlos = free_space + env.delta_nlos
    return l_los * p_los + l_nlos * (1.0 - p_los)


def taylor_gate(d_ij: float, h0: float, env: Environment) -> float:
    """Altitude gate a_ij of the linearized loss budget, in meters.

    First-order expansion of the linear-domain quadratic loss around altitude
    h0 gives a loss cap that is linear in the flying altitude h; serving a
    user at horizontal distance d_ij is only admissible while h stays below
    the returned gate. The LoS/NLoS probability pair sums to one, so it drops
    out of the expansion; the whole computation stays in the linear power
    domain.
    """
    if h0 <= 0:
        raise ValueError(f"expansion altitude must be > 0, got {h0}")
    if d_ij <= 0:
        raise ValueError(f"distance must be > 0, got {d_ij}")
    a_coef = env.fspl_coeff
    return (env.pl_max_linear - a_coef * (d_ij ** 2 - h0 ** 2)) / (2.0 * a_coef * h0)
