"""Flying-base-station fleet simulator: per-snapshot 3D placement (exact MILP),
obstacle-avoiding routing, minimum-energy trajectory assignment, and
battery-aware fleet-set management over discrete snapshots.
"""

__version__ = "0.1.0"

from .geometry import BoxObstacle, Point3, discretize_edges, distance3, segment_intersects_box
from .channel import Environment, elevation_angle, los_probability, mean_path_loss, taylor_gate

__all__ = [
    "Point3",
    "BoxObstacle",
    "distance3",
    "segment_intersects_box",
    "discretize_edges",
    "Environment",
    "elevation_angle",
    "los_probability",
    "mean_path_loss",
    "taylor_gate",
    "__version__",
]
