"""Gradient-like flows, shooting and containment diagnostics."""
from .containment import (CeramiReport, band_prefix, cerami_monitor, cerami_quantity, containment_report,
                          estimate_epsilon, gronwall_radius)
from .field import CriticalNeighborhood, FlowField, cinf, gradient_like_field, smoothstep
from .integrate import Trajectory, integrate, write_csv
from .shooting import OrbitCount, SphereShot, connecting_orbit_count, shoot_unstable_sphere, unstable_frame

__all__ = [
    "CeramiReport", "band_prefix", "cerami_monitor", "cerami_quantity", "containment_report",
    "estimate_epsilon", "gronwall_radius", "CriticalNeighborhood", "FlowField", "cinf",
    "gradient_like_field", "smoothstep", "Trajectory", "integrate", "write_csv", "OrbitCount",
    "connecting_orbit_count", "unstable_frame", "SphereShot", "shoot_unstable_sphere",
]
