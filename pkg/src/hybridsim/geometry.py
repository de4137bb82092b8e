"""Point geometry shared by the channel models."""

from __future__ import annotations

import math
from dataclasses import dataclass

Point = tuple[float, float, float]


@dataclass(frozen=True)
class LinkGeometry:
    distance: float    # [m]
    irradiance: float  # angle off the AP's downward normal [rad]
    incidence: float   # angle off the receiver's upward normal [rad]


def link_geometry(ap_pos: Point, ue_pos: Point) -> LinkGeometry:
    """Distance and angles for a ceiling-down AP and a ceiling-facing detector.

    Both normals are vertical, so irradiance and incidence coincide.
    """
    dx, dy, dz = (a - u for a, u in zip(ap_pos, ue_pos))
    d = math.sqrt(dx * dx + dy * dy + dz * dz)
    if d == 0.0:
        raise ValueError("AP and UE positions coincide")
    # dz > 0 when the AP is above the receiver
    cos_angle = max(-1.0, min(1.0, dz / d))
    angle = math.acos(cos_angle)
    return LinkGeometry(distance=d, irradiance=angle, incidence=angle)
