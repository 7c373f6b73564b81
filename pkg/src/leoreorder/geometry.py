"""Circular-orbit Walker constellation geometry.

Positions are in an Earth-centered inertial frame (kilometers) that coincides
with the Earth-fixed frame at t = 0. Earth is a sphere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

MU_EARTH = 398600.4418  # km^3 / s^2
R_EARTH = 6371.0  # km
OMEGA_EARTH = 7.2921159e-5  # rad / s
SPEED_OF_LIGHT = 299792.458  # km / s
SIDEREAL_DAY = 2 * math.pi / OMEGA_EARTH


@dataclass(frozen=True)
class ConstellationConfig:
    """Walker-star constellation parameters.

    ``raan_spread_deg`` is the total span of ascending nodes over all planes
    (180 for a star pattern, 360 for a delta pattern). ``static`` freezes the
    geometry at its t = 0 configuration.
    """

    num_planes: int = 18
    sats_per_plane: int = 36
    altitude_km: float = 1200.0
    inclination_deg: float = 86.4
    raan_spread_deg: float = 180.0
    phase_offset_frac: float = 0.0
    static: bool = False

    def __post_init__(self):
        if self.num_planes < 1:
            raise ValueError("num_planes must be >= 1")
        if self.sats_per_plane < 3:
            raise ValueError("sats_per_plane must be >= 3")
        if not self.altitude_km > 0:
            raise ValueError("altitude_km must be positive")
        if not 0 < self.inclination_deg <= 90:
            raise ValueError("inclination_deg must be in (0, 90]")
        if not 0 <= self.phase_offset_frac < 1:
            raise ValueError("phase_offset_frac must be in [0, 1)")

    @property
    def semi_major_axis_km(self) -> float:
        return R_EARTH + self.altitude_km

    @property
    def num_satellites(self) -> int:
        return self.num_planes * self.sats_per_plane


class SatelliteId(NamedTuple):
    """Satellite address; tuple ordering is plane-major."""

    plane: int
    slot: int

    def __str__(self):
        return f"S{self.plane}.{self.slot}"

    @classmethod
    def parse(cls, text: str) -> "SatelliteId":
        if not text.startswith("S"):
            raise ValueError(f"not a satellite label: {text!r}")
        plane, slot = text[1:].split(".")
        return cls(int(plane), int(slot))


@dataclass(frozen=True)
class GeoCoordinate:
    latitude_deg: float
    longitude_deg: float
    altitude_km: float = 0.0

    def __post_init__(self):
        if not -90 <= self.latitude_deg <= 90:
            raise ValueError("latitude out of range")
        if not -180 <= self.longitude_deg <= 180:
            raise ValueError("longitude out of range")


def orbital_period(cfg: ConstellationConfig) -> float:
    """Kepler period in seconds for the constellation's circular orbit."""
    a = cfg.semi_major_axis_km
    return 2 * math.pi * math.sqrt(a**3 / MU_EARTH)


def orbital_speed(cfg: ConstellationConfig) -> float:
    """Circular orbital speed in km/s."""
    return math.sqrt(MU_EARTH / cfg.semi_major_axis_km)


def altitude_for_period(period_s: float) -> float:
    """Inverse of :func:`orbital_period`: altitude (km) with the given period."""
    a = (MU_EARTH * (period_s / (2 * math.pi)) ** 2) ** (1.0 / 3.0)
    return a - R_EARTH


def _geometry_time(cfg: ConstellationConfig, t: float) -> float:
    return 0.0 if cfg.static else t


def satellite_positions(cfg: ConstellationConfig, t: float) -> np.ndarray:
    """Positions of every satellite at time ``t``, shape (P, Q, 3)."""
    t = _geometry_time(cfg, t)
    P, Q = cfg.num_planes, cfg.sats_per_plane
    a = cfg.semi_major_axis_km
    inc = math.radians(cfg.inclination_deg)
    raan = np.radians(np.arange(P) * cfg.raan_spread_deg / P)[:, None]
    slots = np.arange(Q)[None, :]
    planes = np.arange(P)[:, None]
    u = 2 * np.pi * (slots / Q + cfg.phase_offset_frac * planes / Q) + 2 * np.pi * t / orbital_period(cfg)
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(raan), np.sin(raan)
    out = np.empty((P, Q, 3))
    out[..., 0] = a * (co * cu - so * su * math.cos(inc))
    out[..., 1] = a * (so * cu + co * su * math.cos(inc))
    out[..., 2] = a * su * math.sin(inc)
    return out


def satellite_position(cfg: ConstellationConfig, sat: SatelliteId, t: float) -> np.ndarray:
    """Position (km, inertial) of one satellite at time ``t``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    plane, slot = sat
    if not (0 <= plane < cfg.num_planes and 0 <= slot < cfg.sats_per_plane):
        raise ValueError(f"{sat} outside constellation")
    t = _geometry_time(cfg, t)
    a = cfg.semi_major_axis_km
    inc = math.radians(cfg.inclination_deg)
    raan = math.radians(plane * cfg.raan_spread_deg / cfg.num_planes)
    q = cfg.sats_per_plane
    u = 2 * math.pi * (slot / q + cfg.phase_offset_frac * plane / q) + 2 * math.pi * t / orbital_period(cfg)
    cu, su = math.cos(u), math.sin(u)
    co, so = math.cos(raan), math.sin(raan)
    return np.array([
        a * (co * cu - so * su * math.cos(inc)),
        a * (so * cu + co * su * math.cos(inc)),
        a * su * math.sin(inc),
    ])


def ground_position(geo: GeoCoordinate, t: float, static: bool = False) -> np.ndarray:
    """Inertial position of an Earth-fixed point, rotating at ``OMEGA_EARTH``."""
    lat = math.radians(geo.latitude_deg)
    lon = math.radians(geo.longitude_deg) + (0.0 if static else OMEGA_EARTH * t)
    r = R_EARTH + geo.altitude_km
    return np.array([r * math.cos(lat) * math.cos(lon), r * math.cos(lat) * math.sin(lon), r * math.sin(lat)])


def euclidean_distance(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def elevation_angle(gs, sat) -> float:
    """Elevation (degrees) of ``sat`` above the local horizontal plane at ``gs``."""
    gs = np.asarray(gs, dtype=float)
    los = np.asarray(sat, dtype=float) - gs
    norm = np.linalg.norm(los)
    if norm == 0:
        return 90.0
    up = gs / np.linalg.norm(gs)
    s = float(np.dot(los, up) / norm)
    return math.degrees(math.asin(max(-1.0, min(1.0, s))))


def elevation_angles(gs, positions: np.ndarray) -> np.ndarray:
    """Vectorized :func:`elevation_angle` over an (..., 3) array of satellites."""
    gs = np.asarray(gs, dtype=float)
    los = positions - gs
    up = gs / np.linalg.norm(gs)
    s = (los @ up) / np.linalg.norm(los, axis=-1)
    return np.degrees(np.arcsin(np.clip(s, -1.0, 1.0)))
