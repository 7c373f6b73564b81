"""Constellation geometry: orbit period, speed and where the satellites are."""
import numpy as np

from leoreorder import ConstellationConfig, preset
from leoreorder.geometry import orbital_period, orbital_speed, satellite_positions

cfg = ConstellationConfig(altitude_km=1200.0)
print(f"{cfg.num_planes} planes x {cfg.sats_per_plane} satellites at {cfg.altitude_km:.0f} km")
print(f"period {orbital_period(cfg):.1f} s, speed {orbital_speed(cfg):.2f} km/s")

# all satellites sit on one sphere; after one period they are back where they started
pos = satellite_positions(cfg, 0.0)
radii = np.linalg.norm(pos.reshape(-1, 3), axis=1)
print(f"radius spread {radii.max() - radii.min():.2e} km")
back = satellite_positions(cfg, orbital_period(cfg))
print(f"max drift after one period {np.abs(back - pos).max():.2e} km")

for name in ("baseline", "nine-planes", "aalborg-capetown"):
    p = preset(name)
    print(f"{name}: {p.gs_src.name} -> {p.gs_dst.name}, {p.constellation.num_planes} planes")
