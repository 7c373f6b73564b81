"""Cubic across geometries: fewer planes mean longer detours and more reordering."""
import sys
from dataclasses import replace

import numpy as np

from leoreorder import ccdf, preset, simulate

duration = float(sys.argv[1]) if len(sys.argv) > 1 else 120.0

for name in ("aalborg-capetown", "baseline", "nine-planes"):
    res = simulate(replace(preset(name), cc_name="cubic", duration_s=duration))
    s = res.summary
    x, p = ccdf(res.series["goodput_bps"])
    # fraction of bins whose goodput is at or above 90 Mbps
    above = float(p[np.searchsorted(x, 90e6)]) if x[-1] >= 90e6 else 0.0
    print(f"{name:17s} route changes {s['route_changes']:3d}  "
          f"low bins {s['low_goodput_fraction'] * 100:5.2f}%  bins >= 90 Mbps {above * 100:5.1f}%")
