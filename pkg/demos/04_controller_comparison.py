"""Reno, Cubic and BBR on the same path: goodput, delay and retransmissions."""
import sys
from dataclasses import replace

from leoreorder import preset, simulate

# pass a duration in seconds; longer runs cover more route changes
duration = float(sys.argv[1]) if len(sys.argv) > 1 else 120.0

for cc in ("reno", "cubic", "bbr"):
    res = simulate(replace(preset("baseline"), cc_name=cc, duration_s=duration))
    s = res.summary
    print(f"{cc:5s} goodput p50 {s['goodput_median_bps'] / 1e6:6.2f} Mbps  "
          f"srtt p50 {s['srtt_p50_s'] * 1e3:6.1f} ms  "
          f"low bins {s['low_goodput_fraction'] * 100:5.2f}%  "
          f"retx {s['retransmissions']} ({s['spurious_retx_count']} spurious)")
