"""A route change reorders packets in flight and can trigger spurious fast recovery."""
from dataclasses import replace

from leoreorder import preset, simulate

# 100 s starting at constellation time 420 s, with route changes at 75 s and 90 s
cfg = replace(preset("baseline"), cc_name="reno", duration_s=100.0, start_offset_s=420.0)
res = simulate(cfg)
print(res.one_line())

for c in res.schedule.route_change_times:
    near = lambda times: [t for t in times if c <= t < c + 2.0]
    print(f"route change at {c:.0f} s: {len(near(res.reorder_times))} reordered deliveries, "
          f"{len(near(res.fast_recovery_times))} fast recoveries, "
          f"{len(near(res.duplicate_times))} duplicate segments within 2 s")

r = res.reorder
print(f"reordered {r.reordered_count}, max extent {r.max_reorder_extent_pkts}, spurious retx {r.spurious_retx_count}")
