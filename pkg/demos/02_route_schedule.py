"""Route schedule: how often the shortest ISL path changes and by how much."""
from leoreorder import compute_route_schedule, preset

DURATION_S = 1000.0

for name in ("baseline", "nine-planes", "aalborg-capetown"):
    sched = compute_route_schedule(preset(name), DURATION_S)
    changes = sched.route_change_times
    print(f"{name}: {len(changes)} route changes in {DURATION_S:.0f} s, "
          f"propagation spread {sched.propagation_spread_s() * 1e3:.2f} ms")

# the first few epochs of the baseline, with the one-way delay and hop count
sched = compute_route_schedule(preset("baseline"), DURATION_S)
for start, route in sched.epochs[:8]:
    print(f"  t={start:6.1f} s  {route.total_propagation_s * 1e3:6.2f} ms  {len(route.hops())} hops")
