"""One simulation run: route schedule, packet pipeline, transport and metrics."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import metrics
from .events import EventQueue
from .netem import Network
from .scenario import ScenarioConfig
from .topology import RouteSchedule, compute_route_schedule, write_route_schedule
from .transport import TcpReceiver, TcpSender, make_controller

FLOW_ID = "flow0"
OUTPUT_FILES = ("goodput.csv", "rtt.csv", "cwnd.csv", "events.csv", "summary.json", "routes.jsonl")


@dataclass
class RunResult:
    config: ScenarioConfig
    schedule: RouteSchedule
    series: dict
    events: list
    summary: dict
    reorder: metrics.ReorderStats
    reorder_times: list = field(default_factory=list)
    duplicate_times: list = field(default_factory=list)
    fast_recovery_times: list = field(default_factory=list)
    packet_trace: list | None = None

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        metrics.write_series(out, self.series)
        metrics.write_events(out / "events.csv", self.events)
        metrics.write_summary(out / "summary.json", self.summary)
        write_route_schedule(self.schedule, out / "routes.jsonl")
        if self.packet_trace is not None:
            metrics.write_packet_trace(out / "packets.csv", self.packet_trace)
        return out

    def one_line(self):
        s = self.summary
        return (f"{self.config.name} {self.config.cc_name}: median goodput "
                f"{s['goodput_median_bps'] / 1e6:.1f} Mbps, median srtt "
                f"{(s['srtt_p50_s'] or 0) * 1e3:.1f} ms, {s['retransmissions']} retx "
                f"({s['spurious_retx_count']} spurious), {s['route_changes']} route changes")


def simulate(cfg: ScenarioConfig, schedule: RouteSchedule | None = None, **cc_kwargs) -> RunResult:
    """Run ``cfg`` to completion and collect every output in memory."""
    if schedule is None:
        schedule = compute_route_schedule(cfg, cfg.duration_s)
    sim = EventQueue()
    net = Network(sim, schedule, rate_bps=cfg.rate_bps, queue_capacity_pkts=cfg.queue_capacity_pkts,
                  trace=cfg.packet_trace)
    log = []
    cc = make_controller(cfg.cc_name, **cc_kwargs)
    sender = TcpSender(sim, net, cc, flow_id=FLOW_ID, log=log)
    receiver = TcpReceiver(net, flow_id=FLOW_ID)
    net.attach(FLOW_ID, sender, receiver)
    detector = metrics.ReorderDetector()
    duplicate_times = []

    def on_delivery(rec):
        detector.observe(rec.ordinal, rec.arrival_time_s)
        if rec.seq < receiver.rcv_next or rec.seq in receiver.out_of_order:
            duplicate_times.append(rec.arrival_time_s)

    net.observers.append(on_delivery)
    net.drop_observers.append(lambda pkt, t: log.append((t, "drop", f"seq={pkt.seq} epoch={pkt.epoch}")))
    sampler = metrics.Sampler(sim, sender, receiver, cfg.bin_s, cfg.duration_s)
    sim.schedule(0.0, lambda _: sender.start())
    sim.run_until(cfg.duration_s)

    series = sampler.series()
    changes = schedule.route_change_times
    routes = schedule.routes
    starts = schedule.starts
    route_events = []
    for i in range(1, len(starts)):
        if starts[i] in changes:
            route_events.append((starts[i], "route-change",
                                 f"epoch={i} hops={len(routes[i].nodes) - 1} "
                                 f"delay_ms={routes[i].total_propagation_s * 1e3:.3f}"))
    events = metrics.sort_events(route_events + log)
    injected, delivered, dropped, in_flight = net.conservation(FLOW_ID)
    reorder = detector.stats(receiver.duplicates)
    extra = {
        "scenario": cfg.name,
        "cc": cfg.cc_name,
        "seed": cfg.seed,
        "duration_s": cfg.duration_s,
        "bin_s": cfg.bin_s,
        "rto_count": sender.rto_count,
        "fast_retransmits": sender.fast_retransmits,
        "drops": dropped,
        "packets_injected": injected,
        "packets_delivered": delivered,
        "packets_in_flight": in_flight,
        "delivered_bytes": receiver.rcv_next,
        "propagation_spread_s": schedule.propagation_spread_s(),
        "route_epochs": len(starts),
        "events_processed": sim.processed,
    }
    summary = metrics.summarize_run(series, rate_bps=cfg.rate_bps, retransmissions=sender.retransmissions,
                                    reorder=reorder, route_changes=len(changes), extra=extra)
    fr_times = [t for t, kind, detail in log if kind == "phase-change" and detail.endswith("->fast-recovery")]
    return RunResult(cfg, schedule, series, events, summary, reorder, detector.reorder_times,
                     duplicate_times, fr_times, net.trace)


def run(cfg: ScenarioConfig, out_dir) -> RunResult:
    """Simulate ``cfg`` and write all outputs to ``out_dir``."""
    res = simulate(cfg)
    res.write(out_dir)
    return res
