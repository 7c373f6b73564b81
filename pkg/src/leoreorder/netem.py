"""Packet pipeline over a route schedule.

Satellite-to-satellite hops are drop-tail FIFO links with serialization at
``rate_bps``; hops touching a ground station only add propagation delay. A
packet is pinned to the route epoch active when it is injected and never
migrates, so packets sent just before a route change keep using the old path
and its queues while later ones take the new path.

Links are modelled by the time their transmitter becomes free. When no packet
of another epoch can share a link with the packet being injected, its whole
traversal is computed at injection time; around route changes packets are
advanced one hop per event so that links shared between old and new paths
serve packets in true arrival order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .geometry import SPEED_OF_LIGHT, SatelliteId
from .topology import RouteSchedule

DATA = 0
ACK = 1

MSS_BYTES = 1460
MTU_BYTES = 1500
ACK_BYTES = 40


class Packet:
    __slots__ = ("flow_id", "kind", "seq", "size", "payload", "retx", "ack_no",
                 "inject_time", "epoch", "ordinal", "hop", "hop_time", "token")

    def __init__(self, flow_id, kind, seq=0, size=MTU_BYTES, payload=MSS_BYTES, retx=False, ack_no=0):
        if size <= 0:
            raise ValueError("packet size must be positive")
        self.flow_id = flow_id
        self.kind = kind
        self.seq = seq
        self.size = size
        self.payload = payload
        self.retx = retx
        self.ack_no = ack_no
        self.inject_time = None
        self.epoch = None
        self.ordinal = None
        self.hop = 0
        self.hop_time = 0.0
        self.token = 0

    def __repr__(self):
        kind = "ack" if self.kind == ACK else ("retx" if self.retx else "data")
        return f"Packet({self.flow_id!r}, {kind}, seq={self.seq}, epoch={self.epoch})"


class DeliveryRecord(NamedTuple):
    seq: int
    arrival_time_s: float
    in_order: bool
    route_epoch: int
    flow_id: str = ""
    ordinal: int = 0
    retx: bool = False
    inject_time_s: float = 0.0


@dataclass
class FlowCounters:
    injected: int = 0
    delivered: int = 0
    dropped: int = 0
    acks_sent: int = 0
    acks_delivered: int = 0

    @property
    def in_flight(self) -> int:
        return self.injected - self.delivered - self.dropped


class _Path:
    """Compiled route: (link id or -1, propagation after the hop) per hop."""

    __slots__ = ("hops", "n", "one_way_s", "bound_s", "next_start", "num_isl")

    def __init__(self, hops, one_way_s, bound_s, next_start):
        self.hops = hops
        self.n = len(hops)
        self.one_way_s = one_way_s
        self.bound_s = bound_s
        self.next_start = next_start
        self.num_isl = sum(1 for lid, _ in hops if lid >= 0)


def serialization_delay(size_bytes, rate_bps):
    return size_bytes * 8.0 / rate_bps


class Network:
    """Single-direction data path plus propagation-only reverse path for ACKs.

    Args:
        sim: the :class:`~leoreorder.events.EventQueue` driving the run.
        schedule: route schedule; data follow it forward, ACKs backward.
        rate_bps: serialization rate of every ISL.
        queue_capacity_pkts: drop-tail limit per directed ISL, in MTU-sized packets
            (the packet in service counts).
        trace: keep a per-packet record of every delivery and drop.
    """

    def __init__(self, sim, schedule: RouteSchedule, rate_bps=100e6, queue_capacity_pkts=256,
                 mtu_bytes=MTU_BYTES, trace=False):
        self.sim = sim
        self.schedule = schedule
        self.rate_bps = float(rate_bps)
        self.queue_capacity_pkts = int(queue_capacity_pkts)
        self._byte_time = 8.0 / self.rate_bps
        self._cap_bytes = self.queue_capacity_pkts * mtu_bytes
        self._link_ids = {}
        self._busy = []
        self.link_drops = []
        starts = schedule.starts
        self._starts = starts
        self._paths = []
        mtu_time = mtu_bytes * self._byte_time
        for i, (_, route) in enumerate(schedule.epochs):
            nxt = starts[i + 1] if i + 1 < len(starts) else math.inf
            hops = []
            for u, v, d in route.hops():
                lid = self._link(u, v) if isinstance(u, SatelliteId) and isinstance(v, SatelliteId) else -1
                hops.append((lid, d / SPEED_OF_LIGHT))
            one_way = route.total_propagation_s
            isl = sum(1 for lid, _ in hops if lid >= 0)
            bound = one_way + isl * (self.queue_capacity_pkts + 1) * mtu_time
            self._paths.append(_Path(tuple(hops), one_way, bound, nxt))
        self._epoch = 0
        self._ordinal = 0
        self.receivers = {}
        self.senders = {}
        self.counters = {}
        self.observers = []
        self.drop_observers = []
        self.trace = [] if trace else None
        self._slow_live = {}
        self._slow_count = {}
        self.slow_path_packets = 0

    def _link(self, u, v):
        key = (u, v)
        lid = self._link_ids.get(key)
        if lid is None:
            lid = self._link_ids[key] = len(self._busy)
            self._busy.append(0.0)
            self.link_drops.append(0)
        return lid

    def link_id(self, u, v):
        return self._link_ids[(u, v)]

    def link_busy_until(self, u, v):
        return self._busy[self._link_ids[(u, v)]]

    def attach(self, flow_id, sender=None, receiver=None):
        """Register the endpoint objects of a flow."""
        if sender is not None:
            self.senders[flow_id] = sender
        if receiver is not None:
            self.receivers[flow_id] = receiver
        self.counters.setdefault(flow_id, FlowCounters())

    def epoch_at(self, t):
        """Index of the epoch active at ``t``; ``t`` is expected to be non-decreasing."""
        e = self._epoch
        starts = self._starts
        if t < starts[e]:
            e = self.schedule.epoch_index_at(t)
        else:
            last = len(starts) - 1
            while e < last and starts[e + 1] <= t:
                e += 1
        self._epoch = e
        return e

    # data path -----------------------------------------------------------

    def inject(self, pkt: Packet, t: float):
        """Send ``pkt`` from the source end at time ``t`` on the epoch active then."""
        e = self.epoch_at(t)
        pkt.epoch = e
        pkt.inject_time = t
        pkt.ordinal = self._ordinal
        self._ordinal += 1
        c = self.counters.get(pkt.flow_id)
        if c is None:
            c = self.counters[pkt.flow_id] = FlowCounters()
        c.injected += 1
        path = self._paths[e]
        if not self._slow_live and t + path.bound_s < path.next_start:
            self._walk(pkt, t, 0, False)
        else:
            self.slow_path_packets += 1
            self._slow_live[pkt.ordinal] = pkt
            self._slow_count[e] = self._slow_count.get(e, 0) + 1
            self._walk(pkt, t, 0, True)

    def _walk(self, pkt, t, i, slow):
        path = self._paths[pkt.epoch]
        hops = path.hops
        n = path.n
        busy = self._busy
        first = True
        while i < n:
            lid, prop = hops[i]
            if lid >= 0:
                if slow and not first:
                    pkt.hop = i
                    pkt.hop_time = t
                    self.sim.schedule(t, self._on_hop, (pkt, pkt.token))
                    return
                b = busy[lid]
                if b > t:
                    if (b - t) / self._byte_time + pkt.size > self._cap_bytes + 1e-6:
                        self.link_drops[lid] += 1
                        if slow:
                            self._slow_done(pkt)
                        self.sim.schedule(t, self._on_drop, pkt)
                        return
                    t = b + pkt.size * self._byte_time
                else:
                    t += pkt.size * self._byte_time
                busy[lid] = t
            first = False
            t += prop
            i += 1
        if slow:
            self._slow_done(pkt)
        self.sim.schedule(t, self._on_arrive, pkt)

    def _on_hop(self, arg):
        pkt, token = arg
        if token != pkt.token:
            return
        self._walk(pkt, self.sim.now, pkt.hop, True)

    def _slow_done(self, pkt):
        del self._slow_live[pkt.ordinal]
        e = pkt.epoch
        left = self._slow_count[e] - 1
        if left:
            self._slow_count[e] = left
            return
        del self._slow_count[e]
        if len(self._slow_count) != 1:
            return
        (cur,) = self._slow_count
        now = self.sim.now
        if cur != self.epoch_at(now):
            return
        path = self._paths[cur]
        if now + path.bound_s >= path.next_start:
            return
        # Only packets of the current path remain in flight: finish them in FIFO order.
        pending = list(self._slow_live.values())
        self._slow_live.clear()
        self._slow_count.clear()
        for p in pending:
            p.token += 1
            self._walk(p, p.hop_time, p.hop, False)

    def _on_drop(self, pkt):
        c = self.counters[pkt.flow_id]
        c.dropped += 1
        now = self.sim.now
        if self.trace is not None:
            self.trace.append((now, pkt.flow_id, pkt.seq, "drop", pkt.epoch, ""))
        for obs in self.drop_observers:
            obs(pkt, now)

    def _on_arrive(self, pkt):
        if pkt.kind == ACK:
            self.counters[pkt.flow_id].acks_delivered += 1
            self.senders[pkt.flow_id].on_ack(pkt, self.sim.now)
            return
        self.deliver(pkt, self.sim.now)

    def deliver(self, pkt: Packet, t: float) -> DeliveryRecord:
        """Hand a data packet that reached the destination to its receiver."""
        rx = self.receivers.get(pkt.flow_id)
        in_order = rx is not None and pkt.seq == rx.rcv_next
        self.counters[pkt.flow_id].delivered += 1
        rec = DeliveryRecord(pkt.seq, t, in_order, pkt.epoch, pkt.flow_id, pkt.ordinal, pkt.retx, pkt.inject_time)
        if self.trace is not None:
            self.trace.append((t, pkt.flow_id, pkt.seq, "delivery", pkt.epoch, int(in_order)))
        for obs in self.observers:
            obs(rec)
        if rx is not None:
            rx.on_data(pkt, t)
        return rec

    # reverse path --------------------------------------------------------

    def send_ack(self, pkt: Packet, t: float):
        """ACKs take the reverse of the current route, propagation delay only."""
        e = self.epoch_at(t)
        pkt.epoch = e
        pkt.inject_time = t
        c = self.counters.get(pkt.flow_id)
        if c is None:
            c = self.counters[pkt.flow_id] = FlowCounters()
        c.acks_sent += 1
        self.sim.schedule(t + self._paths[e].one_way_s, self._on_arrive, pkt)

    def one_way_delay(self, epoch):
        return self._paths[epoch].one_way_s

    def conservation(self, flow_id):
        c = self.counters[flow_id]
        return c.injected, c.delivered, c.dropped, c.in_flight
