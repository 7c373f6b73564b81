"""Time-varying ISL graph, ground-station attachment and shortest-path routing."""
from __future__ import annotations

import bisect
import heapq
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    SPEED_OF_LIGHT,
    ConstellationConfig,
    GeoCoordinate,
    SatelliteId,
    elevation_angles,
    ground_position,
    satellite_positions,
)

DEFAULT_FSO_RANGE_KM = 3000.0


class NoVisibleSatellite(Exception):
    """No satellite is above a ground station's elevation mask."""

    def __init__(self, station, time_s):
        super().__init__(f"no satellite visible from {station} at t={time_s:g}s")
        self.station = station
        self.time_s = time_s


class Unreachable(Exception):
    """The destination cannot be reached from the source."""

    def __init__(self, src, dst, time_s=None):
        when = "" if time_s is None else f" at t={time_s:g}s"
        super().__init__(f"no path from {src} to {dst}{when}")
        self.src = src
        self.dst = dst
        self.time_s = time_s


@dataclass(frozen=True)
class GroundStation:
    name: str
    geo: GeoCoordinate
    min_elevation_deg: float = 10.0

    def __post_init__(self):
        if not 0 <= self.min_elevation_deg < 90:
            raise ValueError("min_elevation_deg must be in [0, 90)")


def node_key(node):
    """Total order over graph nodes: ground stations, then satellites, then others."""
    if isinstance(node, SatelliteId):
        return (1, node.plane, node.slot)
    if isinstance(node, str):
        return (0, node)
    return (2, node)


def node_label(node) -> str:
    return str(node)


_SAT_LABEL = re.compile(r"^S\d+\.\d+$")


def parse_node_label(text: str):
    return SatelliteId.parse(text) if _SAT_LABEL.match(text) else text


@dataclass
class IslGraph:
    """Undirected weighted graph; weights are kilometers."""

    adjacency: dict = field(default_factory=dict)
    time_s: float = 0.0

    def add_node(self, node):
        self.adjacency.setdefault(node, {})

    def add_edge(self, u, v, weight_km: float):
        self.adjacency.setdefault(u, {})[v] = float(weight_km)
        self.adjacency.setdefault(v, {})[u] = float(weight_km)

    def has_edge(self, u, v) -> bool:
        return v in self.adjacency.get(u, ())

    def weight(self, u, v) -> float:
        return self.adjacency[u][v]

    def degree(self, node) -> int:
        return len(self.adjacency[node])

    @property
    def nodes(self):
        return set(self.adjacency)

    def edges(self):
        """Each undirected edge once, as (u, v, weight) with u < v by node order."""
        for u, nbrs in self.adjacency.items():
            for v, w in nbrs.items():
                if node_key(u) < node_key(v):
                    yield u, v, w

    def copy(self) -> "IslGraph":
        return IslGraph({u: dict(n) for u, n in self.adjacency.items()}, self.time_s)


def _has_seam(cfg: ConstellationConfig) -> bool:
    return cfg.raan_spread_deg < 360.0


def build_isl_graph(cfg: ConstellationConfig, t: float, fso_range_km: float = DEFAULT_FSO_RANGE_KM,
                    positions: np.ndarray | None = None) -> IslGraph:
    """Satellite-only ISL graph at time ``t``.

    Every satellite links to its two ring neighbours and to the nearest
    satellite in each adjacent plane; the two planes meeting at the seam of a
    star pattern are not linked. Links longer than ``fso_range_km`` are dropped.
    """
    P, Q = cfg.num_planes, cfg.sats_per_plane
    pos = satellite_positions(cfg, t) if positions is None else positions
    g = IslGraph(time_s=t)
    for p in range(P):
        for s in range(Q):
            g.add_node(SatelliteId(p, s))

    def link(u, v, d):
        if d <= fso_range_km:
            g.add_edge(u, v, d)

    for p in range(P):
        ring = np.linalg.norm(pos[p] - np.roll(pos[p], -1, axis=0), axis=1)
        for s in range(Q):
            link(SatelliteId(p, s), SatelliteId(p, (s + 1) % Q), float(ring[s]))

    pairs = [(p, p + 1) for p in range(P - 1)]
    if P > 2 and not _has_seam(cfg):
        pairs.append((P - 1, 0))
    elif P == 2 and not _has_seam(cfg):
        pairs = [(0, 1)]
    for p, r in pairs:
        dist = np.linalg.norm(pos[p][:, None, :] - pos[r][None, :, :], axis=2)
        for s, j in enumerate(np.argmin(dist, axis=1)):
            link(SatelliteId(p, s), SatelliteId(r, int(j)), float(dist[s, j]))
        for j, s in enumerate(np.argmin(dist, axis=0)):
            link(SatelliteId(p, int(s)), SatelliteId(r, j), float(dist[s, j]))
    return g


def select_access_satellite(gs: GroundStation, cfg: ConstellationConfig, t: float,
                            positions: np.ndarray | None = None) -> SatelliteId:
    """Highest-elevation satellite above the station's mask (ties: lowest id)."""
    pos = satellite_positions(cfg, t) if positions is None else positions
    gpos = ground_position(gs.geo, t, static=cfg.static)
    elev = elevation_angles(gpos, pos.reshape(-1, 3))
    best = int(np.argmax(elev))
    if elev[best] < gs.min_elevation_deg:
        raise NoVisibleSatellite(gs.name, t)
    return SatelliteId(*divmod(best, cfg.sats_per_plane))


def shortest_path(adjacency: dict, src, dst, key=node_key):
    """Dijkstra over ``adjacency``; returns (cost, node tuple).

    Labels are compared as (cost, key sequence of the path), so among
    equal-cost paths the lexicographically smallest node sequence wins.
    """
    if src not in adjacency:
        raise KeyError(src)
    if dst not in adjacency:
        raise KeyError(dst)
    start = (0.0, (key(src),))
    best = {src: start}
    heap = [(0.0, start[1], (src,))]
    done = set()
    while heap:
        cost, keys, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dst:
            return cost, path
        for v, w in adjacency[u].items():
            if v in done:
                continue
            label = (cost + w, keys + (key(v),))
            old = best.get(v)
            if old is None or label < old:
                best[v] = label
                heapq.heappush(heap, (label[0], label[1], path + (v,)))
    raise Unreachable(src, dst)


@dataclass(frozen=True)
class Route:
    """Ordered node path with the per-hop distances frozen at computation time."""

    nodes: tuple
    hop_distances_km: tuple = ()

    def __post_init__(self):
        if len(self.hop_distances_km) != max(len(self.nodes) - 1, 0):
            raise ValueError("need exactly one distance per hop")

    @property
    def total_distance_km(self) -> float:
        return float(sum(self.hop_distances_km))

    @property
    def total_propagation_s(self) -> float:
        return route_propagation_delay(self)

    def same_path(self, other: "Route") -> bool:
        return other is not None and self.nodes == other.nodes

    def hops(self):
        return list(zip(self.nodes[:-1], self.nodes[1:], self.hop_distances_km))


def route_propagation_delay(route: Route) -> float:
    return sum(route.hop_distances_km) / SPEED_OF_LIGHT


def shortest_route(graph: IslGraph, src, dst) -> Route:
    """Minimum-distance route between two graph nodes."""
    _, path = shortest_path(graph.adjacency, src, dst)
    dists = tuple(graph.weight(u, v) for u, v in zip(path[:-1], path[1:]))
    return Route(tuple(path), dists)


@dataclass(frozen=True)
class RouteSchedule:
    """Piecewise-constant route over [0, duration_s)."""

    epochs: tuple
    duration_s: float

    def __post_init__(self):
        if not self.epochs:
            raise ValueError("schedule needs at least one epoch")
        starts = [s for s, _ in self.epochs]
        if starts[0] != 0:
            raise ValueError("first epoch must start at 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("epoch start times must be strictly increasing")

    @property
    def starts(self):
        return [s for s, _ in self.epochs]

    @property
    def routes(self):
        return [r for _, r in self.epochs]

    @property
    def route_change_times(self):
        out = []
        for (_, prev), (start, route) in zip(self.epochs, self.epochs[1:]):
            if not route.same_path(prev):
                out.append(start)
        return out

    def epoch_index_at(self, t: float) -> int:
        return max(bisect.bisect_right(self.starts, t) - 1, 0)

    def route_at(self, t: float) -> Route:
        return self.epochs[self.epoch_index_at(t)][1]

    def propagation_spread_s(self) -> float:
        delays = [r.total_propagation_s for r in self.routes]
        return max(delays) - min(delays)


def static_schedule(route: Route, duration_s: float = math.inf) -> RouteSchedule:
    return RouteSchedule(((0.0, route),), duration_s)


ATTACHMENT_POLICIES = ("shortest", "max-elevation")


def visible_satellites(gs: GroundStation, cfg: ConstellationConfig, t: float, positions=None):
    """Satellites above the station's mask as a list of (SatelliteId, distance_km)."""
    pos = satellite_positions(cfg, t) if positions is None else positions
    gpos = ground_position(gs.geo, t, static=cfg.static)
    flat = pos.reshape(-1, 3)
    elev = elevation_angles(gpos, flat)
    dist = np.linalg.norm(flat - gpos, axis=1)
    return [(SatelliteId(*divmod(int(i), cfg.sats_per_plane)), float(dist[i]))
            for i in np.nonzero(elev >= gs.min_elevation_deg)[0]]


def _ground_edges(graph: IslGraph, cfg, stations, t, positions, policy):
    for gs in stations:
        if policy == "max-elevation":
            sat = select_access_satellite(gs, cfg, t, positions)
            d = float(np.linalg.norm(ground_position(gs.geo, t, static=cfg.static) - positions[sat.plane, sat.slot]))
            graph.add_edge(gs.name, sat, d)
            continue
        visible = visible_satellites(gs, cfg, t, positions)
        if not visible:
            raise NoVisibleSatellite(gs.name, t)
        for sat, d in visible:
            graph.add_edge(gs.name, sat, d)


def _full_route(cfg, src, dst, t, fso_range_km, policy="shortest"):
    pos = satellite_positions(cfg, t)
    graph = build_isl_graph(cfg, t, fso_range_km, positions=pos)
    _ground_edges(graph, cfg, (src, dst), t, pos, policy)
    return shortest_route(graph, src.name, dst.name)


def _remove_loops(nodes, dists):
    out_n, out_d = [nodes[0]], []
    for node, d in zip(nodes[1:], dists):
        if node in out_n:
            cut = out_n.index(node)
            del out_n[cut + 1:]
            del out_d[cut:]
        else:
            out_n.append(node)
            out_d.append(d)
    return tuple(out_n), tuple(out_d)


def _splice_access(route: Route, cfg, src, dst, t, fso_range_km, src_sat, dst_sat):
    """Replace the ground hops of ``route`` for new access satellites.

    Returns None when the retained satellite segment is no longer valid on the
    current graph, in which case the caller recomputes the full route.
    """
    pos = satellite_positions(cfg, t)
    graph = build_isl_graph(cfg, t, fso_range_km, positions=pos)
    sats = list(route.nodes[1:-1])
    inner = list(route.hop_distances_km[1:-1])
    for u, v in zip(sats[:-1], sats[1:]):
        if not graph.has_edge(u, v):
            return None
    gsrc = ground_position(src.geo, t, static=cfg.static)
    gdst = ground_position(dst.geo, t, static=cfg.static)
    try:
        _, head = shortest_path(graph.adjacency, src_sat, sats[0])
        _, tail = shortest_path(graph.adjacency, sats[-1], dst_sat)
    except Unreachable:
        return None
    head_d = [graph.weight(u, v) for u, v in zip(head[:-1], head[1:])]
    tail_d = [graph.weight(u, v) for u, v in zip(tail[:-1], tail[1:])]
    nodes = [src.name, *head[:-1], *sats, *tail[1:], dst.name]
    dists = [float(np.linalg.norm(gsrc - pos[src_sat.plane, src_sat.slot])), *head_d, *inner, *tail_d,
             float(np.linalg.norm(gdst - pos[dst_sat.plane, dst_sat.slot]))]
    nodes, dists = _remove_loops(nodes, dists)
    return Route(nodes, dists)


def _still_visible(cfg, stations, sats, t) -> bool:
    pos = satellite_positions(cfg, t)
    for gs, sat in zip(stations, sats):
        gpos = ground_position(gs.geo, t, static=cfg.static)
        if elevation_angles(gpos, pos[sat.plane, sat.slot][None, :])[0] < gs.min_elevation_deg:
            return False
    return True


def compute_route_schedule(scenario, duration_s: float) -> RouteSchedule:
    """Route schedule for ``scenario`` over ``[0, duration_s)``.

    The whole path is recomputed every ``l3_interval_s``; attachments are
    re-evaluated every ``l2_interval_s``. With the default ``"shortest"``
    attachment policy each ground station links to every visible satellite and
    Dijkstra picks the access hops; in between full recomputations the route
    is only recomputed if an access satellite drops below the mask. With
    ``"max-elevation"`` the highest satellite is used and a changed attachment
    splices in new ground hops. A new epoch starts only when the node sequence
    changes, so hop distances stay frozen for the life of a path.
    """
    if not duration_s > 0:
        raise ValueError("duration_s must be positive")
    cfg = scenario.constellation
    src, dst = scenario.gs_src, scenario.gs_dst
    l2, l3 = scenario.l2_interval_s, scenario.l3_interval_s
    ratio = max(int(round(l3 / l2)), 1)
    offset = getattr(scenario, "start_offset_s", 0.0)
    fso = scenario.fso_range_km
    policy = getattr(scenario, "attachment", "shortest")
    if policy not in ATTACHMENT_POLICIES:
        raise ValueError(f"unknown attachment policy {policy!r}")
    epochs = []
    current = None
    attach = None
    for k in range(math.ceil(duration_s / l2 - 1e-9)):
        t = k * l2
        tg = t + offset
        try:
            if k % ratio == 0 or current is None:
                route = _full_route(cfg, src, dst, tg, fso, policy)
            elif policy == "shortest":
                if attach is None or _still_visible(cfg, (src, dst), attach, tg):
                    continue
                route = _full_route(cfg, src, dst, tg, fso, policy)
            else:
                pos = satellite_positions(cfg, tg)
                now = (select_access_satellite(src, cfg, tg, pos), select_access_satellite(dst, cfg, tg, pos))
                if now == attach:
                    continue
                route = _splice_access(current, cfg, src, dst, tg, fso, *now)
                if route is None:
                    route = _full_route(cfg, src, dst, tg, fso, policy)
        except NoVisibleSatellite as exc:
            raise NoVisibleSatellite(exc.station, t) from exc
        except Unreachable as exc:
            raise Unreachable(exc.src, exc.dst, t) from exc
        attach = (route.nodes[1], route.nodes[-2]) if len(route.nodes) > 2 else None
        if current is None or not route.same_path(current):
            epochs.append((t, route))
            current = route
    return RouteSchedule(tuple(epochs), duration_s)


def write_route_schedule(schedule: RouteSchedule, path) -> None:
    """One JSON record per epoch: start time, node labels, hop distances, delay."""
    with open(path, "w") as fh:
        for start, route in schedule.epochs:
            rec = {
                "start_time_s": start,
                "nodes": [node_label(n) for n in route.nodes],
                "hop_distances_km": list(route.hop_distances_km),
                "total_propagation_s": route.total_propagation_s,
            }
            fh.write(json.dumps(rec) + "\n")


def read_route_schedule(path, duration_s: float = math.inf) -> RouteSchedule:
    epochs = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            nodes = tuple(parse_node_label(n) for n in rec["nodes"])
            epochs.append((rec["start_time_s"], Route(nodes, tuple(rec["hop_distances_km"]))))
    return RouteSchedule(tuple(epochs), duration_s)
