import math
import random

import pytest
from oracles import brute_force_shortest_path, random_graph

from leoreorder.geometry import ConstellationConfig, GeoCoordinate, SatelliteId
from leoreorder.scenario import ScenarioConfig, preset
from leoreorder.topology import (
    GroundStation,
    IslGraph,
    NoVisibleSatellite,
    Route,
    RouteSchedule,
    Unreachable,
    build_isl_graph,
    compute_route_schedule,
    read_route_schedule,
    route_propagation_delay,
    select_access_satellite,
    shortest_path,
    shortest_route,
    write_route_schedule,
)


def test_dijkstra_matches_brute_force_500_graphs():
    rng = random.Random(7)
    mismatches = 0
    for k in range(500):
        n = rng.randint(2, 10)
        g = random_graph(rng, n, rng.uniform(0.2, 0.8), integer=k % 2 == 0)
        src, dst = rng.sample(range(n), 2)
        ref = brute_force_shortest_path(g.adjacency, src, dst)
        if ref is None:
            with pytest.raises(Unreachable):
                shortest_path(g.adjacency, src, dst)
            continue
        cost, path = shortest_path(g.adjacency, src, dst)
        if not (math.isclose(cost, ref[0], abs_tol=1e-9) and path == ref[1]):
            mismatches += 1
    assert mismatches == 0


def test_diamond():
    g = IslGraph()
    g.add_edge("A", "B", 1)
    g.add_edge("B", "D", 1)
    g.add_edge("A", "C", 2)
    g.add_edge("C", "D", 0.5)
    r = shortest_route(g, "A", "D")
    assert r.nodes == ("A", "B", "D")
    assert r.total_distance_km == 2


def test_src_equals_dst():
    g = IslGraph()
    g.add_node("A")
    r = shortest_route(g, "A", "A")
    assert r.nodes == ("A",)
    assert r.total_distance_km == 0
    assert route_propagation_delay(r) == 0


def test_unreachable_and_missing():
    g = IslGraph()
    g.add_node("A")
    g.add_node("B")
    with pytest.raises(Unreachable):
        shortest_route(g, "A", "B")
    with pytest.raises(KeyError):
        shortest_route(g, "A", "Z")


def test_propagation_delay():
    assert route_propagation_delay(Route(("a", "b"), (3000.0,))) == pytest.approx(10.007e-3, abs=1e-6)
    r = Route(tuple(range(9)), (1319.7,) * 8)
    assert r.total_propagation_s == pytest.approx(35.21e-3, abs=1e-5)
    with pytest.raises(ValueError):
        Route(("a", "b"), ())


def test_isl_graph_degrees():
    cfg = ConstellationConfig()
    g = build_isl_graph(cfg, 300.0)
    assert len(g.nodes) == 648
    assert all(g.degree(n) >= 2 for n in g.nodes)
    assert all(w <= 3000.0 for _, _, w in g.edges())
    # no edges across the counter-rotating seam between the last and first plane
    assert not any({u.plane, v.plane} == {0, 17} for u, v, _ in g.edges())


def test_single_plane_only_ring():
    cfg = ConstellationConfig(num_planes=1, sats_per_plane=36)
    g = build_isl_graph(cfg, 0.0)
    assert all(g.degree(n) == 2 for n in g.nodes)


def test_range_filter_removes_long_links():
    cfg = ConstellationConfig()
    short = build_isl_graph(cfg, 0.0, fso_range_km=1000.0)
    assert all(w <= 1000.0 for _, _, w in short.edges())
    # in-plane neighbours are 1319.7 km apart, so no ring edge survives
    assert not any(u.plane == v.plane for u, v, _ in short.edges())


def test_select_access_satellite_deterministic():
    cfg = ConstellationConfig()
    gs = GroundStation("Madrid", GeoCoordinate(40.4168, -3.7038))
    a = select_access_satellite(gs, cfg, 0.0)
    assert a == select_access_satellite(gs, cfg, 0.0)
    assert isinstance(a, SatelliteId)


def test_no_visible_satellite():
    cfg = ConstellationConfig(num_planes=1, sats_per_plane=3)
    gs = GroundStation("X", GeoCoordinate(0, 90), min_elevation_deg=60)
    with pytest.raises(NoVisibleSatellite):
        select_access_satellite(gs, cfg, 0.0)


def test_static_constellation_has_one_route():
    cfg = ScenarioConfig(constellation=ConstellationConfig(static=True))
    sched = compute_route_schedule(cfg, 200.0)
    assert len(sched.epochs) == 1
    assert sched.route_change_times == []


def test_schedule_grid_and_determinism(tmp_path):
    cfg = preset("baseline")
    sched = compute_route_schedule(cfg, 300.0)
    assert 1 <= len(sched.epochs) <= math.ceil(300 / 15)
    assert all(s % 15 == 0 for s in sched.starts)
    assert sched.propagation_spread_s() < 5e-3
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_route_schedule(sched, a)
    write_route_schedule(compute_route_schedule(cfg, 300.0), b)
    assert a.read_bytes() == b.read_bytes()
    back = read_route_schedule(a, 300.0)
    assert back.epochs == sched.epochs


def test_schedule_lookup():
    r1 = Route(("a", "b"), (1.0,))
    r2 = Route(("a", "c", "b"), (1.0, 1.0))
    sched = RouteSchedule(((0.0, r1), (15.0, r2)), 30.0)
    assert sched.route_at(14.999) is r1
    assert sched.route_at(15.0) is r2
    assert sched.route_change_times == [15.0]
    with pytest.raises(ValueError):
        RouteSchedule(((1.0, r1),), 30.0)


def test_schedule_rejects_bad_duration():
    with pytest.raises(ValueError):
        compute_route_schedule(preset("baseline"), 0)
