"""Scenario presets and the INI configuration format.

The config file has five sections::

    [scenario]       name, duration_s, seed, start_offset_s, l3_interval_s,
                     l2_interval_s, attachment, src_*/dst_* ground stations
    [constellation]  num_planes, sats_per_plane, altitude_km, inclination_deg,
                     raan_spread_deg, phase_offset_frac, static
    [link]           rate_bps, fso_range_km, queue_capacity_pkts
    [transport]      cc
    [metrics]        bin_s, packet_trace
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace

from .geometry import ConstellationConfig, GeoCoordinate
from .topology import ATTACHMENT_POLICIES, GroundStation

CC_NAMES = ("reno", "cubic", "bbr")


class UnknownPreset(KeyError):
    pass


class ConfigError(ValueError):
    pass


MADRID = GroundStation("Madrid", GeoCoordinate(40.4168, -3.7038))
TOKYO = GroundStation("Tokyo", GeoCoordinate(35.6762, 139.6503))
AALBORG = GroundStation("Aalborg", GeoCoordinate(57.0488, 9.9217))
CAPE_TOWN = GroundStation("CapeTown", GeoCoordinate(-33.9249, 18.4241))

ONEWEB = ConstellationConfig(num_planes=18, sats_per_plane=36, altitude_km=1200.0, inclination_deg=86.4)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "baseline"
    constellation: ConstellationConfig = ONEWEB
    gs_src: GroundStation = MADRID
    gs_dst: GroundStation = TOKYO
    cc_name: str = "cubic"
    duration_s: float = 1000.0
    l3_interval_s: float = 30.0
    l2_interval_s: float = 15.0
    attachment: str = "shortest"
    rate_bps: float = 100e6
    fso_range_km: float = 3000.0
    queue_capacity_pkts: int = 256
    bin_s: float = 0.05
    seed: int = 0
    start_offset_s: float = 0.0
    packet_trace: bool = False

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ConfigError("duration_s must be positive")
        if not (self.l2_interval_s > 0 and self.l3_interval_s > 0):
            raise ConfigError("update intervals must be positive")
        ratio = self.l3_interval_s / self.l2_interval_s
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError("l3_interval_s must be a multiple of l2_interval_s")
        if self.attachment not in ATTACHMENT_POLICIES:
            raise ConfigError(f"unknown attachment policy {self.attachment!r}")
        if self.cc_name not in CC_NAMES:
            raise ConfigError(f"unknown congestion control {self.cc_name!r}")
        if not self.rate_bps > 0 or self.queue_capacity_pkts < 1 or not self.bin_s > 0:
            raise ConfigError("rate, queue capacity and bin width must be positive")


PRESETS = {
    "baseline": ScenarioConfig(name="baseline"),
    "nine-planes": ScenarioConfig(name="nine-planes", constellation=replace(ONEWEB, num_planes=9)),
    "aalborg-capetown": ScenarioConfig(name="aalborg-capetown", gs_src=AALBORG, gs_dst=CAPE_TOWN),
}


def preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPreset(name) from None


def _station_items(prefix, gs):
    return {
        f"{prefix}_name": gs.name,
        f"{prefix}_lat_deg": repr(gs.geo.latitude_deg),
        f"{prefix}_lon_deg": repr(gs.geo.longitude_deg),
        f"{prefix}_min_elevation_deg": repr(gs.min_elevation_deg),
    }


def to_ini(cfg: ScenarioConfig) -> str:
    parser = configparser.ConfigParser()
    parser["scenario"] = {
        "name": cfg.name,
        "duration_s": repr(cfg.duration_s),
        "seed": str(cfg.seed),
        "start_offset_s": repr(cfg.start_offset_s),
        "l3_interval_s": repr(cfg.l3_interval_s),
        "l2_interval_s": repr(cfg.l2_interval_s),
        "attachment": cfg.attachment,
        **_station_items("src", cfg.gs_src),
        **_station_items("dst", cfg.gs_dst),
    }
    parser["constellation"] = {f.name: repr(getattr(cfg.constellation, f.name)) for f in fields(ConstellationConfig)}
    parser["link"] = {
        "rate_bps": repr(cfg.rate_bps),
        "fso_range_km": repr(cfg.fso_range_km),
        "queue_capacity_pkts": str(cfg.queue_capacity_pkts),
    }
    parser["transport"] = {"cc": cfg.cc_name}
    parser["metrics"] = {"bin_s": repr(cfg.bin_s), "packet_trace": repr(cfg.packet_trace)}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def _station(sec, prefix, default: GroundStation) -> GroundStation:
    return GroundStation(
        sec.get(f"{prefix}_name", default.name),
        GeoCoordinate(sec.getfloat(f"{prefix}_lat_deg", default.geo.latitude_deg),
                      sec.getfloat(f"{prefix}_lon_deg", default.geo.longitude_deg)),
        sec.getfloat(f"{prefix}_min_elevation_deg", default.min_elevation_deg),
    )


def from_ini(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse an INI document; missing keys fall back to ``base`` (or the preset it names)."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for sec in parser.sections():
        if sec not in ("scenario", "constellation", "link", "transport", "metrics"):
            raise ConfigError(f"unknown section [{sec}]")
    for sec in ("scenario", "constellation", "link", "transport", "metrics"):
        if not parser.has_section(sec):
            parser.add_section(sec)
    s = parser["scenario"]
    if base is None:
        base = preset(s.get("name", "baseline")) if s.get("name", "baseline") in PRESETS else ScenarioConfig()
    c = parser["constellation"]
    const_kw = {}
    for f in fields(ConstellationConfig):
        if f.name in c:
            raw = c[f.name]
            if f.name == "static":
                const_kw[f.name] = c.getboolean(f.name)
            elif f.name in ("num_planes", "sats_per_plane"):
                const_kw[f.name] = int(raw)
            else:
                const_kw[f.name] = float(raw)
    try:
        constellation = replace(base.constellation, **const_kw)
        link, tr, met = parser["link"], parser["transport"], parser["metrics"]
        return replace(
            base,
            name=s.get("name", base.name),
            constellation=constellation,
            gs_src=_station(s, "src", base.gs_src),
            gs_dst=_station(s, "dst", base.gs_dst),
            cc_name=tr.get("cc", base.cc_name),
            duration_s=s.getfloat("duration_s", base.duration_s),
            seed=s.getint("seed", base.seed),
            start_offset_s=s.getfloat("start_offset_s", base.start_offset_s),
            l3_interval_s=s.getfloat("l3_interval_s", base.l3_interval_s),
            l2_interval_s=s.getfloat("l2_interval_s", base.l2_interval_s),
            attachment=s.get("attachment", base.attachment),
            rate_bps=link.getfloat("rate_bps", base.rate_bps),
            fso_range_km=link.getfloat("fso_range_km", base.fso_range_km),
            queue_capacity_pkts=link.getint("queue_capacity_pkts", base.queue_capacity_pkts),
            bin_s=met.getfloat("bin_s", base.bin_s),
            packet_trace=met.getboolean("packet_trace", base.packet_trace),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        return from_ini(fh.read())


def save_config(cfg: ScenarioConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_ini(cfg))
