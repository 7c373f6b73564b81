"""Goodput/RTT sampling, reordering statistics, empirical distributions and exports."""
from __future__ import annotations

import bisect
import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

EVENT_KINDS = ("route-change", "retransmission", "rto", "phase-change", "drop")


class EmptyInput(ValueError):
    pass


class MetricSample(NamedTuple):
    time_s: float
    goodput_bps: float
    srtt_s: float
    cwnd_bytes: float
    retransmissions_in_bin: int


class TraceEvent(NamedTuple):
    time_s: float
    kind: str
    detail: str


@dataclass
class ReorderStats:
    reordered_count: int = 0
    max_reorder_extent_pkts: int = 0
    spurious_retx_count: int = 0


# goodput -----------------------------------------------------------------


def goodput_series(deliveries, bin_s, duration_s=None):
    """Bin in-order byte progress into goodput.

    ``deliveries`` is an iterable of ``(time_s, bytes_advanced)`` where the
    second item is how far the receiver's next expected byte moved. Bin ``k``
    covers ``[k*bin_s, (k+1)*bin_s)``. Returns ``(bin_start_times, goodput_bps)``.
    """
    if not bin_s > 0:
        raise ValueError("bin_s must be positive")
    arr = np.asarray(list(deliveries), dtype=float).reshape(-1, 2)
    if duration_s is None:
        duration_s = float(arr[:, 0].max()) + bin_s if len(arr) else bin_s
    nbins = max(int(math.ceil(duration_s / bin_s - 1e-9)), 1)
    idx = np.floor(arr[:, 0] / bin_s + 1e-9).astype(int)
    keep = (idx >= 0) & (idx < nbins)
    totals = np.bincount(idx[keep], weights=arr[keep, 1], minlength=nbins)
    return np.arange(nbins) * bin_s, totals * 8.0 / bin_s


def low_goodput_fraction(goodput_bps, threshold_bps):
    g = np.asarray(goodput_bps, dtype=float)
    if g.size == 0:
        raise EmptyInput("no goodput samples")
    return float(np.count_nonzero(g < threshold_bps)) / g.size


# distributions -------------------------------------------------------------


def ecdf(values):
    """Sorted values and P(X <= x) at each of them."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise EmptyInput("ecdf of empty input")
    return x, np.arange(1, x.size + 1) / x.size


def ecdf_at(values, x):
    """Right-continuous empirical CDF evaluated at ``x``."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise EmptyInput("ecdf of empty input")
    return np.searchsorted(v, x, side="right") / v.size


def ccdf(values):
    x, p = ecdf(values)
    return x, 1.0 - p


# reordering ----------------------------------------------------------------


class ReorderDetector:
    """Online reordering detection over injection ordinals.

    A packet is reordered when a later-injected packet already arrived; its
    extent is the number of later-injected packets that arrived before it.
    """

    def __init__(self):
        self.max_seen = -1
        self._missing = []
        self.reordered_count = 0
        self.max_extent = 0
        self.reorder_times = []

    def observe(self, ordinal, t=None):
        m = self.max_seen
        if ordinal > m:
            if ordinal > m + 1:
                self._missing.extend(range(m + 1, ordinal))
            self.max_seen = ordinal
            return 0
        missing = self._missing
        i = bisect.bisect_left(missing, ordinal)
        if i == len(missing) or missing[i] != ordinal:
            return 0  # duplicate of an already counted arrival
        del missing[i]
        extent = (m - ordinal) - (len(missing) - i)
        self.reordered_count += 1
        if extent > self.max_extent:
            self.max_extent = extent
        if t is not None:
            self.reorder_times.append(t)
        return extent

    def on_delivery(self, rec):
        self.observe(rec.ordinal, rec.arrival_time_s)

    def stats(self, spurious_retx_count=0) -> ReorderStats:
        return ReorderStats(self.reordered_count, self.max_extent, spurious_retx_count)


def detect_reordering(deliveries, spurious_retx_count=0) -> ReorderStats:
    """Reorder statistics for arrivals given in arrival order.

    Items are injection ordinals or records with an ``ordinal`` attribute.
    """
    det = ReorderDetector()
    for d in deliveries:
        det.observe(getattr(d, "ordinal", d))
    return det.stats(spurious_retx_count)


# run sampling --------------------------------------------------------------


class Sampler:
    """Snapshots sender/receiver state at every bin boundary.

    All sampling events are queued before the run starts, so a sample at time
    ``t`` is taken before any packet arriving exactly at ``t`` is processed.
    """

    def __init__(self, sim, sender, receiver, bin_s, duration_s):
        self.sender = sender
        self.receiver = receiver
        self.bin_s = bin_s
        self.nbins = max(int(math.ceil(duration_s / bin_s - 1e-9)), 1)
        self._bytes = np.zeros(self.nbins + 1)
        self._srtt = np.full(self.nbins + 1, np.nan)
        self._cwnd = np.zeros(self.nbins + 1)
        self._retx = np.zeros(self.nbins + 1, dtype=np.int64)
        self._k = 0
        # the last instant is clamped so a partial final bin still gets sampled
        self._times = np.minimum(np.arange(self.nbins + 1) * bin_s, duration_s)
        for t in self._times:
            sim.schedule(float(t), self._sample)

    def _sample(self, _=None):
        k = self._k
        s = self.sender
        self._bytes[k] = self.receiver.rcv_next
        srtt = s.rtt.srtt
        self._srtt[k] = np.nan if srtt is None else srtt
        self._cwnd[k] = s.cc.cwnd
        self._retx[k] = s.retransmissions
        self._k = k + 1

    def series(self):
        """Per-bin arrays; state columns hold the value at the end of the bin."""
        n = self.nbins
        if self._k <= n:
            raise RuntimeError("run did not reach the final sampling instant")
        times = self._times[:n]
        goodput = np.diff(self._bytes) * 8.0 / np.diff(self._times)
        return {
            "time_s": times,
            "goodput_bps": goodput,
            "srtt_s": self._srtt[1:],
            "cwnd_bytes": self._cwnd[1:],
            "retx_cum": self._retx[1:],
            "retx_in_bin": np.diff(self._retx),
        }


def metric_samples(series):
    return [MetricSample(float(t), float(g), float(r), float(c), int(x))
            for t, g, r, c, x in zip(series["time_s"], series["goodput_bps"], series["srtt_s"],
                                     series["cwnd_bytes"], series["retx_in_bin"])]


def summarize_run(series, *, rate_bps, retransmissions=0, reorder: ReorderStats | None = None,
                  route_changes=0, extra=None):
    """Summary statistics over one run's sampled series."""
    g = np.asarray(series["goodput_bps"], dtype=float)
    rtt = np.asarray(series["srtt_s"], dtype=float)
    rtt = rtt[~np.isnan(rtt)]
    reorder = reorder or ReorderStats()
    out = {
        "goodput_mean_bps": float(g.mean()) if g.size else 0.0,
        "goodput_median_bps": float(np.median(g)) if g.size else 0.0,
        "low_goodput_fraction": low_goodput_fraction(g, 0.5 * rate_bps) if g.size else 0.0,
        "low_goodput_threshold_bps": 0.5 * rate_bps,
        "num_bins": int(g.size),
        "retransmissions": int(retransmissions),
        "route_changes": int(route_changes),
        **{k: int(v) for k, v in asdict(reorder).items()},
    }
    for q in (5, 25, 50, 75, 95, 99):
        out[f"srtt_p{q}_s"] = float(np.percentile(rtt, q)) if rtt.size else None
    if extra:
        out.update(extra)
    return out


# export --------------------------------------------------------------------


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(round(x, 9))


def write_csv(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([c if isinstance(c, str) else _fmt(c) for c in row])


def write_series(out_dir, series):
    """Write goodput.csv, rtt.csv and cwnd.csv into ``out_dir`` (a pathlib.Path)."""
    t = series["time_s"]
    write_csv(out_dir / "goodput.csv", ("time_s", "goodput_bps"), (t, series["goodput_bps"]))
    write_csv(out_dir / "rtt.csv", ("time_s", "srtt_s"), (t, series["srtt_s"]))
    write_csv(out_dir / "cwnd.csv", ("time_s", "cwnd_bytes", "retx_cum"),
              (t, series["cwnd_bytes"], series["retx_cum"]))


def sort_events(events):
    """Stable time ordering of ``(time_s, kind, detail)`` tuples."""
    return [TraceEvent(*e) for e in sorted(events, key=lambda e: e[0])]


def write_events(path, events):
    write_csv(path, ("time_s", "kind", "detail"),
              ([e[0] for e in events], [e[1] for e in events], [e[2] for e in events]))


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_packet_trace(path, trace):
    """Per-packet records ``(time_s, flow, seq, kind, epoch, in_order)``."""
    cols = list(zip(*trace)) if trace else [(), (), (), (), (), ()]
    write_csv(path, ("time_s", "flow", "seq", "kind", "epoch", "in_order"),
              [cols[0], cols[1], cols[2], cols[3], cols[4], [str(v) for v in cols[5]]])
