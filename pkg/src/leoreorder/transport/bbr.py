"""BBR (v1) model-based congestion control."""
from __future__ import annotations

import math
from collections import deque

from ..netem import MSS_BYTES
from .congestion import INITIAL_CWND_SEGMENTS, CongestionControl

HIGH_GAIN = 2.0 / math.log(2.0)
DRAIN_GAIN = math.log(2.0) / 2.0
PACING_GAIN_CYCLE = (1.25, 0.75, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
BW_WINDOW_ROUNDS = 10
MIN_RTT_WINDOW_S = 10.0
PROBE_RTT_DURATION_S = 0.2
MIN_CWND_SEGMENTS = 4

STARTUP, DRAIN, PROBE_BW, PROBE_RTT = "startup", "drain", "probe-bw", "probe-rtt"


class WindowedMax:
    """Running maximum over the last ``window`` stamps (monotone deque)."""

    def __init__(self, window):
        self.window = window
        self._q = deque()

    def update(self, value, stamp):
        q = self._q
        while q and q[-1][0] <= value:
            q.pop()
        q.append((value, stamp))
        while q[0][1] <= stamp - self.window:
            q.popleft()

    def get(self):
        return self._q[0][0] if self._q else 0.0

    def reset(self, value, stamp):
        self._q.clear()
        self._q.append((value, stamp))


def pacing_gap(size_bytes, rate_bps):
    """Inter-send spacing for a packet of ``size_bytes`` at ``rate_bps``."""
    return size_bytes * 8.0 / rate_bps


class Bbr(CongestionControl):
    """Bottleneck-bandwidth and round-trip propagation time estimator.

    ``max_bw`` is in payload bytes per second, ``min_rtt`` in seconds and the
    window target is ``cwnd_gain * max_bw * min_rtt`` bytes.
    """

    name = "bbr"
    paced = True
    wants_rate_samples = True

    def __init__(self, mss=MSS_BYTES, initial_cwnd_segments=INITIAL_CWND_SEGMENTS, cwnd_gain=3.0,
                 cycle_start=2):
        super().__init__(mss, initial_cwnd_segments)
        self.initial_cwnd = self.cwnd
        self.cwnd_gain = cwnd_gain
        self.cycle_start = cycle_start
        self.bw_filter = WindowedMax(BW_WINDOW_ROUNDS)
        self.min_rtt = math.inf
        self.min_rtt_stamp = 0.0
        self.state = STARTUP
        self.pacing_gain = HIGH_GAIN
        self.round_count = 0
        self.next_round_delivered = 0.0
        self.round_start = False
        self.full_bw = 0.0
        self.full_bw_count = 0
        self.filled_pipe = False
        self.cycle_index = 0
        self.cycle_stamp = 0.0
        self.prior_cwnd = 0.0
        self.probe_rtt_done = None
        self.probe_rtt_round_done = False
        self.in_recovery = False
        self.delivered = 0.0
        self.pacing_rate = HIGH_GAIN * self.cwnd / 0.001
        self._has_rtt = False

    @property
    def max_bw(self):
        return self.bw_filter.get()

    @property
    def pacing_rate_bps(self):
        return self.pacing_rate * 8.0

    @property
    def in_slow_start(self):
        return self.state == STARTUP

    def mode(self):
        return self.state

    def bdp(self, gain=1.0):
        if self.min_rtt == math.inf:
            return self.initial_cwnd
        return gain * self.max_bw * self.min_rtt

    def target_cwnd(self):
        return self.bdp(self.cwnd_gain)

    # model -----------------------------------------------------------------

    def update_model(self, acked, delivered, prior_delivered, rate, rtt_sample, now, flight):
        self.delivered = delivered
        self.round_start = False
        if prior_delivered is not None and prior_delivered >= self.next_round_delivered:
            self.next_round_delivered = delivered
            self.round_count += 1
            self.round_start = True
        if rate is not None and rate > 0:
            self.bw_filter.update(rate, self.round_count)
        if self.state == PROBE_BW and self._next_cycle_phase(now, flight):
            self._advance_cycle(now)
        self._check_full_pipe()
        self._check_drain(now, flight)
        self._update_min_rtt(rtt_sample, now, flight)
        self._set_pacing_rate()
        self._set_cwnd(acked)

    def _next_cycle_phase(self, now, flight):
        full_length = now - self.cycle_stamp > self.min_rtt
        g = self.pacing_gain
        if g == 1.0:
            return full_length
        if g > 1.0:
            return full_length and flight >= self.bdp(g)
        return full_length or flight <= self.bdp(1.0)

    def _advance_cycle(self, now):
        self.cycle_index = (self.cycle_index + 1) % len(PACING_GAIN_CYCLE)
        self.cycle_stamp = now
        self.pacing_gain = PACING_GAIN_CYCLE[self.cycle_index]

    def _check_full_pipe(self):
        if self.filled_pipe or not self.round_start:
            return
        bw = self.max_bw
        if bw >= self.full_bw * 1.25:
            self.full_bw = bw
            self.full_bw_count = 0
            return
        self.full_bw_count += 1
        if self.full_bw_count >= 3:
            self.filled_pipe = True

    def _enter_probe_bw(self, now):
        self.state = PROBE_BW
        self.cycle_index = self.cycle_start
        self.cycle_stamp = now
        self.pacing_gain = PACING_GAIN_CYCLE[self.cycle_index]

    def _check_drain(self, now, flight):
        if self.state == STARTUP and self.filled_pipe:
            self.state = DRAIN
            self.pacing_gain = DRAIN_GAIN
        if self.state == DRAIN and flight <= self.bdp(1.0):
            self._enter_probe_bw(now)

    def _update_min_rtt(self, rtt_sample, now, flight):
        expired = now > self.min_rtt_stamp + MIN_RTT_WINDOW_S
        if rtt_sample is not None and (rtt_sample < self.min_rtt or expired):
            self.min_rtt = rtt_sample
            self.min_rtt_stamp = now
            if not self._has_rtt:
                self._has_rtt = True
                self.pacing_rate = HIGH_GAIN * self.cwnd / rtt_sample
        if expired and self.state != PROBE_RTT:
            self.state = PROBE_RTT
            self.pacing_gain = 1.0
            self.prior_cwnd = max(self.prior_cwnd, self.cwnd) if self.in_recovery else self.cwnd
            self.probe_rtt_done = None
        if self.state != PROBE_RTT:
            return
        if self.probe_rtt_done is None:
            if flight <= MIN_CWND_SEGMENTS * self.mss:
                self.probe_rtt_done = now + PROBE_RTT_DURATION_S
                self.probe_rtt_round_done = False
                self.next_round_delivered = self.delivered
            return
        if self.round_start:
            self.probe_rtt_round_done = True
        if self.probe_rtt_round_done and now > self.probe_rtt_done:
            self.min_rtt_stamp = now
            self.cwnd = max(self.cwnd, self.prior_cwnd)
            if self.filled_pipe:
                self._enter_probe_bw(now)
            else:
                self.state = STARTUP
                self.pacing_gain = HIGH_GAIN

    def _set_pacing_rate(self):
        bw = self.max_bw
        if bw <= 0:
            return
        rate = self.pacing_gain * bw
        if self.filled_pipe or rate > self.pacing_rate:
            self.pacing_rate = rate

    def _set_cwnd(self, acked):
        target = self.target_cwnd()
        if self.filled_pipe:
            self.cwnd = min(self.cwnd + acked, target)
        elif self.cwnd < target or self.delivered < self.initial_cwnd:
            self.cwnd += acked
        floor = MIN_CWND_SEGMENTS * self.mss
        if self.cwnd < floor:
            self.cwnd = float(floor)
        if self.state == PROBE_RTT and self.cwnd > floor:
            self.cwnd = float(floor)

    # loss hooks --------------------------------------------------------------

    def on_ack(self, acked, rtt_sample, now, flight):
        pass

    def on_dupack_loss(self, flight, now):
        self.prior_cwnd = self.cwnd if self.state != PROBE_RTT else max(self.cwnd, self.prior_cwnd)
        self.ssthresh = max(flight / 2.0, 2.0 * self.mss)
        self.cwnd = max(float(flight + self.mss), MIN_CWND_SEGMENTS * float(self.mss))
        self.in_recovery = True

    def exit_recovery(self, now):
        self.in_recovery = False
        if self.state != PROBE_RTT:
            self.cwnd = max(self.cwnd, self.prior_cwnd)

    def exit_loss_recovery(self, now):
        self.exit_recovery(now)

    def on_rto(self, flight, now, in_recovery=False):
        if not self.in_recovery:
            self.prior_cwnd = self.cwnd if self.state != PROBE_RTT else max(self.cwnd, self.prior_cwnd)
        self.ssthresh = max(flight / 2.0, 2.0 * self.mss)
        self.cwnd = MIN_CWND_SEGMENTS * float(self.mss)
        self.in_recovery = True
