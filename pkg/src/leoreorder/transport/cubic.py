"""Cubic window growth with a Reno-friendly region and HyStart slow-start exit."""
from __future__ import annotations

import math

from ..netem import MSS_BYTES
from .congestion import INITIAL_CWND_SEGMENTS, Reno, slow_start_increase

CUBIC_C = 0.4
CUBIC_BETA = 0.7


def cubic_k(w_max, beta=CUBIC_BETA, c=CUBIC_C):
    """Seconds for the cubic to climb back to ``w_max`` (segments) after a reduction to ``beta*w_max``."""
    return (w_max * (1.0 - beta) / c) ** (1.0 / 3.0)


def cubic_window(t, w_max, c=CUBIC_C, beta=CUBIC_BETA, w_est=0.0, k=None):
    """Window in segments ``t`` seconds into an epoch: max(W_cubic(t), w_est)."""
    if k is None:
        k = cubic_k(w_max, beta, c)
    return max(c * (t - k) ** 3 + w_max, w_est)


class Cubic(Reno):
    name = "cubic"

    def __init__(self, mss=MSS_BYTES, initial_cwnd_segments=INITIAL_CWND_SEGMENTS, c=CUBIC_C, beta=CUBIC_BETA,
                 fast_convergence=False, hystart=True):
        super().__init__(mss, initial_cwnd_segments)
        self.c = c
        self.beta = beta
        self.fast_convergence = fast_convergence
        self.alpha = 3.0 * (1.0 - beta) / (1.0 + beta)
        self.w_max = 0.0
        self.epoch_start = None
        self.k = 0.0
        self.origin = 0.0
        self.w_est = 0.0
        self.min_rtt = math.inf
        self.hystart = hystart
        self._acked_total = 0.0
        self._round_end = 0.0
        self._round_min = math.inf
        self._round_samples = 0
        self._delay_min = math.inf

    def _hystart(self, acked, rtt_sample, flight):
        # delay-increase exit: a round's early RTTs exceed the minimum since the last loss
        self._acked_total += acked
        if self._acked_total >= self._round_end:
            self._round_min = math.inf
            self._round_samples = 0
            self._round_end = self._acked_total + flight
        if rtt_sample is None or self._round_samples >= 8:
            return
        self._round_samples += 1
        if rtt_sample < self._round_min:
            self._round_min = rtt_sample
        if self._round_samples == 8 and self.cwnd >= 16 * self.mss:
            eta = min(max(self._delay_min / 8.0, 0.004), 0.016)
            if self._round_min >= self._delay_min + eta:
                self.ssthresh = self.cwnd

    def on_ack(self, acked, rtt_sample, now, flight):
        if rtt_sample is not None:
            if rtt_sample < self.min_rtt:
                self.min_rtt = rtt_sample
            if rtt_sample < self._delay_min:
                self._delay_min = rtt_sample
        if self.cwnd < self.ssthresh:
            self.cwnd = slow_start_increase(self.cwnd, self.ssthresh, acked, self.mss)
            if self.hystart:
                self._hystart(acked, rtt_sample, flight)
            return
        mss = self.mss
        cw = self.cwnd / mss
        if self.epoch_start is None:
            self.epoch_start = now
            if cw < self.w_max:
                self.k = ((self.w_max - cw) / self.c) ** (1.0 / 3.0)
                self.origin = self.w_max
            else:
                self.k = 0.0
                self.origin = cw
            self.w_est = cw
        rtt = self.min_rtt if self.min_rtt < math.inf else 0.0
        t = now - self.epoch_start + rtt
        target = min(self.c * (t - self.k) ** 3 + self.origin, 1.5 * cw)
        segs = acked / mss
        self.w_est += self.alpha * segs / cw
        if target > cw:
            cw += (target - cw) / cw * segs
        if self.w_est > cw:
            cw = self.w_est
        self.cwnd = cw * mss

    def _loss(self):
        cw = self.cwnd / self.mss
        if self.fast_convergence and cw < self.w_max:
            self.w_max = cw * (1.0 + self.beta) / 2.0
        else:
            self.w_max = cw
        self.epoch_start = None
        self._delay_min = math.inf
        self._round_end = self._acked_total

    def on_dupack_loss(self, flight, now):
        self._loss()
        self.ssthresh = max(self.cwnd * self.beta, 2.0 * self.mss)
        self.cwnd = self.ssthresh + 3 * self.mss

    def on_rto(self, flight, now, in_recovery=False):
        if not in_recovery:
            self._loss()
        super().on_rto(flight, now, in_recovery)
