"""Congestion-controller interface and NewReno."""
from __future__ import annotations

import math

from ..netem import MSS_BYTES

INITIAL_CWND_SEGMENTS = 10
# slow-start growth per ACK is capped at this many MSS (appropriate byte counting)
ABC_LIMIT_SEGMENTS = 2


def slow_start_increase(cwnd, ssthresh, acked, mss):
    """One MSS per acknowledged MSS (at most ``ABC_LIMIT_SEGMENTS`` per ACK), up to ``ssthresh``."""
    return min(cwnd + min(acked, ABC_LIMIT_SEGMENTS * mss), max(ssthresh, cwnd))


class CongestionControl:
    """Event hooks called by :class:`~leoreorder.transport.tcp.TcpSender`.

    All windows are in bytes. ``flight`` arguments are bytes outstanding
    (``snd_nxt - snd_una``) when the event is processed.
    """

    name = "base"
    paced = False
    wants_rate_samples = False

    def __init__(self, mss=MSS_BYTES, initial_cwnd_segments=INITIAL_CWND_SEGMENTS):
        self.mss = mss
        self.cwnd = float(initial_cwnd_segments * mss)
        self.ssthresh = math.inf

    @property
    def pacing_rate_bps(self):
        return None

    @property
    def cwnd_bytes(self):
        return self.cwnd

    @property
    def in_slow_start(self):
        return self.cwnd < self.ssthresh

    def mode(self):
        """Controller-specific state label, or None."""
        return None

    def on_ack(self, acked, rtt_sample, now, flight):
        raise NotImplementedError

    def on_dupack_loss(self, flight, now):
        """Third duplicate ACK: enter fast recovery."""
        raise NotImplementedError

    def on_recovery_dupack(self, flight):
        pass

    def on_partial_ack(self, acked):
        pass

    def exit_recovery(self, now):
        """Full ACK ends fast recovery."""

    def exit_loss_recovery(self, now):
        """Everything outstanding at the last timeout has been acknowledged."""

    def on_rto(self, flight, now, in_recovery=False):
        """Retransmission timeout. ``in_recovery`` is set when the timer fires
        during an ongoing fast or timeout recovery, whose window reduction
        already happened."""
        raise NotImplementedError

    def update_model(self, acked, delivered, prior_delivered, rate, rtt_sample, now, flight):
        """Per-ACK delivery-rate sample; only used by model-based controllers."""

    def tick(self, now):
        """Periodic hook; no controller here reacts to route changes."""


class Reno(CongestionControl):
    """AIMD with NewReno fast recovery.

    Congestion avoidance uses byte counting, so one window of full-sized ACKs
    grows cwnd by exactly one MSS.
    """

    name = "reno"

    def __init__(self, mss=MSS_BYTES, initial_cwnd_segments=INITIAL_CWND_SEGMENTS):
        super().__init__(mss, initial_cwnd_segments)
        self._acc = 0.0

    def on_ack(self, acked, rtt_sample, now, flight):
        if self.cwnd < self.ssthresh:
            self.cwnd = slow_start_increase(self.cwnd, self.ssthresh, acked, self.mss)
            return
        self._acc += acked
        while self._acc >= self.cwnd:
            self._acc -= self.cwnd
            self.cwnd += self.mss

    def _reduce(self, flight):
        return max(flight / 2.0, 2.0 * self.mss)

    def on_dupack_loss(self, flight, now):
        self.ssthresh = self._reduce(flight)
        self.cwnd = self.ssthresh + 3 * self.mss
        self._acc = 0.0

    def on_recovery_dupack(self, flight):
        # no more inflation than there are segments outstanding
        if self.cwnd < self.ssthresh + flight:
            self.cwnd += self.mss

    def on_partial_ack(self, acked):
        self.cwnd = max(self.cwnd - acked, float(self.mss))
        if acked >= self.mss:
            self.cwnd += self.mss

    def exit_recovery(self, now):
        self.cwnd = max(self.ssthresh, float(self.mss))
        self._acc = 0.0

    def on_rto(self, flight, now, in_recovery=False):
        if not in_recovery:
            self.ssthresh = max(flight / 2.0, 2.0 * self.mss)
        self.cwnd = float(self.mss)
        self._acc = 0.0
