"""Greedy TCP sender and cumulative-ACK receiver.

Sequence numbers are byte offsets; every data segment carries one MSS of
payload. Loss recovery is NewReno (no SACK): three duplicate ACKs trigger a
fast retransmit, partial ACKs retransmit the next hole, and the retransmission
timer falls back to go-back-N.
"""
from __future__ import annotations

from ..netem import ACK, ACK_BYTES, DATA, MSS_BYTES, MTU_BYTES, Packet
from .bbr import pacing_gap

SLOW_START = "slow-start"
CONGESTION_AVOIDANCE = "congestion-avoidance"
FAST_RECOVERY = "fast-recovery"
RTO_RECOVERY = "rto-recovery"

DUPACK_THRESHOLD = 3


class RttEstimator:
    """Smoothed RTT, RTT variance and retransmission timeout (seconds)."""

    def __init__(self, initial_rto=1.0, rto_min=0.2, rto_max=60.0):
        self.srtt = None
        self.rttvar = None
        self.rto = initial_rto
        self.rto_min = rto_min
        self.rto_max = rto_max

    def update(self, sample):
        if sample < 0:
            raise ValueError("negative RTT sample")
        if self.srtt is None:
            self.srtt = sample
            self.rttvar = sample / 2.0
        else:
            self.rttvar = 0.75 * self.rttvar + 0.25 * abs(self.srtt - sample)
            self.srtt = 0.875 * self.srtt + 0.125 * sample
        self.rto = min(max(self.srtt + 4.0 * self.rttvar, self.rto_min), self.rto_max)
        return self.rto

    def backoff(self):
        self.rto = min(self.rto * 2.0, self.rto_max)
        return self.rto


class TcpReceiver:
    """Cumulative-ACK receiver; one ACK per data segment, no delayed ACKs."""

    def __init__(self, net=None, flow_id="flow0", mss=MSS_BYTES):
        self.net = net
        self.flow_id = flow_id
        self.mss = mss
        self.rcv_next = 0
        self.out_of_order = set()
        self.duplicates = 0
        self.data_received = 0

    @property
    def delivered_in_order_bytes(self):
        return self.rcv_next

    def on_data(self, pkt: Packet, t: float) -> Packet:
        self.data_received += 1
        seq = pkt.seq
        nxt = self.rcv_next
        if seq == nxt:
            nxt += pkt.payload
            ooo = self.out_of_order
            while nxt in ooo:
                ooo.remove(nxt)
                nxt += self.mss
            self.rcv_next = nxt
        elif seq > nxt:
            if seq in self.out_of_order:
                self.duplicates += 1
            else:
                self.out_of_order.add(seq)
        else:
            self.duplicates += 1
        ack = Packet(self.flow_id, ACK, seq=0, size=ACK_BYTES, payload=0, ack_no=self.rcv_next)
        if self.net is not None:
            self.net.send_ack(ack, t)
        return ack


class TcpSender:
    """Greedy sender (unbounded application data) driven by a congestion controller.

    Args:
        sim: event queue supplying ``now`` and timers.
        net: object with ``inject(packet, t)``.
        cc: a :class:`~leoreorder.transport.congestion.CongestionControl`.
        log: optional list receiving ``(time_s, kind, detail)`` trace events.
        impatient: restart the retransmission timer only on the first partial
            ACK of a recovery episode; otherwise on every partial ACK.
    """

    def __init__(self, sim, net, cc, flow_id="flow0", mss=MSS_BYTES, packet_size=MTU_BYTES,
                 initial_rto=1.0, rto_min=0.2, rto_max=60.0, log=None, impatient=True):
        self.sim = sim
        self.net = net
        self.cc = cc
        self.flow_id = flow_id
        self.mss = mss
        self.packet_size = packet_size
        self.rtt = RttEstimator(initial_rto, rto_min, rto_max)
        self.log = log
        self.impatient = impatient
        self.snd_una = 0
        self.snd_nxt = 0
        self.snd_max = 0
        # seq -> [send_time, retransmitted, delivered, delivered_time, first_sent_time]
        self.in_flight = {}
        self.dupack_count = 0
        self.recover = -1
        self.phase = SLOW_START
        self.retransmissions = 0
        self.fast_retransmits = 0
        self.rto_count = 0
        self._partial_seen = False
        self._timer_at = None
        self._timer_event = None
        self._next_send = 0.0
        self._pacing_event = None
        self._paced = cc.paced
        self._rate = cc.wants_rate_samples
        self.delivered = 0.0
        self.delivered_time = 0.0
        self.first_sent_time = 0.0
        self._sacked_credit = 0.0
        self._mode = cc.mode()

    @property
    def srtt_s(self):
        return self.rtt.srtt

    @property
    def flight(self):
        return self.snd_nxt - self.snd_una

    def start(self):
        return self.try_send()

    # sending -----------------------------------------------------------------

    def try_send(self):
        """Emit new segments while the window (and for BBR the pacing rate) allows."""
        sent = []
        now = self.sim.now
        mss = self.mss
        cc = self.cc
        while self.snd_nxt - self.snd_una + mss <= cc.cwnd:
            if self._paced:
                if now < self._next_send:
                    if self._pacing_event is None:
                        self._pacing_event = self._next_send
                        self.sim.schedule(self._next_send, self._on_pacing)
                    break
                self._next_send = now + pacing_gap(mss, cc.pacing_rate_bps)
            sent.append(self._transmit(self.snd_nxt, now))
            self.snd_nxt += mss
            if self.snd_nxt > self.snd_max:
                self.snd_max = self.snd_nxt
        return sent

    def _on_pacing(self, _):
        self._pacing_event = None
        self.try_send()

    def _transmit(self, seq, now):
        retx = seq < self.snd_max
        if self._rate and self.snd_nxt == self.snd_una:
            self.first_sent_time = now
            self.delivered_time = now
        entry = self.in_flight.get(seq)
        if entry is None:
            self.in_flight[seq] = [now, retx, self.delivered, self.delivered_time, self.first_sent_time]
        else:
            entry[0] = now
            entry[1] = True
            entry[2] = self.delivered
            entry[3] = self.delivered_time
            entry[4] = self.first_sent_time
            retx = True
        pkt = Packet(self.flow_id, DATA, seq=seq, size=self.packet_size, payload=self.mss, retx=retx)
        if retx:
            self.retransmissions += 1
            if self.log is not None:
                self.log.append((now, "retransmission", f"seq={seq}"))
        self.net.inject(pkt, now)
        if self._timer_at is None:
            self._arm(now + self.rtt.rto)
        return pkt

    # timer -------------------------------------------------------------------

    def _arm(self, deadline):
        self._timer_at = deadline
        if self._timer_event is None or deadline < self._timer_event:
            self._timer_event = deadline
            self.sim.schedule(deadline, self._on_timer, deadline)

    def _on_timer(self, stamp):
        if stamp != self._timer_event:
            return
        self._timer_event = None
        if self._timer_at is None:
            return
        now = self.sim.now
        if now < self._timer_at:
            self._arm(self._timer_at)
            return
        self._on_rto(now)

    def _on_rto(self, now):
        self.rto_count += 1
        flight = self.snd_max - self.snd_una
        if self.log is not None:
            self.log.append((now, "rto", f"snd_una={self.snd_una} rto={self.rtt.rto:.3f}"))
        # a timeout inside recovery keeps the reduction made when recovery began;
        # the outstanding data there includes window inflation
        self.cc.on_rto(flight, now, self.phase in (FAST_RECOVERY, RTO_RECOVERY))
        self.recover = self.snd_max - 1
        self.dupack_count = 0
        self.snd_nxt = self.snd_una
        self._set_phase(RTO_RECOVERY, now)
        self.rtt.backoff()
        self._timer_at = None
        self._next_send = now
        self.try_send()
        if self._timer_at is None:
            self._arm(now + self.rtt.rto)

    # acknowledgments ---------------------------------------------------------

    def on_ack(self, pkt: Packet, now: float):
        ack = pkt.ack_no
        una = self.snd_una
        cc = self.cc
        if ack > una:
            self._new_ack(ack, now)
        elif ack == una and una < self.snd_max:
            self.dupack_count += 1
            if self._rate:
                self.delivered += self.mss
                self._sacked_credit += self.mss
                cc.update_model(self.mss, self.delivered, None, None, None, now, self.snd_nxt - una)
            if self.phase == FAST_RECOVERY:
                cc.on_recovery_dupack(self.snd_nxt - una)
            elif self.dupack_count == DUPACK_THRESHOLD and una > self.recover:
                self._enter_fast_recovery(now)
        else:
            return
        self.try_send()
        if self.phase != FAST_RECOVERY and self.phase != RTO_RECOVERY:
            phase = SLOW_START if cc.in_slow_start else CONGESTION_AVOIDANCE
            if phase != self.phase:
                self._set_phase(phase, now)
        if self._rate and self.log is not None:
            mode = cc.mode()
            if mode != self._mode:
                self.log.append((now, "phase-change", f"bbr:{self._mode}->{mode}"))
                self._mode = mode

    def _new_ack(self, ack, now):
        una = self.snd_una
        prior_flight = self.snd_nxt - una
        acked = ack - una
        in_flight = self.in_flight
        any_retx = False
        last_send = -1.0
        last = None
        seq = una
        pop = in_flight.pop
        while seq < ack:
            entry = pop(seq, None)
            if entry is not None:
                if entry[1]:
                    any_retx = True
                if entry[0] > last_send:
                    last_send = entry[0]
                    last = entry
            seq += self.mss
        self.snd_una = ack
        if self.snd_nxt < ack:
            self.snd_nxt = ack
        self.dupack_count = 0
        sample = None
        if not any_retx and last is not None:
            sample = now - last[0]
            self.rtt.update(sample)
        cc = self.cc
        if self._rate:
            use = min(self._sacked_credit, max(0.0, acked - self.mss))
            self._sacked_credit -= use
            self.delivered += acked - use
            self.delivered_time = now
            rate = None
            prior_delivered = None
            if last is not None:
                prior_delivered = last[2]
                self.first_sent_time = last[0]
                interval = max(last[0] - last[4], now - last[3])
                # a cumulative jump over retransmitted holes does not measure the path
                if interval > 0 and not any_retx:
                    rate = (self.delivered - last[2]) / interval
                    if interval < getattr(cc, "min_rtt", 0.0):
                        rate = None
            cc.update_model(acked, self.delivered, prior_delivered, rate, sample, now, prior_flight)
        flight = self.snd_nxt - ack
        phase = self.phase
        if phase == FAST_RECOVERY:
            if ack > self.recover:
                cc.exit_recovery(now)
                self._set_phase(SLOW_START if cc.in_slow_start else CONGESTION_AVOIDANCE, now)
            else:
                cc.on_partial_ack(acked)
                self._transmit(ack, now)
                if not (self.impatient and self._partial_seen):
                    self._partial_seen = True
                    self._restart_timer(now)
                return
        elif phase == RTO_RECOVERY:
            cc.on_ack(acked, sample, now, flight)
            if ack > self.recover:
                # duplicates of go-back-N segments still in flight must not trigger a fast retransmit
                self.recover = self.snd_max
                cc.exit_loss_recovery(now)
                self._set_phase(SLOW_START if cc.in_slow_start else CONGESTION_AVOIDANCE, now)
        else:
            cc.on_ack(acked, sample, now, flight)
        self._restart_timer(now)

    def _restart_timer(self, now):
        if self.snd_una < self.snd_max:
            self._arm(now + self.rtt.rto)
        else:
            self._timer_at = None

    def _enter_fast_recovery(self, now):
        self.fast_retransmits += 1
        self.recover = self.snd_max - 1
        self._partial_seen = False
        self.cc.on_dupack_loss(self.snd_nxt - self.snd_una, now)
        self._set_phase(FAST_RECOVERY, now)
        self._transmit(self.snd_una, now)
        self._arm(now + self.rtt.rto)

    def _set_phase(self, phase, now):
        if self.log is not None and phase != self.phase:
            self.log.append((now, "phase-change", f"{self.phase}->{phase}"))
        self.phase = phase
