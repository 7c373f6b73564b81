import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leoreorder.events import EventQueue
from leoreorder.netem import ACK, DATA, MSS_BYTES, Packet
from leoreorder.transport import (
    Bbr,
    Cubic,
    Reno,
    RttEstimator,
    TcpReceiver,
    TcpSender,
    cubic_k,
    cubic_window,
    make_controller,
    pacing_gap,
)
from leoreorder.transport.bbr import PACING_GAIN_CYCLE, PROBE_BW, WindowedMax
from leoreorder.transport.tcp import CONGESTION_AVOIDANCE, FAST_RECOVERY, RTO_RECOVERY, SLOW_START

MSS = MSS_BYTES


class FakeNet:
    def __init__(self):
        self.sent = []
        self.acks = []

    def inject(self, pkt, t):
        self.sent.append((t, pkt))

    def send_ack(self, pkt, t):
        self.acks.append(pkt)

    def retransmits(self):
        return [(t, p.seq) for t, p in self.sent if p.retx]


def ack(n):
    return Packet("flow0", ACK, size=40, payload=0, ack_no=n)


def data(seq):
    return Packet("flow0", DATA, seq=seq)


def make_sender(cc=None, **kw):
    sim = EventQueue()
    net = FakeNet()
    snd = TcpSender(sim, net, cc or Reno(), **kw)
    return sim, net, snd


def at(sim, t):
    sim.run_until(t)
    return t


# RTT estimation ----------------------------------------------------------------


def test_first_rtt_sample():
    est = RttEstimator()
    assert est.update(0.060) == pytest.approx(0.2)
    assert est.srtt == pytest.approx(0.060)
    assert est.rttvar == pytest.approx(0.030)


def test_srtt_smoothing():
    est = RttEstimator()
    est.update(0.060)
    est.update(0.030)
    assert est.srtt == pytest.approx(0.05625, abs=1e-12)


def test_constant_samples_converge():
    est = RttEstimator()
    for _ in range(200):
        est.update(0.1)
    assert est.srtt == pytest.approx(0.1)
    assert est.rttvar < 1e-9


def test_rto_clamp_and_backoff():
    est = RttEstimator()
    est.update(20.0)
    assert est.rto == 60.0
    est = RttEstimator()
    est.update(0.05)
    assert est.backoff() == pytest.approx(0.4)
    for _ in range(20):
        est.backoff()
    assert est.rto == 60.0
    with pytest.raises(ValueError):
        est.update(-1)


# receiver ------------------------------------------------------------------------


def test_receiver_in_order():
    rx = TcpReceiver()
    assert rx.on_data(data(0), 0).ack_no == 1460


def test_receiver_gap_gives_dupack():
    rx = TcpReceiver()
    assert rx.on_data(data(1460), 0).ack_no == 0


def test_receiver_cumulative_jump():
    rx = TcpReceiver()
    rx.on_data(data(1460), 0)
    assert rx.on_data(data(0), 0).ack_no == 2920
    assert rx.out_of_order == set()


def test_receiver_counts_duplicates():
    rx = TcpReceiver()
    rx.on_data(data(0), 0)
    rx.on_data(data(0), 0)
    rx.on_data(data(2920), 0)
    rx.on_data(data(2920), 0)
    assert rx.duplicates == 2


@settings(max_examples=100)
@given(st.permutations(range(30)))
def test_receiver_any_arrival_order(perm):
    rx = TcpReceiver()
    acks = [rx.on_data(data(i * MSS), 0).ack_no for i in perm]
    # one ACK per segment; the final one covers everything
    assert len(acks) == 30 and acks[-1] == 30 * MSS
    assert all(b >= a for a, b in zip(acks, acks[1:]))
    # the cumulative point equals the longest received prefix
    seen = set()
    for i, a in zip(perm, acks):
        seen.add(i)
        k = 0
        while k in seen:
            k += 1
        assert a == k * MSS


# sender ------------------------------------------------------------------------


def test_initial_window_sends_ten():
    sim, net, snd = make_sender()
    assert len(snd.start()) == 10
    assert snd.try_send() == []
    assert snd.flight == 10 * MSS


def test_three_dupacks_trigger_fast_retransmit():
    sim, net, snd = make_sender()
    snd.start()
    now = at(sim, 0.05)
    for _ in range(3):
        snd.on_ack(ack(0), now)
    assert net.retransmits() == [(0.05, 0)]
    assert snd.phase == FAST_RECOVERY
    assert snd.fast_retransmits == 1


def test_two_dupacks_then_new_ack_do_not_retransmit():
    sim, net, snd = make_sender()
    snd.start()
    now = at(sim, 0.05)
    snd.on_ack(ack(0), now)
    snd.on_ack(ack(0), now)
    snd.on_ack(ack(2 * MSS), now)
    assert net.retransmits() == []
    assert snd.dupack_count == 0


def test_partial_then_full_ack_exits_recovery():
    sim, net, snd = make_sender()
    snd.start()
    now = at(sim, 0.05)
    for _ in range(3):
        snd.on_ack(ack(0), now)
    high = snd.snd_max
    snd.on_ack(ack(3 * MSS), now)
    assert snd.phase == FAST_RECOVERY
    assert net.retransmits()[-1] == (0.05, 3 * MSS)  # next hole retransmitted
    snd.on_ack(ack(high), now)
    assert snd.phase == CONGESTION_AVOIDANCE
    assert snd.cc.cwnd == snd.cc.ssthresh == 5 * MSS


def test_rto_timing_backoff_and_slow_start_restart():
    sim, net, snd = make_sender()
    snd.start()
    now = at(sim, 0.06)
    snd.on_ack(ack(MSS), now)
    assert snd.rtt.rto == pytest.approx(0.2)
    sim.run_until(1.0)
    times = [t for t, seq in net.retransmits() if seq == MSS]
    assert times[0] == pytest.approx(0.26)
    assert times[1] - times[0] == pytest.approx(2 * (times[0] - 0.06))
    assert snd.rto_count == 2
    assert snd.phase == RTO_RECOVERY
    assert snd.cc.cwnd == MSS
    snd.on_ack(ack(snd.snd_max), sim.now)
    assert snd.phase == SLOW_START


def test_karn_rule_skips_retransmitted_samples():
    sim, net, snd = make_sender()
    snd.start()
    now = at(sim, 0.05)
    for _ in range(3):
        snd.on_ack(ack(0), now)
    now = at(sim, 0.5)
    snd.on_ack(ack(MSS), now)
    assert snd.rtt.srtt is None


# congestion control -----------------------------------------------------------


def test_reno_congestion_avoidance_one_mss_per_rtt():
    r = Reno()
    r.cwnd, r.ssthresh = 10.0 * MSS, 5.0 * MSS
    for _ in range(10):
        r.on_ack(MSS, None, 0, 0)
    assert r.cwnd == 11 * MSS


def test_reno_halving():
    r = Reno()
    r.cwnd = 8.0 * MSS
    r.on_dupack_loss(8 * MSS, 0)
    assert r.ssthresh == 4 * MSS
    assert r.cwnd == 7 * MSS  # ssthresh + 3 MSS inflation
    r.exit_recovery(0)
    assert r.cwnd == 4 * MSS


def test_reno_slow_start_doubles():
    r = Reno(initial_cwnd_segments=1)
    for _ in range(3):
        for _ in range(int(r.cwnd // MSS)):
            r.on_ack(MSS, None, 0, 0)
    assert r.cwnd == 8 * MSS


def test_reno_rto():
    r = Reno()
    r.cwnd = 20.0 * MSS
    r.on_rto(20 * MSS, 0)
    assert (r.cwnd, r.ssthresh) == (MSS, 10 * MSS)
    r.on_rto(40 * MSS, 1, in_recovery=True)
    assert r.ssthresh == 10 * MSS


def test_cubic_k_and_plateau():
    assert cubic_k(100, 0.7, 0.4) == pytest.approx(4.2172, abs=1e-3)
    k = cubic_k(100)
    assert cubic_window(k, 100) == pytest.approx(100, abs=1e-9)
    assert cubic_window(0, 100) == pytest.approx(70, abs=1e-9)
    assert cubic_window(0, 100, w_est=80) == 80


@settings(max_examples=100)
@given(st.floats(1, 1e5), st.floats(0.5, 0.95), st.floats(0.05, 2.0))
def test_cubic_plateau_property(w_max, beta, c):
    assert cubic_window(cubic_k(w_max, beta, c), w_max, c, beta) == pytest.approx(w_max, rel=1e-9)


def test_cubic_loss_reduction():
    cc = Cubic()
    cc.cwnd = 100.0 * MSS
    cc.on_dupack_loss(100 * MSS, 0)
    assert cc.w_max == 100
    assert cc.ssthresh == pytest.approx(70 * MSS)


def test_cubic_regrows_to_w_max_near_k():
    cc = Cubic()
    cc.cwnd, cc.ssthresh, cc.w_max = 70.0 * MSS, 70.0 * MSS, 100.0
    cc.min_rtt = 0.0
    k = cubic_k(100)
    t = 0.0
    while t < k:
        cc.on_ack(MSS, None, t, cc.cwnd)
        t += 0.001
    assert cc.cwnd / MSS == pytest.approx(100, abs=1.0)


def test_bbr_window_is_three_bdp():
    b = Bbr()
    delivered = 0.0
    for k in range(60):
        prior = delivered
        delivered += 100 * MSS
        b.update_model(100 * MSS, delivered, prior, 12.5e6, 0.06, k * 0.06, 10 * MSS)
    assert b.state == PROBE_BW
    assert b.cwnd == b.cwnd_gain * b.max_bw * b.min_rtt
    assert b.target_cwnd() == pytest.approx(2.25e6, rel=1e-12)
    assert b.bdp() == pytest.approx(750e3, rel=1e-12)


def test_bbr_min_rtt_filter():
    b = Bbr()
    b.update_model(MSS, MSS, 0, None, 0.06, 0.0, MSS)
    b.update_model(MSS, 2 * MSS, MSS, None, 0.05, 0.1, MSS)
    assert b.min_rtt == 0.05
    b.update_model(MSS, 3 * MSS, 2 * MSS, None, 0.07, 0.2, MSS)
    assert b.min_rtt == 0.05


def test_bbr_rto_keeps_model():
    b = Bbr()
    b.bw_filter.update(1e6, 0)
    b.min_rtt = 0.05
    b.on_rto(100 * MSS, 0)
    assert b.cwnd == 4 * MSS
    assert (b.max_bw, b.min_rtt) == (1e6, 0.05)


def test_pacing():
    assert pacing_gap(1500, 100e6) == pytest.approx(120e-6)
    assert sum(PACING_GAIN_CYCLE) / len(PACING_GAIN_CYCLE) == 1.0


def test_windowed_max():
    w = WindowedMax(10)
    w.update(5.0, 0)
    w.update(3.0, 5)
    assert w.get() == 5.0
    w.update(2.0, 10)
    assert w.get() == 3.0


def test_make_controller():
    assert isinstance(make_controller("CUBIC"), Cubic)
    with pytest.raises(ValueError):
        make_controller("vegas")
    assert math.isinf(make_controller("reno").ssthresh)
