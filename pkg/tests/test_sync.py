import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxysync.errors import BadMagic, MalformedBody, TruncatedBody, Underflow, UnknownVersion
from proxysync.geometry import Pose2
from proxysync.sync import (HEADER_SIZE, ChannelModel, DelayBuffer, EntitySnapshot, Envelope, Kind, Link, Replica,
                            ReliableReceiver, ReliableSender, channel_deliver, decode, delayed_view, encode,
                            mask_check, pose_body, publish_due, reconcile, run_reliable_trial,
                            run_replication_trial, snapshot_of)

bodies = st.dictionaries(st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True),
                         st.one_of(st.integers(-1000, 1000), st.floats(-100, 100), st.text(max_size=8),
                                   st.booleans()), max_size=5)
envelopes = st.builds(Envelope, st.integers(0, 2**32 - 1), st.floats(0, 1e5), st.integers(0, 255),
                      st.sampled_from(list(Kind)), bodies)


class TestCodec:
    def test_pose_update_header(self):
        data = encode(Envelope(7, 0.0, 1, Kind.POSE_UPDATE, {}))
        assert data[:11] == bytes.fromhex("4850525801010100000007")
        assert len(data) == HEADER_SIZE == 21

    def test_game_event_header(self):
        data = encode(Envelope(258, 1.5, 2, Kind.GAME_EVENT, {"cell": 5}))
        body = b"cell=5"
        assert data == (bytes.fromhex("48505258" "01" "04" "02" "00000102" "000000000016e360" "0006") + body)

    def test_ack_header(self):
        data = encode(Envelope(1, 0.25, 255, Kind.ACK, {"ack": 3}))
        assert data[:HEADER_SIZE].hex() == "4850525801" "05" "ff" "00000001" "000000000003d090" "0005"

    def test_short_input(self):
        with pytest.raises(TruncatedBody):
            decode(b"HPR")

    def test_bad_magic(self):
        with pytest.raises(BadMagic):
            decode(b"XXXX" + bytes(17))

    def test_unknown_version(self):
        data = bytearray(encode(Envelope(1, 0.0, 1, Kind.ACK, {})))
        data[4] = 9
        with pytest.raises(UnknownVersion):
            decode(bytes(data))

    def test_truncated_body(self):
        data = encode(Envelope(1, 0.0, 1, Kind.POSE_UPDATE, pose_body("mug", Pose2.at(0.1, 0.2))))
        with pytest.raises(TruncatedBody):
            decode(data[:-3])

    def test_malformed_body(self):
        data = encode(Envelope(1, 0.0, 1, Kind.ACK, {"ack": 1}))
        bad = data[:HEADER_SIZE] + b"ack=="
        with pytest.raises(MalformedBody):
            decode(bad)
        with pytest.raises(MalformedBody):
            decode(data + b"x")

    @settings(max_examples=300)
    @given(envelopes)
    def test_round_trip(self, env):
        assert decode(encode(env)) == env

    @given(envelopes, envelopes)
    def test_injective(self, a, b):
        if a != b:
            assert encode(a) != encode(b)


def _msgs(n, room=1):
    return [Envelope(i, i * 0.01, room, Kind.POSE_UPDATE, {"i": i}) for i in range(n)]


class TestChannel:
    def test_lossless(self):
        assert len(channel_deliver(_msgs(50), ChannelModel(drop_prob=0.0))) == 50

    def test_total_loss(self):
        assert channel_deliver(_msgs(50), ChannelModel(drop_prob=1.0)) == []

    def test_seeded_rerun(self):
        model = ChannelModel(drop_prob=0.2, seed=42)
        a = channel_deliver(_msgs(1000), model)
        b = channel_deliver(_msgs(1000), model)
        assert a == b
        assert 700 < len(a) < 900

    def test_never_before_send(self):
        model = ChannelModel(base_latency=0.0, jitter=0.5, seed=1)
        assert all(at >= e.sent_at for at, e in channel_deliver(_msgs(200), model))

    def test_batching_does_not_change_schedule(self):
        model = ChannelModel(drop_prob=0.3, seed=5)
        whole = channel_deliver(_msgs(100), model)
        parts = sorted(channel_deliver(_msgs(100)[:40], model) + channel_deliver(_msgs(100)[40:], model),
                       key=lambda p: (p[0], p[1].seq))
        assert [(a, e.seq) for a, e in whole] == [(a, e.seq) for a, e in parts]

    def test_bad_model(self):
        with pytest.raises(ValueError):
            ChannelModel(drop_prob=1.5)
        with pytest.raises(ValueError):
            ChannelModel(base_latency=-0.1)

    def test_link_delivers_in_time(self):
        link = Link(ChannelModel(base_latency=0.1, jitter=0.0), dest=2)
        link.send(_msgs(3), now=0.0)
        assert link.receive(0.05) == []
        assert [e.seq for e in link.receive(0.2)] == [0, 1, 2]


def snap(eid, t, seq, room, x=0.0):
    return EntitySnapshot(eid, Pose2.at(x, 0), (t, seq, room))


class TestReconcile:
    def test_empty(self):
        assert reconcile({}, snap("a", 1.0, 1, 1))["a"].stamp == (1.0, 1, 1)

    def test_stale_ignored(self):
        rep = reconcile({}, snap("a", 5.0, 3, 1, x=0.1))
        assert reconcile(rep, snap("a", 5.0, 2, 1, x=0.2))["a"].pose.position.x == 0.1

    def test_room_tie_break(self):
        rep = reconcile({}, snap("a", 5.0, 3, 1, x=0.1))
        assert reconcile(rep, snap("a", 5.0, 3, 2, x=0.2))["a"].pose.position.x == 0.2

    @given(st.lists(st.tuples(st.sampled_from("ab"), st.integers(0, 3), st.integers(0, 3), st.integers(1, 2)),
                    min_size=1, max_size=8), st.randoms())
    def test_order_and_duplicates_do_not_matter(self, items, rnd):
        snaps = [snap(e, float(t), s, r, x=t + s / 10 + r / 100) for e, t, s, r in items]
        shuffled = snaps + rnd.sample(snaps, len(snaps))
        rnd.shuffle(shuffled)
        a, b = {}, {}
        for s in snaps:
            a = reconcile(a, s)
        for s in shuffled:
            b = reconcile(b, s)
        assert a == b

    def test_replica_apply_reports_change(self):
        r = Replica()
        env = Envelope(1, 0.5, 1, Kind.POSE_UPDATE, pose_body("mug", Pose2.at(0.1, 0.2, 0.3)))
        assert r.apply(snapshot_of(env))
        assert not r.apply(snapshot_of(env))
        assert r.poses()["mug"] == Pose2.at(0.1, 0.2, 0.3)


class TestReliable:
    def test_lossless_in_order(self):
        tx, rx = ReliableSender(1), ReliableReceiver(2)
        got = []
        for i in range(5):
            delivered, _ = rx.receive(tx.send({"n": i}, 0.0), 0.0)
            got += delivered
        assert got == [{"n": i} for i in range(5)]

    def test_gap_buffered_until_retransmit(self):
        tx, rx = ReliableSender(1), ReliableReceiver(2)
        e1, e2, e3 = (tx.send({"n": i}, 0.0) for i in (1, 2, 3))
        assert rx.receive(e1, 0.0)[0] == [{"n": 1}]
        delivered, ack = rx.receive(e3, 0.01)
        assert delivered == []
        assert ack.body["ack"] == 1
        tx.on_ack(ack)
        resent = tx.poll(0.2)
        assert [e.seq for e in resent] == [2, 3]
        delivered, ack = rx.receive(resent[0], 0.25)
        assert delivered == [{"n": 2}, {"n": 3}]
        tx.on_ack(ack)
        assert tx.unacked == {}

    def test_duplicate_discarded(self):
        tx, rx = ReliableSender(1), ReliableReceiver(2)
        envs = [tx.send({"n": i}, 0.0) for i in range(4)]
        for e in envs:
            rx.receive(e, 0.0)
        assert rx.receive(envs[3], 0.1)[0] == []

    def test_no_retransmit_before_interval(self):
        tx = ReliableSender(1)
        tx.send({"n": 1}, 0.0)
        assert tx.poll(0.1) == []
        assert len(tx.poll(0.2)) == 1

    @pytest.mark.parametrize("seed", range(10))
    def test_exactly_once_under_loss(self, seed):
        sent, delivered = run_reliable_trial(seed, drop=0.4)
        assert delivered == sent


class TestDelayBuffer:
    def test_zero_delay_latest(self):
        buf = DelayBuffer(0.0)
        buf.push(0.0, Pose2.at(0, 0))
        buf.push(0.1, Pose2.at(0.3, 0))
        assert delayed_view(buf, 0.1) == Pose2.at(0.3, 0)

    def test_interpolation(self):
        buf = DelayBuffer(1.0)
        buf.push(0.0, Pose2.at(0, 0))
        buf.push(0.5, Pose2.at(0.1, 0))
        assert delayed_view(buf, 1.2).position.x == pytest.approx(0.04)

    def test_constant_stream(self):
        buf = DelayBuffer(0.5)
        for i in range(100):
            buf.push(i * 0.02, Pose2.at(0.1, -0.1, 1.0))
        for t in (1.5, 1.77, 2.4):
            assert delayed_view(buf, t) == Pose2.at(0.1, -0.1, 1.0)

    def test_heading_shortest_arc(self):
        buf = DelayBuffer(0.0)
        buf.push(0.0, Pose2.at(0, 0, math.pi - 0.1))
        buf.push(1.0, Pose2.at(0, 0, -math.pi + 0.1))
        buf.delay = 0.5
        assert abs(delayed_view(buf, 1.0).heading) == pytest.approx(math.pi)

    def test_underflow(self):
        buf = DelayBuffer(1.0)
        buf.push(2.0, Pose2.at(0, 0))
        with pytest.raises(Underflow):
            delayed_view(buf, 2.5)
        with pytest.raises(Underflow):
            delayed_view(DelayBuffer(1.0), 3.0)


class TestMask:
    def test_before(self):
        assert mask_check(1.3, 1.4)

    def test_equal(self):
        assert mask_check(1.4, 1.4)

    def test_late(self):
        assert not mask_check(1.5, 0.02)


def test_publish_due_twenty_hertz():
    due = [t for t in range(100) if publish_due(t, 20_000, 50_000)]
    assert len(due) == 40


@pytest.mark.parametrize("seed", range(10))
def test_replicas_converge(seed):
    res = run_replication_trial(seed)
    assert res.replicas_equal
    assert res.converged_after is not None and res.converged_after <= 1.0
