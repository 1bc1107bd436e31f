"""Tests for the gate engine: slots, orientation rules and the AND building blocks."""
import itertools
from functools import reduce

import pytest

from mpc.config import CLIENT, EVH, HELPER, HELPER2, KH, PARTIES
from mpc.errors import ProtocolError
from mpc.gates import (FIRST, LEFT, NEUTRAL, NOT_SHARED, RIGHT, SECOND, SHARED_LEFT, SHARED_RIGHT, GateEngine,
                       fanin_terms)
from mpc.netsim import Network, cost_of, view_of
from mpc.sharing import TapeSet


def engine_for(seed="00", parties=None, w_max=16):
    net = Network(TapeSet(seed)) if parties is None else Network(TapeSet(seed), parties)
    return GateEngine(net, w_max)


@pytest.mark.parametrize("w", [1, 2, 3, 4])
def test_fanin_identity_over_all_plaintexts_and_keys(w):
    for plain in itertools.product((0, 1), repeat=w):
        for keys in itertools.product((0, 1), repeat=w):
            cts = [m ^ k for m, k in zip(plain, keys)]
            terms = fanin_terms(cts, list(keys))
            assert len(terms) == 2 ** w
            assert reduce(lambda acc, t: acc ^ t[1], terms, 0) == reduce(lambda a, b: a & b, plain)


def test_first_slot_key_is_hidden_from_helper():
    engine = engine_for()
    x = engine.share_input("a", 1)
    assert x.slot == FIRST and x.capability == LEFT
    assert x.peer_key is None
    assert not engine.net.has(HELPER, x.kh_key.label)
    assert engine.net.has(CLIENT, x.kh_key.label)


def test_second_slot_key_is_known_to_helper():
    engine = engine_for()
    y = engine.share_input("b", 0, slot=SECOND)
    assert y.capability == RIGHT
    assert y.peer_key.party == HELPER
    assert y.peer_key.value == y.kh_key.value


def test_sharing_costs_one_bit_per_slot():
    engine = engine_for()
    engine.share_input("a", 1)
    engine.share_input("a", 1, slot=SECOND)
    cost = cost_of(engine.net.transcript())
    assert cost.sharing_bits == 2
    assert cost.computation_bits == 0


def test_input_keys_need_kh():
    with pytest.raises(ProtocolError, match="tape KH shares"):
        engine_for().share_input("a", 1, pair=(EVH, HELPER))


def test_slot_budget():
    engine = engine_for()
    x = engine.share_input("a", 1)
    engine.share_input("a", 1, slot=SECOND)
    with pytest.raises(ProtocolError, match="slot budget exhausted"):
        engine.reencrypt(x, LEFT)


def test_reencrypt_retires_neutral_base():
    engine = engine_for("07")
    x = engine.share_input("a", 1)
    y = engine.share_input("b", 1)
    z = engine.xor_gate(x, y, out="z")
    assert z.capability == NEUTRAL
    left = engine.reencrypt(z, LEFT)
    right = engine.reencrypt(z, RIGHT)
    assert not z.live
    assert engine.live_slots("z") == [left, right]
    assert right.peer_key.party == HELPER
    assert engine.reveal(left) == 0
    assert engine.reveal(right) == 0
    assert cost_of(engine.net.transcript()).computation_bits == 2


def test_reencrypting_a_value_named_f_leaves_its_key_alone():
    engine = engine_for("3c")
    x = engine.share_input("a", 1)
    y = engine.share_input("b", 0)
    f = engine.xor_gate(x, y, out="f")
    left = engine.reencrypt(f, LEFT)
    right = engine.reencrypt(f, RIGHT)
    assert left.kh_key.label == "K_f'"
    assert right.kh_key.label == "K_f''"
    assert engine.net.get(KH, "K_f") is f.kh_key
    assert engine.reveal(left) == engine.reveal(right) == 1


def test_sharing_an_input_twice_keeps_one_secret():
    engine = engine_for()
    first = engine.share_input("a", 1)
    second = engine.share_input("a", 1, slot=SECOND)
    assert first.kh_key.label == "K_a"
    assert second.kh_key.label == "K_a'"
    assert engine.reveal(first) == engine.reveal(second) == 1


def test_helper_sees_nothing_after_first_slot_sharing():
    engine = engine_for("4d")
    engine.share_input("a", 1)
    engine.share_input("b", 0)
    assert view_of(engine.net.transcript(), HELPER) == []


def test_helper_sees_its_key_after_second_slot_sharing():
    engine = engine_for("4d")
    y = engine.share_input("b", 0, slot=SECOND)
    assert view_of(engine.net.transcript(), HELPER, labeled=True) == [("K_b", str(y.kh_key.value))]


@pytest.mark.parametrize("a, b", list(itertools.product((0, 1), repeat=2)))
def test_local_gates(a, b):
    engine = engine_for("2a")
    x = engine.share_input("a", a)
    y = engine.share_input("b", b)
    assert engine.reveal(engine.xor_gate(x, y)) == a ^ b
    assert engine.reveal(engine.not_gate(x)) == 1 - a
    assert engine.reveal(engine.copy(y, "c")) == b
    assert cost_of(engine.net.transcript()).computation_bits == 0


def test_and3_changes_helper_states():
    engine = engine_for()
    x = engine.share_input("a", 1)
    y = engine.share_input("b", 1, slot=SECOND)
    assert x.helper_state == y.helper_state == NOT_SHARED
    z = engine.and3(x, y)
    assert x.helper_state == SHARED_LEFT
    assert y.helper_state == SHARED_RIGHT
    assert z.capability == LEFT and z.var_id == "a&b"


def test_helper_never_holds_left_key_and_kh_never_holds_masks():
    engine = engine_for("11")
    x = engine.share_input("a", 1)
    y = engine.share_input("b", 0, slot=SECOND)
    engine.and3(x, y)
    net = engine.net
    assert not net.has(HELPER, x.kh_key.label)
    assert not net.has(KH, "K2") and not net.has(KH, "K5")


def test_and3_views_leave_out_the_other_parties_keys():
    engine = engine_for("5a")
    x = engine.share_input("a", 1)
    y = engine.share_input("b", 1, slot=SECOND)
    engine.and3(x, y)
    transcript = engine.net.transcript()
    labels = {party: {label for label, _ in view_of(transcript, party, labeled=True)}
              for party in (KH, EVH, HELPER)}
    assert labels[HELPER].isdisjoint({"K_a", "K6"})
    assert labels[EVH].isdisjoint({"K_a", "K_b", "K7"})
    assert labels[KH].isdisjoint({"K2", "K5"})
    assert {"K6", "K2", "K5"} <= labels[EVH]
    assert {"K_b", "K7", "K2", "K5"} <= labels[HELPER]


def test_orientation_is_enforced():
    engine = engine_for()
    x = engine.share_input("a", 1)
    y = engine.share_input("b", 1)
    with pytest.raises(ProtocolError, match="operand orientation"):
        engine.and3(x, y)
    z = engine.share_input("c", 1, slot=SECOND)
    with pytest.raises(ProtocolError, match="operand orientation"):
        engine.and3(z, x)


def test_aliasing_is_rejected():
    engine = engine_for()
    x = engine.share_input("a", 1)
    with pytest.raises(ProtocolError, match="operand aliasing"):
        engine.and3(x, x)


def test_reuse_requires_resident_shares():
    engine = engine_for()
    x = engine.share_input("a", 1)
    y = engine.share_input("b", 1, slot=SECOND)
    for run in (engine.and3_reuse_both, engine.and3_reuse_left, engine.and3_reuse_right,
                engine.and3_reuse_reencrypt):
        with pytest.raises(ProtocolError, match="shares not resident at helper"):
            run(x, y)


def test_four_party_and_needs_second_helper():
    engine = engine_for()
    x = engine.share_input("a", 1)
    y = engine.share_input("b", 1, slot=SECOND)
    with pytest.raises(ProtocolError, match="four-party topology required"):
        engine.and4(x, y)


def test_four_party_and_checks_key_holders():
    engine = engine_for(parties=PARTIES)
    x = engine.share_input("a", 1)
    y = engine.share_input("b", 1, slot=SECOND)
    with pytest.raises(ProtocolError, match=HELPER2):
        engine.and4(x, y)


def test_fanin_errors():
    engine = engine_for(w_max=2)
    xs = [engine.share_input(f"x{i}", 1) for i in range(3)]
    with pytest.raises(ProtocolError, match="empty gate"):
        engine.fanin_and([])
    with pytest.raises(ProtocolError, match="fan-in budget"):
        engine.fanin_and(xs)


def test_fanin_of_one_is_a_free_copy():
    engine = engine_for()
    x = engine.share_input("x1", 1)
    z = engine.fanin_and([x], out="z")
    assert engine.reveal(z) == 1
    assert cost_of(engine.net.transcript()).computation_bits == 0


@pytest.mark.parametrize("seed", ["00", "01", "beef"])
def test_chained_and_with_reuse_and_reencryption(seed):
    for a, b, c in itertools.product((0, 1), repeat=3):
        engine = engine_for(seed)
        x = engine.share_input("a", a)
        y = engine.share_input("b", b, slot=SECOND)
        z = engine.share_input("c", c)
        with engine.net.scope("g1"):
            ab = engine.and3(x, y, out="ab")
        with engine.net.scope("g2"):
            abb = engine.and3_reuse_right(ab, y, out="abb")
        with engine.net.scope("g3"):
            cab = engine.and3(z, engine.reencrypt(ab, RIGHT), out="cab")
        assert engine.reveal(abb) == a & b
        assert engine.reveal(cab) == a & b & c
        per_gate = {g.gate: g.bits for g in cost_of(engine.net.transcript()).per_gate}
        assert per_gate == {"g1": 5, "g2": 3, "g3": 6}
