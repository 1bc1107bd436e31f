"""Tests for encryption primitives and pairwise random tapes."""
import pytest

from mpc.config import CLIENT, EVH, HELPER, KH
from mpc.errors import KeyRangeError, MPCError
from mpc.sharing import (Q, Anf, Ciphertext, RandomTape, ScriptedTapes, SymbolicTapes, TapeSet, add_decrypt,
                         add_encrypt, draw_key_bit, draw_key_int, pair_key, xor_decrypt, xor_encrypt)


@pytest.mark.parametrize("m", [0, 1])
@pytest.mark.parametrize("k", [0, 1])
def test_xor_encrypt_truth_table(m, k):
    ct = xor_encrypt(m, k, "K")
    assert ct.value == m ^ k
    assert ct.key_label == "K"
    assert xor_decrypt(ct, k) == m
    assert xor_decrypt(ct.value, k) == m


def test_ciphertext_xor_keeps_label():
    assert (Ciphertext(1, "Ka") ^ Ciphertext(1, "Kb")) == Ciphertext(0, "Ka")
    assert (Ciphertext(0, "Ka") ^ 1).value == 1


def test_additive_encryption_is_exact():
    ct = add_encrypt(Q(3, 7), 5)
    assert ct == Q(38, 7)
    assert add_decrypt(ct, 5) == Q(3, 7)
    assert isinstance(add_decrypt(ct, Q(1, 3)), Q)


def test_pair_key_is_unordered():
    assert pair_key(KH, EVH) == pair_key(EVH, KH)


def test_same_seed_same_tape():
    a, b = TapeSet("abcd"), TapeSet("abcd")
    draws_a = [a.bit(KH, EVH) for _ in range(32)]
    draws_b = [b.bit(EVH, KH) for _ in range(32)]
    assert draws_a == draws_b
    assert set(draws_a) == {0, 1}


def test_different_seeds_differ():
    stream_a = TapeSet("01")
    stream_b = TapeSet("02")
    bits_a = [stream_a.bit(KH, HELPER) for _ in range(64)]
    bits_b = [stream_b.bit(KH, HELPER) for _ in range(64)]
    assert bits_a != bits_b


def test_pairs_have_independent_counters():
    tapes = TapeSet("ff")
    tapes.bit(KH, EVH)
    tapes.bit(KH, EVH)
    assert tapes.tape(KH, EVH).counter == 2
    assert tapes.tape(CLIENT, KH).counter == 0


def test_tape_rejects_short_seed():
    with pytest.raises(ValueError, match="32 bytes"):
        RandomTape((KH, EVH), b"short")


def test_draw_key_bit_advances_one_block():
    tape = RandomTape((KH, EVH), bytes(32))
    draw_key_bit(tape)
    assert tape.counter == 1


@pytest.mark.parametrize("seed", [bytes(32), bytes(range(32))])
def test_draw_key_bit_is_balanced(seed):
    tape = RandomTape((KH, HELPER), seed)
    ones = sum(draw_key_bit(tape) for _ in range(10_000))
    assert 0.45 <= ones / 10_000 <= 0.55


@pytest.mark.parametrize("key_range", [2, 3, 5, 16, 1000])
def test_draw_key_int_in_range(key_range):
    tape = RandomTape((EVH, KH), bytes(range(32)))
    values = [draw_key_int(tape, key_range) for _ in range(200)]
    assert all(0 <= v < key_range for v in values)
    assert all(v.denominator == 1 for v in values)


def test_draw_key_int_small_range_hits_everything():
    tape = RandomTape((EVH, KH), bytes(32))
    assert {int(draw_key_int(tape, 3)) for _ in range(200)} == {0, 1, 2}


def test_draw_key_int_range_one_is_zero():
    tape = RandomTape((EVH, KH), bytes(32))
    assert draw_key_int(tape, 1) == 0
    assert tape.counter == 1


def test_draw_key_int_empty_range():
    with pytest.raises(KeyRangeError, match="empty key range"):
        draw_key_int(RandomTape((EVH, KH), bytes(32)), 0)


def test_scripted_tapes_replay_bits_in_order():
    tapes = ScriptedTapes((1, 0, 1))
    assert [tapes.bit(KH, EVH), tapes.bit(KH, HELPER), tapes.bit(EVH, HELPER)] == [1, 0, 1]
    assert tapes.drawn == 3
    with pytest.raises(IndexError):
        tapes.bit(KH, EVH)


def test_scripted_tapes_count_only():
    tapes = ScriptedTapes(None)
    assert tapes.bit(KH, EVH) == 0
    assert tapes.integer(KH, EVH, 4) == 0
    assert tapes.drawn == 3


def test_scripted_integer_uses_bits_msb_first():
    assert ScriptedTapes((1, 0)).integer(KH, EVH, 4) == 2
    with pytest.raises(KeyRangeError):
        ScriptedTapes(()).integer(KH, EVH, 0)


def test_anf_xor_and_and_follow_gf2():
    a, b = Anf.var("a"), Anf.var("b")
    assert a ^ a == 0
    assert a & a == a
    assert (a ^ 1) & b == (a & b) ^ b
    assert 1 & a == a and 0 & a == 0
    assert (a ^ b) ^ b == a
    assert repr((a ^ 1) & b) == "a*b ^ b"
    assert repr(Anf()) == "0"


def test_anf_evaluates_like_the_bits_it_stands_for():
    a, b, c = Anf.var("a"), Anf.var("b"), Anf.var("c")
    poly = (a & b) ^ c ^ 1
    for bits in [(0, 0, 0), (1, 1, 0), (1, 1, 1), (0, 1, 1)]:
        assignment = dict(zip("abc", bits))
        assert poly.evaluate(assignment) == (bits[0] & bits[1]) ^ bits[2] ^ 1
    # bit j of each column is the variable's value in assignment j
    columns = {"a": 0b1100, "b": 0b1010, "c": 0b0000}
    assert poly.sliced(columns, 0b1111) == 0b0111


def test_anf_constants():
    assert Anf.const(1).is_const and Anf.const(0).is_const
    assert Anf.const(1) == 1 and Anf.const(0) == 0
    assert Anf.var("r0").variables == {"r0"}


def test_symbolic_tapes_hand_out_fresh_variables():
    tapes = SymbolicTapes()
    first, second = tapes.bit(KH, EVH), tapes.bit(KH, HELPER)
    assert first == Anf.var("r0") and second == Anf.var("r1")
    assert tapes.drawn == 2
    with pytest.raises(MPCError, match="key bits"):
        tapes.integer(KH, EVH, 4)
