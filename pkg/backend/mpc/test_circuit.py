"""Tests for netlist parsing, reuse-aware planning and circuit evaluation."""
import itertools
import random

import pytest

from mpc.circuit import (AND, ANDN, COPY, FRESH, REUSE_BOTH, REUSE_LEFT, REUSE_RIGHT, all_pairs, all_pairs_bits,
                         cost_bound, evaluate, evaluate_plain, execute, format_circuit, normalize, pair_bound,
                         parse_assignment, parse_circuit, plan, random_circuit, secret_forms)
from mpc.config import EVH, HELPER, KH
from mpc.errors import CircuitParseError, MPCError
from mpc.gates import LEFT, RIGHT
from mpc.netsim import decrypting_pairs
from mpc.sharing import TapeSet

CHAIN = """
# (a AND b) AND c
in a b c
g1 AND a b
g2 AND g1 c
out g2
"""

TRIANGLE = """
in a b c
g1 AND a b
g2 AND a c
g3 AND b c
out g1 g2 g3
"""


def assignments(circuit):
    for bits in itertools.product((0, 1), repeat=len(circuit.inputs)):
        yield dict(zip(circuit.inputs, bits))


def check_all_assignments(circuit, w_max=16, seed="00"):
    schedule = plan(circuit, w_max)
    for inputs in assignments(circuit):
        outputs, _ = execute(circuit, schedule, inputs, TapeSet(seed), w_max)
        assert outputs == evaluate_plain(circuit, inputs), (format_circuit(circuit), inputs)


# ---------------------------------------------------------------- parsing


def test_parse_basic_netlist():
    c = parse_circuit(CHAIN)
    assert c.inputs == ("a", "b", "c")
    assert [g.id for g in c.gates] == ["g1", "g2"]
    assert c.outputs == ("g2",)
    assert c.and_count == 2
    assert parse_circuit(format_circuit(c)) == c


def test_gate_kinds_are_case_insensitive():
    c = parse_circuit("in a b\nx xor a b\nn not x\nout n\n")
    assert [g.kind for g in c.gates] == ["XOR", "NOT"]


@pytest.mark.parametrize("text, message", [
    ("in a\ng1 AND a g2\ng2 NOT a\nout g1\n", "line 2: unknown name g2"),
    ("in a b\ng1 AND a\nout g1\n", "line 2: arity mismatch"),
    ("in a b\ng1 NOT a b\nout g1\n", "line 2: arity mismatch"),
    ("in a b\ng1 ANDN a\nout g1\n", "line 2: arity mismatch"),
    ("in a b\ng1 AND a b\ng1 XOR a b\nout g1\n", "line 3: duplicate id g1"),
    ("in a a\nout a\n", "line 1: duplicate id a"),
    ("in a b\ng1 NAND a b\nout g1\n", "line 2: unknown gate kind NAND"),
    ("in a b\ng1 AND a b\n", "line 2: no outputs declared"),
    ("in a\ng1 AND g1 a\nout g1\n", "line 2: cycle"),
    ("in a\nout b\n", "line 2: unknown name b"),
    ("in a\ng1\nout a\n", "line 2: gate g1 has no kind"),
    ("in 1a\nout 1a\n", "line 1: invalid name"),
])
def test_parse_errors_name_the_line(text, message):
    with pytest.raises(CircuitParseError, match=message):
        parse_circuit(text)


def test_parse_error_is_an_input_error():
    with pytest.raises(MPCError) as info:
        parse_circuit("in a\n\n\nout zz\n")
    assert info.value.line_no == 4
    assert info.value.exit_code == 1


def test_parse_assignment():
    c = parse_circuit(CHAIN)
    assert parse_assignment("a=1 b=0 c=1", c) == {"a": 1, "b": 0, "c": 1}
    with pytest.raises(MPCError, match="bad input assignment"):
        parse_assignment(["a=2"])
    with pytest.raises(MPCError, match="unknown input d"):
        parse_assignment(["d=1"], c)


# --------------------------------------------------------------- planning


def test_chain_plan_and_cost():
    c = parse_circuit(CHAIN)
    schedule = plan(c)
    assert schedule.protocols == {"g1": FRESH, "g2": FRESH}
    assert schedule.predicted_bits == 10
    assert schedule.sharing_bits == 3
    for inputs in assignments(c):
        outputs, cost = evaluate(c, schedule, inputs, TapeSet("01"))
        assert outputs == evaluate_plain(c, inputs)
        assert cost.computation_bits == 10 <= pair_bound(3, 2)


def test_triangle_reuses_resident_shares():
    c = parse_circuit(TRIANGLE)
    schedule = plan(c)
    assert schedule.protocols == {"g1": FRESH, "g2": REUSE_LEFT, "g3": REUSE_RIGHT}
    assert schedule.slots["b"] == [LEFT, RIGHT]
    assert schedule.predicted_bits == 11 <= cost_bound(3, 3)
    check_all_assignments(c)


def test_xor_output_is_reencrypted_before_an_and():
    c = parse_circuit("in a b c\nx XOR a b\ng AND x c\nh AND c x\nout g h\n")
    schedule = plan(c)
    assert [(s.target, s.capability) for s in schedule.reencryptions] == [("x", LEFT), ("x", RIGHT)]
    assert schedule.predicted_bits == 1 + 5 + 1 + 5
    check_all_assignments(c)


def test_gate_named_f_is_reencrypted_without_clobbering_keys():
    c = parse_circuit("in a b c\nf XOR a b\ng AND f c\nh AND f b\nout g h\n")
    schedule = plan(c)
    assert [(s.target, s.capability) for s in schedule.reencryptions] == [("f", LEFT)]
    assert schedule.protocols == {"g": FRESH, "h": REUSE_LEFT}
    check_all_assignments(c)
    check_all_assignments(c, seed="5e")


def test_both_resident_operands_use_reuse_both():
    c = parse_circuit("in a b c d\ng1 AND a b\ng2 AND c d\ng3 AND a d\nout g1 g2 g3\n")
    schedule = plan(c)
    assert schedule.protocols == {"g1": FRESH, "g2": FRESH, "g3": REUSE_BOTH}
    check_all_assignments(c)


@pytest.mark.parametrize("seed", range(20))
def test_planner_never_re_keys_a_resident_right_share(seed):
    c = random_circuit(random.Random(seed), 5, 8)
    assert set(plan(c).protocols.values()) <= {FRESH, REUSE_LEFT, REUSE_RIGHT, REUSE_BOTH}


def test_repeated_outputs_are_revealed_once():
    c = parse_circuit("in a b\ng AND a b\nout g g a\n")
    for inputs in assignments(c):
        outputs, transcript = execute(c, plan(c), inputs, TapeSet("09"))
        assert outputs == {"g": inputs["a"] & inputs["b"], "a": inputs["a"]}
        assert sum(1 for m in transcript.messages if m.phase == "Reveal") == 4


def test_and_output_used_on_the_right_is_reencrypted():
    c = parse_circuit("in a b c\ng1 AND a b\ng2 AND c g1\nout g2\n")
    schedule = plan(c)
    assert [(s.target, s.capability) for s in schedule.reencryptions] == [("g1", RIGHT)]
    check_all_assignments(c)


def test_self_and_is_a_copy():
    c = parse_circuit("in a\ng AND a a\nout g\n")
    assert normalize(c)[0].kind == COPY
    assert plan(c).predicted_bits == 0
    check_all_assignments(c)


def test_andn_costs_six_bits_per_term():
    c = parse_circuit("in a b c\ng ANDN a b c\nout g\n")
    schedule = plan(c)
    assert schedule.predicted_bits == 48
    check_all_assignments(c)


def test_andn_merges_repeated_operands():
    c = parse_circuit("in a b\ng ANDN a b a\nh ANDN b b\nout g h\n")
    gates = normalize(c)
    assert gates[0].operands == ("a", "b")
    assert gates[1].kind == COPY
    assert plan(c).predicted_bits == 24
    check_all_assignments(c)


def test_wide_andn_is_split_into_a_tree():
    c = parse_circuit("in a b c d e\ng ANDN a b c d e\nout g\n")
    gates = normalize(c, w_max=2)
    assert [(g.id, g.operands) for g in gates] == [
        ("g.0.0", ("a", "b")),
        ("g.0.1", ("c", "d")),
        ("g.1.0", ("g.0.0", "g.0.1")),
        ("g", ("g.1.0", "e")),
    ]
    assert all(g.kind == ANDN for g in gates)
    check_all_assignments(c, w_max=2)


def test_w_max_must_allow_pairs():
    with pytest.raises(MPCError, match="at least 2"):
        plan(parse_circuit(CHAIN), w_max=1)


def test_missing_input():
    c = parse_circuit(CHAIN)
    with pytest.raises(MPCError, match="missing input c"):
        execute(c, plan(c), {"a": 1, "b": 1})


# -------------------------------------------------------------- all pairs


def test_all_pairs_orientation():
    c = all_pairs(5)
    left = {g.operands[0] for g in c.gates}
    right = {g.operands[1] for g in c.gates}
    assert left == right == set(c.inputs)
    assert c.gates[0].operands == ("x1", "x2")
    assert c.gates[1].operands == ("x3", "x1")


@pytest.mark.parametrize("v, bits", [(4, 22), (6, 39), (10, 85)])
def test_all_pairs_cost_matches_closed_form(v, bits):
    c = all_pairs(v)
    t = v * (v - 1) // 2
    schedule = plan(c)
    assert schedule.predicted_bits == bits == all_pairs_bits(v) == cost_bound(v, t)
    rng = random.Random(v)
    inputs = {name: rng.randint(0, 1) for name in c.inputs}
    outputs, cost = evaluate(c, schedule, inputs, TapeSet("00"))
    assert cost.computation_bits == bits
    assert outputs == evaluate_plain(c, inputs)


def test_all_pairs_needs_two_variables():
    with pytest.raises(MPCError):
        all_pairs(1)


def test_cost_bound_range():
    assert cost_bound(4, 4) == 20
    with pytest.raises(MPCError, match="t out of range"):
        cost_bound(4, 3)
    with pytest.raises(MPCError, match="t out of range"):
        cost_bound(4, 7)


@pytest.mark.parametrize("seed", range(25))
def test_random_circuits_with_input_operands_stay_within_bound(seed):
    rng = random.Random(seed)
    v = rng.randint(3, 6)
    names = [f"x{i}" for i in range(v)]
    pairs = list(itertools.permutations(names, 2))
    chosen = rng.sample(pairs, rng.randint(1, len(pairs) // 2))
    lines = [f"in {' '.join(names)}"] + [f"g{i} AND {a} {b}" for i, (a, b) in enumerate(chosen)]
    lines.append(f"out {' '.join(f'g{i}' for i in range(len(chosen)))}")
    c = parse_circuit("\n".join(lines))
    inputs = {name: rng.randint(0, 1) for name in names}
    outputs, cost = evaluate(c, plan(c), inputs, TapeSet(f"{seed:02x}"))
    assert outputs == evaluate_plain(c, inputs)
    assert cost.computation_bits <= pair_bound(v, len(chosen))


# ----------------------------------------------------------------- secrecy


@pytest.mark.parametrize("text", [TRIANGLE, CHAIN, "in a b c\nx XOR a b\ng AND x c\nh AND c x\nout g h\n",
                                  "in a b c\ng ANDN a b c\nh AND g a\nout h\n"])
def test_no_party_holds_a_decrypting_pair(text):
    c = parse_circuit(text)
    _, transcript = execute(c, plan(c), {name: 1 for name in c.inputs}, TapeSet("42"))
    assert decrypting_pairs(transcript, secret_forms(c), [KH, EVH, HELPER]) == {}


def test_predicted_bits_match_measured_bits():
    rng = random.Random(7)
    for _ in range(40):
        c = random_circuit(rng)
        schedule = plan(c)
        inputs = {name: rng.randint(0, 1) for name in c.inputs}
        _, cost = evaluate(c, schedule, inputs, TapeSet("00"))
        assert cost.computation_bits == schedule.predicted_bits


def test_random_circuits_match_plain_evaluation():
    rng = random.Random(2024)
    for _ in range(30):
        check_all_assignments(random_circuit(rng), seed=f"{rng.getrandbits(32):08x}")


@pytest.mark.slow
def test_thousand_random_circuits():
    rng = random.Random(0)
    for n in range(1000):
        c = random_circuit(rng, max_gates=10, max_vars=6)
        check_all_assignments(c, seed=f"{n:04x}")


def test_all_pairs_netlist_parses():
    c = parse_circuit(format_circuit(all_pairs(4)))
    assert len(c.gates) == 6
    assert all(g.kind == AND for g in c.gates)


def test_amortized_cost_approaches_one_bit_per_gate():
    for v in range(9, 16):
        for t in range(4 * v, v * (v - 1) // 2 + 1):
            assert cost_bound(v, t) <= 2 * t


def test_plan_is_deterministic():
    c = parse_circuit(TRIANGLE)
    assert plan(c) == plan(c)
