"""
Boolean circuits over shared inputs.

Netlist format, one statement per line, `#` starts a comment:

    in a b c
    g1 AND a b
    g2 XOR g1 c
    g3 ANDN a b c
    out g2 g3

plan() turns a circuit into a Schedule: which input slots the client
deals, which AND variant each gate runs, and where re-encryptions are
inserted so every AND gets a left-capable and a right-capable operand.
execute() runs a Schedule on the simulated parties.
"""
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from mpc.config import W_MAX
from mpc.errors import CircuitParseError, MPCError
from mpc.gates import FIRST, LEFT, NEUTRAL, RIGHT, SECOND, GateEngine
from mpc.netsim import Network, cost_of
from mpc.sharing import TapeSet

logger = logging.getLogger(__name__)

XOR = "XOR"
NOT = "NOT"
AND = "AND"
ANDN = "ANDN"
COPY = "COPY"

ARITY = {XOR: 2, AND: 2, NOT: 1}

# schedule step kinds
SHARE = "share"
REENCRYPT = "reencrypt"

FRESH = "fresh"
REUSE_LEFT = "reuse_left"
REUSE_RIGHT = "reuse_right"
REUSE_BOTH = "reuse_both"

AND_BITS = {FRESH: 5, REUSE_LEFT: 3, REUSE_RIGHT: 3, REUSE_BOTH: 1}

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


@dataclass(frozen=True)
class Gate:
    id: str
    kind: str
    operands: Tuple[str, ...]


@dataclass(frozen=True)
class Circuit:
    """A DAG: every operand is an input or an earlier gate."""
    inputs: Tuple[str, ...]
    gates: Tuple[Gate, ...]
    outputs: Tuple[str, ...]

    @property
    def and_count(self):
        return sum(1 for g in self.gates if g.kind in (AND, ANDN))

    def __repr__(self):
        return f"Circuit({len(self.inputs)} inputs, {len(self.gates)} gates)"


def parse_circuit(text):
    """
    Parse and validate a netlist.

    Raises:
        CircuitParseError: naming the line of the first problem (unknown
            name or forward reference, self reference, arity, duplicate id,
            unknown gate kind, missing outputs)
    """
    inputs, gates, outputs = [], [], []
    defined = set()
    last_line = 1

    def define(name, line_no):
        if not _NAME.match(name) or name in ("in", "out"):
            raise CircuitParseError(line_no, f"invalid name {name!r}")
        if name in defined:
            raise CircuitParseError(line_no, f"duplicate id {name}")
        defined.add(name)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        last_line = line_no
        head, *rest = line.split()
        if head == "in":
            if not rest:
                raise CircuitParseError(line_no, "'in' needs at least one name")
            for name in rest:
                define(name, line_no)
                inputs.append(name)
        elif head == "out":
            if not rest:
                raise CircuitParseError(line_no, "'out' needs at least one reference")
            for ref in rest:
                if ref not in defined:
                    raise CircuitParseError(line_no, f"unknown name {ref}")
            outputs.extend(rest)
        else:
            if not rest:
                raise CircuitParseError(line_no, f"gate {head} has no kind")
            kind, operands = rest[0].upper(), rest[1:]
            if kind not in (XOR, AND, NOT, ANDN):
                raise CircuitParseError(line_no, f"unknown gate kind {rest[0]}")
            if kind == ANDN and len(operands) < 2:
                raise CircuitParseError(line_no, f"arity mismatch: ANDN needs at least 2 operands, got {len(operands)}")
            if kind in ARITY and len(operands) != ARITY[kind]:
                raise CircuitParseError(
                    line_no, f"arity mismatch: {kind} needs {ARITY[kind]} operands, got {len(operands)}")
            for op in operands:
                if op == head:
                    raise CircuitParseError(line_no, f"cycle: {head} uses itself")
                if op not in defined:
                    raise CircuitParseError(line_no, f"unknown name {op}")
            define(head, line_no)
            gates.append(Gate(head, kind, tuple(operands)))
    if not outputs:
        raise CircuitParseError(last_line, "no outputs declared")
    return Circuit(tuple(inputs), tuple(gates), tuple(outputs))


def format_circuit(circuit):
    lines = [f"in {' '.join(circuit.inputs)}"]
    lines += [f"{g.id} {g.kind} {' '.join(g.operands)}" for g in circuit.gates]
    lines.append(f"out {' '.join(circuit.outputs)}")
    return "\n".join(lines) + "\n"


def parse_assignment(tokens, circuit=None):
    """`a=1 b=0` (string or list of tokens) -> {"a": 1, "b": 0}."""
    if isinstance(tokens, str):
        tokens = tokens.split()
    values = {}
    for token in tokens:
        name, sep, bit = token.partition("=")
        if not sep or bit not in ("0", "1"):
            raise MPCError(f"bad input assignment {token!r}, expected name=0|1")
        values[name] = int(bit)
    if circuit is not None:
        unknown = set(values) - set(circuit.inputs)
        if unknown:
            raise MPCError(f"unknown input {sorted(unknown)[0]}")
    return values


def all_pairs(v):
    """
    x_i AND x_j for every pair i < j over v inputs.

    The pair is oriented i AND j when j - i is odd and j AND i when it is
    even, so for v >= 3 every input appears as a left and a right operand.
    """
    if v < 2:
        raise MPCError("all-pairs circuit needs at least 2 variables")
    names = [f"x{i}" for i in range(1, v + 1)]
    gates = []
    for i in range(v):
        for j in range(i + 1, v):
            left, right = (i, j) if (j - i) % 2 else (j, i)
            gates.append(Gate(f"g{i + 1}_{j + 1}", AND, (names[left], names[right])))
    return Circuit(tuple(names), tuple(gates), tuple(g.id for g in gates))


def random_circuit(rng, max_gates=10, max_vars=6, max_fanin=3):
    """Random DAG for oracle sweeps; `rng` is a random.Random."""
    v = rng.randint(1, max_vars)
    inputs = [f"v{i}" for i in range(v)]
    values = list(inputs)
    gates = []
    for n in range(rng.randint(1, max_gates)):
        kind = rng.choice((XOR, NOT, AND, AND, ANDN))
        if kind == NOT:
            operands = (rng.choice(values),)
        elif kind == ANDN:
            operands = tuple(rng.choice(values) for _ in range(rng.randint(2, max_fanin)))
        else:
            operands = (rng.choice(values), rng.choice(values))
        gate = Gate(f"n{n}", kind, operands)
        gates.append(gate)
        values.append(gate.id)
    extra = rng.sample(values, min(len(values), rng.randint(0, 2)))
    outputs = tuple(dict.fromkeys([gates[-1].id] + extra))
    return Circuit(tuple(inputs), tuple(gates), outputs)


def evaluate_plain(circuit, inputs):
    """Direct evaluation on plaintext bits."""
    values = {name: inputs[name] & 1 for name in circuit.inputs}
    for g in circuit.gates:
        ops = [values[o] for o in g.operands]
        if g.kind == XOR:
            values[g.id] = ops[0] ^ ops[1]
        elif g.kind == NOT:
            values[g.id] = ops[0] ^ 1
        else:
            result = 1
            for bit in ops:
                result &= bit
            values[g.id] = result
    return {ref: values[ref] for ref in circuit.outputs}


# ______________________________________________________________________________
# Planning


@dataclass
class Step:
    """One scheduled action. `gate` groups its messages in cost reports."""
    op: str
    target: str
    operands: Tuple[str, ...] = ()
    protocol: str = ""
    capability: str = ""
    bits: int = 0
    gate: str = ""


@dataclass
class Schedule:
    """
    Reuse-aware evaluation plan.

    Attributes:
        steps: shares, local gates, re-encryptions and ANDs in order
        outputs: references revealed at the end
        slots: value -> capabilities of the slots it receives, in order
    """
    steps: List[Step] = field(default_factory=list)
    outputs: Tuple[str, ...] = ()
    slots: Dict[str, List[str]] = field(default_factory=dict)
    and_gates: int = 0

    @property
    def predicted_bits(self):
        return sum(s.bits for s in self.steps if s.op != SHARE)

    @property
    def sharing_bits(self):
        return sum(s.bits for s in self.steps if s.op == SHARE)

    @property
    def protocols(self):
        return {s.target: s.protocol for s in self.steps if s.op == AND}

    @property
    def reencryptions(self):
        return [s for s in self.steps if s.op == REENCRYPT]


def normalize(circuit, w_max=W_MAX):
    """
    Rewrite gates the protocols cannot run directly: a AND a becomes a
    copy, repeated ANDN operands are merged, and ANDN gates wider than
    w_max are split into a balanced tree of gates of at most w_max inputs.
    """
    if w_max < 2:
        raise MPCError("w_max must be at least 2")
    gates = []
    for g in circuit.gates:
        if g.kind == AND and g.operands[0] == g.operands[1]:
            gates.append(Gate(g.id, COPY, g.operands[:1]))
        elif g.kind == ANDN:
            level = list(dict.fromkeys(g.operands))
            if len(level) == 1:
                gates.append(Gate(g.id, COPY, tuple(level)))
                continue
            depth = 0
            while len(level) > w_max:
                chunks = [level[k:k + w_max] for k in range(0, len(level), w_max)]
                level = []
                for n, chunk in enumerate(chunks):
                    if len(chunk) == 1:
                        level.append(chunk[0])
                        continue
                    sub = Gate(f"{g.id}.{depth}.{n}", ANDN, tuple(chunk))
                    gates.append(sub)
                    level.append(sub.id)
                depth += 1
            gates.append(Gate(g.id, ANDN, tuple(level)))
        else:
            gates.append(g)
    return gates


def plan(circuit, w_max=W_MAX):
    """
    Greedy reuse-aware schedule, in gate order.

    Inputs get a First (left-capable) slot when some AND uses them on the
    left or when no AND uses them on the right, and a Second (right-capable)
    slot when some AND uses them on the right; both are dealt by the client.
    Gate outputs that lack the orientation an AND needs are re-encrypted.
    The first use of a slot at the Helper shares it; later uses reuse it.

    An AND step runs fresh, reuse_left, reuse_right or reuse_both. With two
    slots per value a resident right share never needs a new key, and when
    both shares are resident reuse_both (1 bit) undercuts reuse_reencrypt
    (2 bits), so the planner never emits the latter. It runs through the
    protocol registry.
    """
    gates = normalize(circuit, w_max)
    used_left, used_right = set(), set()
    for g in gates:
        if g.kind == AND:
            used_left.add(g.operands[0])
            used_right.add(g.operands[1])

    schedule = Schedule(outputs=circuit.outputs)
    # value -> {capability: resident at the Helper}
    state = defaultdict(dict)

    def add_slot(value, capability):
        if NEUTRAL in state[value]:
            del state[value][NEUTRAL]
        state[value][capability] = False
        schedule.slots.setdefault(value, []).append(capability)

    for name in circuit.inputs:
        if name in used_left or name not in used_right:
            schedule.steps.append(Step(SHARE, name, capability=LEFT, bits=1))
            add_slot(name, LEFT)
        if name in used_right:
            schedule.steps.append(Step(SHARE, name, capability=RIGHT, bits=1))
            add_slot(name, RIGHT)

    def need(value, capability, gate_id):
        if capability not in state[value]:
            schedule.steps.append(Step(REENCRYPT, value, capability=capability, bits=1, gate=gate_id))
            add_slot(value, capability)

    for g in gates:
        if g.kind in (XOR, NOT, COPY):
            schedule.steps.append(Step(g.kind, g.id, g.operands, gate=g.id))
            add_slot(g.id, NEUTRAL)
        elif g.kind == AND:
            x, y = g.operands
            need(x, LEFT, g.id)
            need(y, RIGHT, g.id)
            resident = (state[x][LEFT], state[y][RIGHT])
            protocol = {(False, False): FRESH, (True, False): REUSE_LEFT,
                        (False, True): REUSE_RIGHT, (True, True): REUSE_BOTH}[resident]
            state[x][LEFT] = True
            state[y][RIGHT] = True
            schedule.steps.append(Step(AND, g.id, g.operands, protocol, bits=AND_BITS[protocol], gate=g.id))
            schedule.and_gates += 1
            add_slot(g.id, LEFT)
            logger.info("plan %s = %s AND %s: %s", g.id, x, y, protocol)
        else:
            w = len(g.operands)
            schedule.steps.append(Step(ANDN, g.id, g.operands, bits=6 * 2 ** w, gate=g.id))
            schedule.and_gates += 1
            add_slot(g.id, LEFT)
    return schedule


def secret_forms(circuit, w_max=W_MAX):
    """Linear form of every value over input and AND-output atoms."""
    forms = {name: frozenset((name,)) for name in circuit.inputs}
    for g in normalize(circuit, w_max):
        if g.kind == XOR:
            forms[g.id] = forms[g.operands[0]] ^ forms[g.operands[1]]
        elif g.kind in (NOT, COPY):
            forms[g.id] = forms[g.operands[0]]
        else:
            forms[g.id] = frozenset((g.id,))
    return forms


# ______________________________________________________________________________
# Evaluation


def execute(circuit, schedule, inputs, tapes=None, w_max=W_MAX):
    """
    Run a schedule on simulated parties.

    Returns:
        (outputs dict, Transcript)

    Raises:
        MPCError: if an input value is missing
    """
    for name in circuit.inputs:
        if name not in inputs:
            raise MPCError(f"missing input {name}")
    net = Network(tapes if tapes is not None else TapeSet())
    engine = GateEngine(net, w_max)
    handles = defaultdict(dict)
    base = {}

    def keep(value, capability, handle):
        handles[value][capability] = handle
        base.setdefault(value, handle)

    for step in schedule.steps:
        if step.op == SHARE:
            slot = FIRST if step.capability == LEFT else SECOND
            keep(step.target, step.capability, engine.share_input(step.target, inputs[step.target], slot))
            continue
        ops = [base[o] for o in step.operands]
        with net.scope(step.gate):
            if step.op == XOR:
                keep(step.target, NEUTRAL, engine.xor_gate(*ops, out=step.target))
            elif step.op == NOT:
                keep(step.target, NEUTRAL, engine.not_gate(*ops, out=step.target))
            elif step.op == COPY:
                keep(step.target, NEUTRAL, engine.copy(*ops, out=step.target))
            elif step.op == REENCRYPT:
                keep(step.target, step.capability, engine.reencrypt(base[step.target], step.capability))
            elif step.op == AND:
                x = handles[step.operands[0]][LEFT]
                y = handles[step.operands[1]][RIGHT]
                run = {FRESH: engine.and3, REUSE_LEFT: engine.and3_reuse_left,
                       REUSE_RIGHT: engine.and3_reuse_right, REUSE_BOTH: engine.and3_reuse_both}[step.protocol]
                keep(step.target, LEFT, run(x, y, out=step.target))
            else:
                keep(step.target, LEFT, engine.fanin_and(ops, out=step.target))

    outputs = {}
    with net.scope("reveal"):
        for ref in dict.fromkeys(schedule.outputs):
            outputs[ref] = engine.reveal(base[ref])
    return outputs, net.transcript()


def evaluate(circuit, schedule, inputs, tapes=None, w_max=W_MAX):
    """Run a schedule; returns (outputs, CostReport)."""
    outputs, transcript = execute(circuit, schedule, inputs, tapes, w_max)
    return outputs, cost_of(transcript)


def pair_bound(v, t):
    """4v + t, without range checks."""
    return 4 * v + t


def cost_bound(v, t):
    """
    Bits needed for t AND gates over v shared variables: 4 bits to
    helper-share each variable once on each side, plus 1 bit per gate.

    Raises:
        MPCError: unless v >= 1 and v <= t <= v(v-1)/2
    """
    if v < 1 or not v <= t <= v * (v - 1) // 2:
        raise MPCError(f"t out of range: need {v} <= t <= {v * (v - 1) // 2}, got t={t}")
    return pair_bound(v, t)


def all_pairs_bits(v):
    """Published closed form for the all-pairs circuit: v(v-1)/2 + 4v."""
    return v * (v - 1) // 2 + 4 * v
