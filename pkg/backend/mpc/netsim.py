"""
Round-synchronous network simulator.

A protocol is written against a Network: parties hold labelled values,
compute locally, draw pre-shared keys from pairwise tapes and send values
to one another. The Network stamps every value with the round from which
it can be used. A message goes out in the earliest round all of its inputs
allow and can be read by the receiver one round later, so independent
steps (for example the 2^w terms of a fan-in AND) naturally share rounds.

Every send and every tape draw is recorded in a Transcript, which is the
ground truth for costs (cost_of) and for what each party saw (view_of).
"""
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel

from mpc.config import CLIENT, COMPUTATION, EVH, HELPER, KH, PHASES, REVEAL, SHARING
from mpc.errors import CausalityViolation, MPCError, ProtocolError
from mpc.sharing import Anf

logger = logging.getLogger(__name__)

THREE_PARTY = (CLIENT, KH, EVH, HELPER)


def key_tag(name):
    """Audit tag of a primitive key."""
    return frozenset((name,))


def enc_tag(of, under):
    """Audit tag of ENC_K(x): the XOR of the atoms of x and of K.

    Tags are sets of atom names read as XOR sums over GF(2), so
    enc_tag({"a"}, {"Ka"}) ^ key_tag("Ka") == {"a"}.
    """
    return frozenset(of) ^ frozenset(under)


@dataclass(frozen=True)
class Held:
    """A value in one party's store, usable from round `ready` on.

    `tag` is the value's linear form over named atoms (secrets and keys),
    or None when the value is not linear in them.
    """
    party: str
    label: str
    value: object
    ready: int = 0
    tag: Optional[frozenset] = None


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    round: int
    payload: str
    phase: str
    label: str
    gate: str = ""
    value: object = field(default=None, compare=False, repr=False)

    @property
    def size(self):
        return payload_size(self.payload)


@dataclass(frozen=True)
class Draw:
    """A key drawn from a pairwise tape: both parties of the pair see it."""
    pair: Tuple[str, str]
    label: str
    payload: str
    gate: str = ""
    value: object = field(default=None, compare=False, repr=False)


@dataclass
class Transcript:
    """
    Ordered record of one run.

    Attributes:
        events: Messages and Draws in the order they happened
        final_holdings: party -> list of (label, payload) it holds at the end
        tags: party -> {label: linear tag} of its holdings
        values: party -> {label: raw value} of its holdings
        prelude: number of leading events that established state before
            the protocol under study began (excluded from computation cost)
    """
    events: list = field(default_factory=list)
    final_holdings: Dict[str, List[Tuple[str, str]]] = field(default_factory=dict)
    tags: Dict[str, Dict[str, object]] = field(default_factory=dict)
    values: Dict[str, Dict[str, object]] = field(default_factory=dict)
    prelude: int = 0

    @property
    def messages(self):
        return [e for e in self.events if isinstance(e, Message)]

    @property
    def draws(self):
        return [e for e in self.events if isinstance(e, Draw)]


class GateCost(BaseModel):
    gate: str
    bits: int
    rounds: int


class CostReport(BaseModel):
    """Bits and rounds of a transcript, split by phase and by gate."""
    computation_bits: int = 0
    sharing_bits: int = 0
    reveal_bits: int = 0
    rounds: int = 0
    per_gate: List[GateCost] = []


def encode_payload(value):
    """Bits as '0'/'1'; rationals as their exact 'p/q' text; a symbolic bit as '*'."""
    if isinstance(value, Anf):
        if value.is_const:
            return "1" if value.terms else "0"
        return "*"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool) or value in (0, 1):
        return str(int(value))
    raise MPCError(f"cannot encode payload {value!r}")


def payload_size(payload):
    """Transmitted size in bits: one per bit, or sign + numerator + denominator."""
    if "/" not in payload:
        return len(payload)
    value = Fraction(payload)
    return 1 + max(1, abs(value.numerator).bit_length()) + max(1, value.denominator.bit_length())


class Network:
    """
    Simulated client plus computing parties for one run.

    Attributes:
        tapes: TapeSet or ScriptedTapes supplying pre-shared keys
        parties: party names taking part
        floor: earliest round for computation-phase messages
    """

    def __init__(self, tapes, parties=THREE_PARTY):
        self.tapes = tapes
        self.parties = tuple(parties)
        self.store = {p: {} for p in self.parties}
        self.events = []
        self.floor = 1
        self.prelude = 0
        self._scope = ""

    # ----------------------------------------------------------------- naming

    @contextmanager
    def scope(self, name):
        """Prefix labels created inside the block with `name:`."""
        previous = self._scope
        self._scope = f"{previous}{name}:" if name else previous
        try:
            yield
        finally:
            self._scope = previous

    @property
    def gate(self):
        return self._scope.split(":")[0] if self._scope else ""

    def name(self, label):
        return f"{self._scope}{label}"

    # ----------------------------------------------------------------- storage

    def _check_party(self, party):
        if party not in self.store:
            raise MPCError(f"party {party} is not part of this network")

    def hold(self, party, label, value, ready=0, tag=None):
        """Put a value in a party's store. Labels are write-once per party."""
        self._check_party(party)
        if label in self.store[party]:
            raise ProtocolError(f"label collision: {party} already holds {label}")
        held = Held(party, label, value, ready, tag)
        self.store[party][label] = held
        return held

    def has(self, party, label):
        return label in self.store.get(party, {})

    def get(self, party, label):
        """Read a value from a party's store; it must have been delivered."""
        self._check_party(party)
        try:
            return self.store[party][label]
        except KeyError:
            raise CausalityViolation(f"causality violation: {party} reads {label} it never received") from None

    def local(self, party, label, value, *deps, tag=None):
        """Compute `value` at `party` from values it already holds."""
        self._check_party(party)
        for dep in deps:
            if dep.party != party or self.store[party].get(dep.label) is not dep:
                raise CausalityViolation(
                    f"causality violation: {party} computes {label} from {dep.party}'s {dep.label}")
        ready = max((d.ready for d in deps), default=0)
        return self.hold(party, self.name(label), value, ready, tag)

    def copy(self, held, label, tag=None):
        """Re-label a held value at the same party (free)."""
        return self.local(held.party, label, held.value, held, tag=tag if tag is not None else held.tag)

    # ------------------------------------------------------------------- tapes

    def draw_bit(self, p, q, label):
        """Draw a key bit from the (p, q) tape; both parties now hold it."""
        value = self.tapes.bit(p, q)
        return self._record_draw(p, q, label, value)

    def draw_int(self, p, q, label, key_range):
        value = self.tapes.integer(p, q, key_range)
        return self._record_draw(p, q, label, value)

    def _record_draw(self, p, q, label, value):
        """Store the key at both ends; returns p's copy (q's via get)."""
        full = self.name(label)
        self.events.append(Draw(tuple(sorted((p, q))), full, encode_payload(value), self.gate, value))
        logger.debug("draw %s on %s-%s", full, p, q)
        for party in (q, p):
            if party in self.store:
                self.hold(party, full, value, 0, key_tag(full))
        return self.get(p, full)

    # ---------------------------------------------------------------- messages

    def send(self, held, receiver, label=None, phase=COMPUTATION, round=None):
        """
        Send a held value to `receiver`.

        The message goes out in the earliest round the value allows (or the
        explicit `round`, which must not precede it) and is readable by the
        receiver one round later.
        """
        if phase not in PHASES:
            raise MPCError(f"unknown phase {phase}")
        sender = held.party
        if self.store[sender].get(held.label) is not held:
            raise CausalityViolation(f"causality violation: {sender} sends {held.label} it does not hold")
        self._check_party(receiver)
        earliest = held.ready
        if phase == COMPUTATION:
            earliest = max(earliest, self.floor)
        if round is None:
            round = earliest
        elif round < held.ready:
            raise CausalityViolation(
                f"causality violation: {held.label} is ready in round {held.ready}, sent in round {round}")
        if phase == SHARING and sender != CLIENT:
            raise MPCError("secret-sharing messages originate at the client")
        if phase == REVEAL and receiver != CLIENT:
            raise MPCError("reveal messages terminate at the client")
        name = held.label if label is None else self.name(label)
        payload = encode_payload(held.value)
        self.events.append(Message(sender, receiver, round, payload, phase, name, self.gate, held.value))
        logger.debug("round %d %s -> %s %s", round, sender, receiver, name)
        return self.hold(receiver, name, held.value, round + 1, held.tag)

    def mark_prelude(self):
        """Everything recorded so far is prior state, not the protocol under study."""
        self.prelude = len(self.events)
        last = max((e.round for e in self.events if isinstance(e, Message)), default=0)
        self.floor = max(self.floor, last + 1)

    def transcript(self):
        holdings = {p: [(h.label, encode_payload(h.value)) for h in store.values()]
                    for p, store in self.store.items()}
        tags = {p: {h.label: h.tag for h in store.values() if h.tag is not None}
                for p, store in self.store.items()}
        values = {p: {h.label: h.value for h in store.values()} for p, store in self.store.items()}
        return Transcript(list(self.events), holdings, tags, values=values, prelude=self.prelude)


def run_protocol(protocol, secrets, tapes):
    """
    Execute a protocol description on fresh simulated parties.

    Args:
        protocol: object with `parties` and `run(net, secrets) -> outputs`
        secrets: input assignment, e.g. {"a": 1, "b": 0}
        tapes: TapeSet (or ScriptedTapes) providing every pairwise tape

    Returns:
        (outputs, Transcript)
    """
    net = Network(tapes, protocol.parties)
    outputs = protocol.run(net, secrets)
    return outputs, net.transcript()


def cost_of(transcript):
    """Bits per phase and rounds of the computation phase."""
    report = CostReport()
    per_gate = {}
    computation_rounds = []
    for index, event in enumerate(transcript.events):
        if not isinstance(event, Message):
            continue
        if event.phase == SHARING:
            report.sharing_bits += event.size
        elif event.phase == REVEAL:
            report.reveal_bits += event.size
        elif index >= transcript.prelude:
            report.computation_bits += event.size
            computation_rounds.append(event.round)
            bits, rounds = per_gate.setdefault(event.gate, [0, []])
            per_gate[event.gate][0] = bits + event.size
            rounds.append(event.round)
    if computation_rounds:
        report.rounds = max(computation_rounds) - min(computation_rounds) + 1
    report.per_gate = [GateCost(gate=g, bits=b, rounds=max(r) - min(r) + 1)
                       for g, (b, r) in per_gate.items()]
    return report


def view_of(transcript, party, labeled=False):
    """
    Everything `party` observed: tape draws it shares and messages it
    received, in order. This is its complete semi-honest view.
    """
    view = []
    for event in transcript.events:
        if isinstance(event, Draw) and party in event.pair:
            view.append((event.label, event.payload) if labeled else event.payload)
        elif isinstance(event, Message) and event.receiver == party:
            view.append((event.label, event.payload) if labeled else event.payload)
    return view


def to_text(transcript):
    """Serialize messages as `round from to phase label bits` lines."""
    lines = []
    for m in transcript.messages:
        label = m.label.replace(" ", "_")
        lines.append(f"{m.round} {m.sender} {m.receiver} {m.phase} {label} {m.payload}")
    return "\n".join(lines) + ("\n" if lines else "")


def from_text(text):
    """Parse the line format back into a Transcript (messages only)."""
    events = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 6:
            raise MPCError(f"transcript line {line_no}: expected 6 fields, got {len(parts)}")
        round_, sender, receiver, phase, label, payload = parts
        if phase not in PHASES:
            raise MPCError(f"transcript line {line_no}: unknown phase {phase}")
        gate = label.split(":")[0] if ":" in label else ""
        events.append(Message(sender, receiver, int(round_), payload, phase, label, gate))
    return Transcript(events)


def span_basis(tags, atoms):
    """Row-reduce linear tags (as bitmasks) into {pivot bit: row}."""
    basis = {}
    for tag in tags:
        row = 0
        for atom in tag:
            row |= 1 << atoms[atom]
        while row:
            pivot = row.bit_length() - 1
            if pivot not in basis:
                basis[pivot] = row
                break
            row ^= basis[pivot]
    return basis


def _in_span(basis, row):
    while row:
        pivot = row.bit_length() - 1
        if pivot not in basis:
            return False
        row ^= basis[pivot]
    return True


def decrypting_pairs(transcript, secrets, parties=(KH, EVH, HELPER)):
    """
    Audit holdings for (ciphertext, key) combinations that open a secret.

    Every tagged holding is a XOR of named atoms. A party can decrypt a
    secret when the secret's own form lies in the GF(2) span of what it
    holds, e.g. ENC_{Kb^K2}(b) together with Kb and K2.

    Args:
        transcript: finished run
        secrets: names of plaintext atoms, or a mapping name -> linear form
        parties: parties to audit

    Returns:
        dict party -> sorted list of secret names it could decrypt
    """
    forms = secrets if isinstance(secrets, dict) else {s: frozenset((s,)) for s in secrets}
    leaks = {}
    for party in parties:
        tags = [t for t in transcript.tags.get(party, {}).values() if t]
        atoms = {}
        for form in list(tags) + list(forms.values()):
            for atom in sorted(form):
                atoms.setdefault(atom, len(atoms))
        basis = span_basis(tags, atoms)
        opened = []
        for name, form in forms.items():
            row = 0
            for atom in form:
                row |= 1 << atoms[atom]
            if row and _in_span(basis, row):
                opened.append(name)
        if opened:
            leaks[party] = sorted(opened)
    return leaks
