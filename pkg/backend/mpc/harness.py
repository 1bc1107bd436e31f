"""
Exhaustive and symbolic security and correctness oracle.

A protocol is run once per (secret assignment x tape assignment), with a
ScriptedTapes feeding every possible key-bit vector. For each party the
views are collected as an exact multiset per secret assignment: perfect
secrecy holds iff the multisets are identical. Protocols too wide for
that are run once on symbolic bits instead (see symbolic_audit). Nothing
here knows any particular protocol; it only reads Transcripts.
"""
import itertools
import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from pydantic import BaseModel, computed_field

from mpc.config import ENUM_BITS, EVH, EXHAUSTIVE_BITS, HELPER, HELPER2, KH
from mpc.errors import BudgetExceeded
from mpc.netsim import Draw, Message, decrypting_pairs, run_protocol, span_basis, view_of
from mpc.sharing import Anf, ScriptedTapes, SymbolicTapes, TapeSet

logger = logging.getLogger(__name__)

SPOT_SAMPLES = 64


@dataclass
class ViewDistribution:
    """
    Exact view multisets of one party.

    Attributes:
        party: whose views
        by_secret: secret assignment (tuple of bits, in input order) ->
            Counter of views (tuples of payload strings)
        draws: number of tape bits r enumerated per run
    """
    party: str
    by_secret: Dict[tuple, Counter] = field(default_factory=dict)
    draws: int = 0

    def cardinalities(self):
        return sorted({sum(c.values()) for c in self.by_secret.values()})

    def identical(self):
        distributions = list(self.by_secret.values())
        return all(d == distributions[0] for d in distributions[1:])


class PartyVerdict(BaseModel):
    party: str
    passed: bool
    multiset_size: int
    distinct_views: Optional[int] = None


class AuditResult(BaseModel):
    """
    Verdicts for one protocol. `exhaustive` is False for sampled checks;
    `method` is "enumeration", "symbolic" or "sampled".
    """
    protocol: str
    draws: int
    exhaustive: bool
    method: str = "enumeration"
    correct: bool
    parties: List[PartyVerdict] = []
    leaks: Dict[str, List[str]] = {}

    @computed_field
    @property
    def passed(self) -> bool:
        return self.correct and not self.leaks and all(p.passed for p in self.parties)


def audited_parties(protocol):
    parties = [KH, EVH, HELPER]
    if HELPER2 in protocol.parties:
        parties.append(HELPER2)
    return parties


def secret_assignments(protocol):
    for bits in itertools.product((0, 1), repeat=len(protocol.inputs)):
        yield bits, dict(zip(protocol.inputs, bits))


def count_draws(protocol):
    """Number of tape bits one run consumes (the same for every secret)."""
    _, secrets = next(secret_assignments(protocol))
    tapes = ScriptedTapes(None)
    run_protocol(protocol, secrets, tapes)
    return tapes.drawn


def _check_budget(protocol, budget):
    draws = count_draws(protocol)
    if draws > budget:
        raise BudgetExceeded(
            f"enumeration budget: {protocol.name} draws {draws} tape bits, budget is {budget}")
    return draws


def _enumerate(protocol, parties, budget):
    """One pass over every branch, collecting views and correctness."""
    draws = _check_budget(protocol, budget)
    distributions = {p: ViewDistribution(p, draws=draws) for p in parties}
    correct = True
    for key, secrets in secret_assignments(protocol):
        for p in parties:
            distributions[p].by_secret[key] = Counter()
        expected = protocol.expected(secrets)
        for tape_bits in itertools.product((0, 1), repeat=draws):
            outputs, transcript = run_protocol(protocol, secrets, ScriptedTapes(tape_bits))
            if outputs != expected:
                correct = False
                logger.info("%s wrong on %s with tapes %s", protocol.name, secrets, tape_bits)
            for p in parties:
                distributions[p].by_secret[key][tuple(view_of(transcript, p))] += 1
    return distributions, correct


def enumerate_views(protocol, party, budget=ENUM_BITS):
    """
    Exact view multisets of `party` over all secrets and all tape bits.

    Raises:
        BudgetExceeded: the protocol draws more than `budget` tape bits
    """
    distributions, _ = _enumerate(protocol, [party], budget)
    return distributions[party]


def perfect_security_check(protocol, budget=ENUM_BITS):
    """Per-party verdicts: pass iff every secret assignment yields the same multiset."""
    distributions, _ = _enumerate(protocol, audited_parties(protocol), budget)
    return [_verdict(d) for d in distributions.values()]


def correctness_check(protocol, budget=ENUM_BITS):
    """True iff every (secret, tape) branch reveals the expected value."""
    _, correct = _enumerate(protocol, [], budget)
    return correct


def _verdict(distribution):
    sizes = distribution.cardinalities()
    distinct = len(set().union(*[set(c) for c in distribution.by_secret.values()]))
    return PartyVerdict(party=distribution.party, passed=distribution.identical(),
                        multiset_size=sizes[0] if sizes else 0, distinct_views=distinct)


def spot_check(protocol, samples=SPOT_SAMPLES, seed=0):
    """
    Sampled fallback for protocols too large to enumerate.

    Correctness is checked on every secret assignment under `samples`
    seeded tape sets; secrecy is checked with the decrypting-pair audit on
    each transcript. The result is flagged non-exhaustive.
    """
    rng = random.Random(seed)
    correct = True
    leaks = {}
    for _, secrets in secret_assignments(protocol):
        expected = protocol.expected(secrets)
        for _ in range(samples):
            tapes = TapeSet(rng.getrandbits(256).to_bytes(32, "big"))
            outputs, transcript = run_protocol(protocol, secrets, tapes)
            correct = correct and outputs == expected
            for party, opened in decrypting_pairs(transcript, protocol.secret_forms(),
                                                  audited_parties(protocol)).items():
                leaks.setdefault(party, sorted(set(opened)))
    return AuditResult(protocol=protocol.name, draws=count_draws(protocol), exhaustive=False,
                       method="sampled", correct=correct, leaks=leaks)


def _as_anf(value):
    return value if isinstance(value, Anf) else Anf.const(value)


def symbolic_views(transcript, party):
    """The party's view as Anf entries, in order (constants included)."""
    view = []
    for event in transcript.events:
        if isinstance(event, Draw) and party in event.pair:
            view.append(_as_anf(event.value))
        elif isinstance(event, Message) and event.receiver == party:
            view.append(_as_anf(event.value))
    return view


def strip_pads(view, secret_names):
    """
    Drop view entries masked by a private tape bit.

    An entry goes when some tape variable appears in it only as a lone
    linear term and in no other remaining entry: it is then uniform and
    independent of everything left. Repeats until nothing more goes;
    constants go too. Returns the entries that remain.
    """
    remaining = [v for v in view if not v.is_const]
    while True:
        occurrences = Counter(var for entry in remaining for var in entry.variables)
        for i, entry in enumerate(remaining):
            if any(_is_pad(entry, var) for var in entry.variables
                   if occurrences[var] == 1 and var not in secret_names):
                del remaining[i]
                break
        else:
            return remaining


def _is_pad(entry, var):
    return frozenset((var,)) in entry.terms and sum(1 for m in entry.terms if var in m) == 1


def secret_combination(polys, secret_names):
    """
    A non-constant function of the secrets alone in the GF(2) span of
    `polys`, or None. Monomials touching a tape variable are eliminated
    first, so a surviving row that is free of them opens the secrets.
    """
    monomials = set().union(*(p.terms for p in polys)) if polys else set()
    secret_only = sorted((m for m in monomials if m and m <= secret_names), key=lambda m: (len(m), sorted(m)))
    tape = sorted((m for m in monomials if not m <= secret_names), key=lambda m: (len(m), sorted(m)))
    order = [frozenset()] + secret_only + tape
    columns = {m: i for i, m in enumerate(order)}
    basis = span_basis([p.terms for p in polys], columns)
    for pivot, row in sorted(basis.items()):
        if 0 < pivot <= len(secret_only):
            for lower in sorted((p for p in basis if p < pivot), reverse=True):
                if row >> lower & 1:
                    row ^= basis[lower]
            return Anf(order[i] for i in range(pivot + 1) if row >> i & 1)
    return None


def _residual_distributions(protocol, remaining, secret_names):
    """
    Exact view multisets of the entries left after stripping, by
    enumerating their tape variables bit-sliced. None when there are more
    than EXHAUSTIVE_BITS of them.
    """
    tape_vars = sorted(set().union(*(p.variables for p in remaining)) - secret_names)
    if len(tape_vars) > EXHAUSTIVE_BITS:
        return None
    size = 1 << len(tape_vars)
    ones = (1 << size) - 1
    base = {}
    for i, var in enumerate(tape_vars):
        column = 0
        for j in range(size):
            if j >> i & 1:
                column |= 1 << j
        base[var] = column
    by_secret = {}
    for key, secrets in secret_assignments(protocol):
        columns = dict(base)
        columns.update({name: ones if bit else 0 for name, bit in secrets.items()})
        sliced = [p.sliced(columns, ones) for p in remaining]
        by_secret[key] = Counter(tuple(s >> j & 1 for s in sliced) for j in range(size))
    return by_secret


def symbolic_audit(protocol):
    """
    Exact audit from a single run on symbolic secrets and symbolic tapes.

    Correctness is a polynomial identity between the revealed and expected
    outputs. For each party the view is stripped of independently padded
    entries; a remainder free of secrets is perfectly secret. A remainder
    that, together with the party's holdings, spans a function of the
    secrets alone is a leak. Anything else is enumerated over its remaining
    tape bits. Returns None when that last step is over EXHAUSTIVE_BITS,
    so the caller can fall back to sampling.
    """
    secret_names = frozenset(protocol.inputs)
    secrets = {name: Anf.var(name) for name in protocol.inputs}
    tapes = SymbolicTapes()
    outputs, transcript = run_protocol(protocol, secrets, tapes)
    expected = protocol.expected(secrets)
    correct = outputs == expected
    if not correct:
        logger.info("%s: revealed %s, expected %s", protocol.name, outputs, expected)

    leaks = decrypting_pairs(transcript, protocol.secret_forms(), audited_parties(protocol))
    verdicts = []
    for party in audited_parties(protocol):
        remaining = strip_pads(symbolic_views(transcript, party), secret_names)
        if not any(p.variables & secret_names for p in remaining):
            passed = True
        else:
            held = [_as_anf(v) for v in transcript.values.get(party, {}).values()
                    if isinstance(v, (Anf, int))]
            opened = secret_combination(remaining + held, secret_names)
            if opened is not None:
                passed = False
                leaks[party] = sorted(set(leaks.get(party, [])) | {repr(opened)})
            else:
                distributions = _residual_distributions(protocol, remaining, secret_names)
                if distributions is None:
                    logger.info("%s: %s view too wide to enumerate", protocol.name, party)
                    return None
                counters = list(distributions.values())
                passed = all(c == counters[0] for c in counters[1:])
        verdicts.append(PartyVerdict(party=party, passed=passed, multiset_size=2 ** tapes.drawn))
    return AuditResult(protocol=protocol.name, draws=tapes.drawn, exhaustive=True, method="symbolic",
                       correct=correct, parties=verdicts, leaks=leaks)


def audit(protocol, budget=ENUM_BITS, samples=SPOT_SAMPLES):
    """
    Full audit of one protocol: exhaustive views and correctness when the
    tape fits the budget. Protocols marked for symbolic auditing are
    analysed exactly from one symbolic run once they draw more than
    EXHAUSTIVE_BITS (or the budget), and spot-checked only when that
    analysis is inconclusive. The enumeration path also runs the
    decrypting-pair audit on one transcript.
    """
    draws = count_draws(protocol)
    if protocol.symbolic_audit and draws > min(budget, EXHAUSTIVE_BITS):
        result = symbolic_audit(protocol)
        if result is None:
            result = spot_check(protocol, samples)
    else:
        distributions, correct = _enumerate(protocol, audited_parties(protocol), budget)
        _, secrets = next(secret_assignments(protocol))
        _, transcript = run_protocol(protocol, secrets, ScriptedTapes(None))
        leaks = decrypting_pairs(transcript, protocol.secret_forms(), audited_parties(protocol))
        result = AuditResult(protocol=protocol.name, draws=draws, exhaustive=True, correct=correct,
                             parties=[_verdict(d) for d in distributions.values()], leaks=leaks)
    logger.info("audit %s: %s", protocol.name, "pass" if result.passed else "FAIL")
    return result
