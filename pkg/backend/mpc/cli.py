"""
Command-line interface.

    run-gate KIND BITS...        run one gate protocol end to end
    run-circuit FILE a=1 b=0     plan and evaluate a netlist
    audit NAME|all               exhaustive secrecy/correctness audit
    cost-report [FILE]           measured bits against the published formulas
    exp --base c --exponent a    exponentiation with a public base

Reports go to stdout (text or JSON), logs to stderr.
"""
import argparse
import logging
import sys
from fractions import Fraction
from typing import Dict, List, Optional

import coloredlogs
from pydantic import BaseModel

from mpc import circuit as circuits
from mpc.config import (DEFAULT_EXP_KEY_RANGE, DEFAULT_LAMBDA, DEFAULT_SEED, DEFAULT_VALUE_BOUND, ENUM_BITS,
                        LOG_LEVEL, OUTPUT_FORMATS, REFERENCE_ROWS, W_MAX)
from mpc.errors import AuditFailure, MPCError, UsageError
from mpc.expo import SecurityParam, exp_report
from mpc.harness import SPOT_SAMPLES, AuditResult, audit
from mpc.netsim import GateCost, cost_of, from_text, run_protocol, to_text
from mpc.protocols import SHIPPED, And3, And4, FaninAnd, NotGate, XorGate, get_protocol
from mpc.sharing import TapeSet

logger = logging.getLogger(__name__)

GATE_KINDS = ("xor", "not", "and3", "and4", "andn")
CLAIMED_FANIN_ROUNDS = 2


# ______________________________________________________________________________
# Report models


class GateResult(BaseModel):
    gate: str
    out: int
    bits: int
    rounds: int
    sharing_bits: int
    terms: Optional[int] = None
    claimed_rounds: Optional[int] = None

    def text(self):
        line = f"out={self.out}"
        if self.terms is not None:
            line += f" terms={self.terms}"
        line += f" bits={self.bits}"
        if self.bits:
            line += f" rounds={self.rounds}"
        if self.claimed_rounds is not None:
            line += f" claimed_rounds={self.claimed_rounds}"
        return line


class CircuitResult(BaseModel):
    outputs: Dict[str, int]
    bits: int
    predicted_bits: int
    rounds: int
    sharing_bits: int
    reencryptions: int
    protocols: Dict[str, str]

    def text(self):
        lines = [" ".join(f"{k}={v}" for k, v in self.outputs.items())]
        lines.append(f"bits={self.bits} rounds={self.rounds} sharing_bits={self.sharing_bits} "
                     f"reencryptions={self.reencryptions}")
        lines += [f"{gate} {protocol}" for gate, protocol in self.protocols.items()]
        return "\n".join(lines)


class ReferenceRow(BaseModel):
    scheme: str
    and_bits: str
    all_pairs_bits: str
    rounds: str
    max_corrupted: str


class CostSummary(BaseModel):
    """Measured costs, and for circuits the 4v+t bound and the all-pairs formula."""
    per_gate: List[GateCost]
    bits: int
    rounds: int
    sharing_bits: int
    reveal_bits: int
    variables: Optional[int] = None
    and_gates: Optional[int] = None
    bound: Optional[int] = None
    within_bound: Optional[bool] = None
    all_pairs_formula: Optional[int] = None
    all_pairs_match: Optional[bool] = None
    reference: List[ReferenceRow] = []

    def text(self):
        lines = [f"gate {g.gate} bits={g.bits} rounds={g.rounds}" for g in self.per_gate]
        lines.append(f"total bits={self.bits} rounds={self.rounds} "
                     f"sharing_bits={self.sharing_bits} reveal_bits={self.reveal_bits}")
        if self.bound is not None:
            verdict = "within" if self.within_bound else "EXCEEDED"
            lines.append(f"bound 4v+t={self.bound} (v={self.variables} t={self.and_gates}) {verdict}")
        if self.all_pairs_formula is not None:
            verdict = "match" if self.all_pairs_match else "MISMATCH"
            lines.append(f"all-pairs v(v-1)/2+4v={self.all_pairs_formula} {verdict}")
        for row in self.reference:
            lines.append(f"reference {row.scheme}: and_bits={row.and_bits} all_pairs_bits={row.all_pairs_bits} "
                         f"rounds={row.rounds} max_corrupted={row.max_corrupted}")
        return "\n".join(lines)


class AuditReport(BaseModel):
    results: List[AuditResult]
    passed: bool

    def text(self):
        lines = []
        for r in self.results:
            mode = "exhaustive" if r.exhaustive else "sampled"
            lines.append(f"{r.protocol} {mode} draws={r.draws} correct={'yes' if r.correct else 'NO'} "
                         f"method={r.method}")
            for p in r.parties:
                distinct = "-" if p.distinct_views is None else p.distinct_views
                lines.append(f"  {p.party} {'pass' if p.passed else 'FAIL'} "
                             f"multiset={p.multiset_size} distinct={distinct}")
            for party, secrets in r.leaks.items():
                lines.append(f"  {party} can decrypt {', '.join(secrets)}")
            lines.append(f"{r.protocol} {'PASS' if r.passed else 'FAIL'}")
        return "\n".join(lines)


def emit(report, fmt):
    if fmt == "json":
        print(report.model_dump_json())
    else:
        text = report.text() if hasattr(report, "text") else "\n".join(
            f"{k}={v}" for k, v in report.model_dump().items() if v is not None)
        print(text)


# ______________________________________________________________________________
# Commands


def cmd_run_gate(args):
    bits = args.bits
    if args.kind == "andn":
        if not bits:
            raise UsageError("andn needs at least one input bit")
        protocol = FaninAnd(len(bits), w_max=args.w_max)
    else:
        protocol = {"xor": XorGate, "not": NotGate, "and3": And3, "and4": And4}[args.kind]()
    if len(bits) != len(protocol.inputs):
        raise UsageError(f"{args.kind} takes {len(protocol.inputs)} input bits, got {len(bits)}")
    secrets = dict(zip(protocol.inputs, bits))
    outputs, transcript = run_protocol(protocol, secrets, TapeSet(args.seed))
    cost = cost_of(transcript)
    result = GateResult(gate=protocol.name, out=outputs["out"], bits=cost.computation_bits,
                        rounds=cost.rounds, sharing_bits=cost.sharing_bits)
    if args.kind == "andn":
        w = len(bits)
        result.terms = 2 ** w if w > 1 else 1
        result.claimed_rounds = CLAIMED_FANIN_ROUNDS if w > 1 else None
    return result


def _read(path):
    try:
        with open(path) as f:
            return f.read()
    except OSError as exc:
        raise MPCError(f"cannot read {path}: {exc.strerror}") from None


def cmd_run_circuit(args):
    c = circuits.parse_circuit(_read(args.circuit))
    inputs = circuits.parse_assignment(args.assignments, c)
    schedule = circuits.plan(c, args.w_max)
    outputs, transcript = circuits.execute(c, schedule, inputs, TapeSet(args.seed), args.w_max)
    if args.transcript_out:
        with open(args.transcript_out, "w") as f:
            f.write(to_text(transcript))
    cost = cost_of(transcript)
    return CircuitResult(outputs=outputs, bits=cost.computation_bits, predicted_bits=schedule.predicted_bits,
                         rounds=cost.rounds, sharing_bits=cost.sharing_bits,
                         reencryptions=len(schedule.reencryptions), protocols=schedule.protocols)


def circuit_costs(c, seed=DEFAULT_SEED, w_max=W_MAX):
    """Plan, run on all-zero inputs, and compare with the bound and formula."""
    schedule = circuits.plan(c, w_max)
    zeros = {name: 0 for name in c.inputs}
    _, transcript = circuits.execute(c, schedule, zeros, TapeSet(seed), w_max)
    cost = cost_of(transcript)
    v, t = len(c.inputs), schedule.and_gates
    summary = CostSummary(per_gate=cost.per_gate, bits=cost.computation_bits, rounds=cost.rounds,
                          sharing_bits=cost.sharing_bits, reveal_bits=cost.reveal_bits,
                          variables=v, and_gates=t, bound=circuits.pair_bound(v, t))
    summary.within_bound = summary.bits <= summary.bound
    if v >= 2 and c.gates == circuits.all_pairs(v).gates:
        summary.all_pairs_formula = circuits.all_pairs_bits(v)
        summary.all_pairs_match = summary.bits == summary.all_pairs_formula
    summary.reference = [ReferenceRow(**row) for row in REFERENCE_ROWS]
    return summary


def cmd_cost_report(args):
    if args.transcript:
        cost = cost_of(from_text(_read(args.transcript)))
        return CostSummary(per_gate=cost.per_gate, bits=cost.computation_bits, rounds=cost.rounds,
                           sharing_bits=cost.sharing_bits, reveal_bits=cost.reveal_bits)
    if args.all_pairs is not None:
        c = circuits.all_pairs(args.all_pairs)
    elif args.circuit:
        c = circuits.parse_circuit(_read(args.circuit))
    else:
        raise UsageError("cost-report needs a circuit file, --all-pairs V or --transcript FILE")
    return circuit_costs(c, args.seed, args.w_max)


def cmd_audit(args):
    protocols = SHIPPED if args.protocol == "all" else [get_protocol(args.protocol)]
    results = [audit(p, budget=args.enum_bits, samples=args.samples) for p in protocols]
    report = AuditReport(results=results, passed=all(r.passed for r in results))
    return report


def cmd_exp(args):
    sp = SecurityParam(lam=args.lam, value_bound=args.value_bound, exponent_key_range=args.key_range)
    return exp_report(args.base, args.exponent, sp, seed=args.seed, literal=args.literal,
                      leakage=not args.no_leakage)


# ______________________________________________________________________________
# Parser


def _bit(text):
    if text not in ("0", "1"):
        raise argparse.ArgumentTypeError(f"expected 0 or 1, got {text!r}")
    return int(text)


def _seed(text):
    try:
        bytes.fromhex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be hex, got {text!r}") from None
    return text


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="master tape seed (hex)")
    common.add_argument("--w-max", type=int, default=W_MAX, help="largest fan-in run as one gate")
    common.add_argument("--format", choices=OUTPUT_FORMATS, default="text")
    common.add_argument("--log-level", default=LOG_LEVEL)

    parser = argparse.ArgumentParser(prog="mpc", description="Helper-assisted three-party computation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-gate", parents=[common], help="run one gate protocol")
    p.add_argument("kind", choices=GATE_KINDS)
    p.add_argument("bits", nargs="*", type=_bit)
    p.set_defaults(handler=cmd_run_gate)

    p = sub.add_parser("run-circuit", parents=[common], help="evaluate a netlist")
    p.add_argument("circuit")
    p.add_argument("assignments", nargs="*", help="name=0|1")
    p.add_argument("--transcript-out", help="write the message transcript here")
    p.set_defaults(handler=cmd_run_circuit)

    p = sub.add_parser("audit", parents=[common], help="exhaustive secrecy audit")
    p.add_argument("protocol", help="protocol name, mutant name or 'all'")
    p.add_argument("--enum-bits", type=int, default=ENUM_BITS)
    p.add_argument("--samples", type=_positive, default=SPOT_SAMPLES)
    p.set_defaults(handler=cmd_audit)

    p = sub.add_parser("cost-report", parents=[common], help="measured costs against the formulas")
    p.add_argument("circuit", nargs="?")
    p.add_argument("--all-pairs", type=int, metavar="V")
    p.add_argument("--transcript")
    p.set_defaults(handler=cmd_cost_report)

    p = sub.add_parser("exp", parents=[common], help="c^a for public c and shared a")
    p.add_argument("--base", type=Fraction, required=True)
    p.add_argument("--exponent", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=int, default=DEFAULT_LAMBDA)
    p.add_argument("--value-bound", type=_positive, default=DEFAULT_VALUE_BOUND)
    p.add_argument("--key-range", type=_positive, default=DEFAULT_EXP_KEY_RANGE)
    p.add_argument("--literal", action="store_true", help="run the unmodified K2/K3 flow")
    p.add_argument("--no-leakage", action="store_true")
    p.set_defaults(handler=cmd_exp)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    coloredlogs.install(level=args.log_level.upper(), stream=sys.stderr, fmt="%(name)s %(levelname)s %(message)s")
    try:
        report = args.handler(args)
        emit(report, args.format)
        if isinstance(report, AuditReport) and not report.passed:
            raise AuditFailure("audit failed")
    except MPCError as exc:
        if not isinstance(exc, AuditFailure):
            print(f"error: {exc}", file=sys.stderr)
        logger.debug("exit %d", exc.exit_code)
        return exc.exit_code
    return 0
