"""
Runnable protocol descriptions.

The way to use this module is to subclass Protocol, implement run() and
expected(), and hand instances to netsim.run_protocol or to the harness.
Each shipped protocol shares its own inputs, executes one gate, and reveals
the result, so a single run is a complete client-to-client computation.
"""
from functools import reduce

from mpc.config import CLIENT, EVH, HELPER, HELPER2, KH
from mpc.errors import MPCError
from mpc.gates import LEFT, SECOND, GateEngine


class Protocol:
    """The abstract class for a protocol under test. You should subclass
    this and implement run and expected. Inputs are named bits; run
    returns the revealed outputs as a dict."""

    name = ""
    inputs = ("a", "b")
    parties = (CLIENT, KH, EVH, HELPER)
    # Draws above the direct-enumeration limit are analysed symbolically
    # instead of failing the budget.
    symbolic_audit = False
    # atoms of values the gate computes, beyond the inputs themselves
    output_forms = {}

    def run(self, net, secrets):
        """Execute on `net` and return {"out": bit}."""
        raise NotImplementedError

    def expected(self, secrets):
        """Plaintext value the protocol must reveal."""
        raise NotImplementedError

    def secret_forms(self):
        """Secret atoms the decrypting-pair audit looks for, inputs and outputs."""
        forms = {name: frozenset((name,)) for name in self.inputs}
        forms.update(self.output_forms)
        return forms

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class XorGate(Protocol):
    name = "xor"
    output_forms = {"a^b": frozenset(("a", "b"))}

    def run(self, net, secrets):
        engine = GateEngine(net)
        x = engine.share_input("a", secrets["a"])
        y = engine.share_input("b", secrets["b"])
        return {"out": engine.reveal(engine.xor_gate(x, y))}

    def expected(self, secrets):
        return {"out": secrets["a"] ^ secrets["b"]}


class NotGate(Protocol):
    name = "not"
    inputs = ("a",)

    def run(self, net, secrets):
        engine = GateEngine(net)
        x = engine.share_input("a", secrets["a"])
        return {"out": engine.reveal(engine.not_gate(x))}

    def expected(self, secrets):
        return {"out": secrets["a"] ^ 1}


class And3(Protocol):
    """Three-party AND with one helper, both operands shared inline."""
    name = "and3"
    output_forms = {"a&b": frozenset(("a&b",))}

    def run(self, net, secrets):
        engine = GateEngine(net)
        x = engine.share_input("a", secrets["a"])
        y = engine.share_input("b", secrets["b"], slot=SECOND)
        return {"out": engine.reveal(engine.and3(x, y))}

    def expected(self, secrets):
        return {"out": secrets["a"] & secrets["b"]}


class And4(Protocol):
    """Four-party AND with two helpers."""
    name = "and4"
    parties = (CLIENT, KH, EVH, HELPER, HELPER2)
    output_forms = {"a&b": frozenset(("a&b",))}

    def run(self, net, secrets):
        engine = GateEngine(net)
        x = engine.share_input("a", secrets["a"], pair=(KH, HELPER2))
        y = engine.share_input("b", secrets["b"], slot=SECOND)
        return {"out": engine.reveal(engine.and4(x, y))}

    def expected(self, secrets):
        return {"out": secrets["a"] & secrets["b"]}


class _ReuseAnd(Protocol):
    """
    AND whose operands were helper-shared earlier. The earlier sharing is
    run as a prelude: it shows up in every view but not in the cost.
    """
    share_left_first = False
    share_right_first = False
    output_forms = {"a&b": frozenset(("a&b",))}

    def gate(self, engine, x, y):
        raise NotImplementedError

    def run(self, net, secrets):
        engine = GateEngine(net)
        x = engine.share_input("a", secrets["a"])
        y = engine.share_input("b", secrets["b"], slot=SECOND)
        with net.scope("pre"):
            if self.share_left_first:
                engine.share_left(x)
            if self.share_right_first:
                engine.share_right(y)
        net.mark_prelude()
        with net.scope("g"):
            z = self.gate(engine, x, y)
        return {"out": engine.reveal(z)}

    def expected(self, secrets):
        return {"out": secrets["a"] & secrets["b"]}


class ReuseBoth(_ReuseAnd):
    name = "and3_reuse_both"
    share_left_first = True
    share_right_first = True

    def gate(self, engine, x, y):
        return engine.and3_reuse_both(x, y)


class ReuseLeft(_ReuseAnd):
    name = "and3_reuse_left"
    share_left_first = True

    def gate(self, engine, x, y):
        return engine.and3_reuse_left(x, y)


class ReuseRight(_ReuseAnd):
    name = "and3_reuse_right"
    share_right_first = True

    def gate(self, engine, x, y):
        return engine.and3_reuse_right(x, y)


class ReuseReencrypt(_ReuseAnd):
    name = "and3_reuse_reencrypt"
    share_left_first = True
    share_right_first = True

    def gate(self, engine, x, y):
        return engine.and3_reuse_reencrypt(x, y)


class Reencrypt(Protocol):
    name = "reencrypt"
    inputs = ("a",)

    def run(self, net, secrets):
        engine = GateEngine(net)
        x = engine.share_input("a", secrets["a"])
        return {"out": engine.reveal(engine.reencrypt(x, LEFT))}

    def expected(self, secrets):
        return {"out": secrets["a"]}


class FaninAnd(Protocol):
    """AND of w inputs through the subset-term expansion."""

    def __init__(self, w, w_max=None):
        self.w = w
        self.w_max = w_max
        self.name = f"fanin{w}"
        self.inputs = tuple(f"x{i}" for i in range(1, w + 1))
        self.symbolic_audit = w >= 2
        self.output_forms = {} if w == 1 else {"andn": frozenset(("andn",))}

    def run(self, net, secrets):
        engine = GateEngine(net) if self.w_max is None else GateEngine(net, self.w_max)
        xs = [engine.share_input(v, secrets[v]) for v in self.inputs]
        with net.scope("andn"):
            z = engine.fanin_and(xs, out="andn")
        return {"out": engine.reveal(z)}

    def expected(self, secrets):
        return {"out": reduce(lambda acc, v: acc & secrets[v], self.inputs, 1)}


class LeakyMutant(Protocol):
    """
    A shipped protocol plus one extra message that hands a party something
    it must never see. Every mutant has to fail the secrecy audit.
    """

    def __init__(self, name, base, sender, label, receiver):
        self.name = name
        self.base = base
        self.sender = sender
        self.label = label
        self.receiver = receiver
        self.inputs = base.inputs
        self.parties = base.parties
        self.symbolic_audit = base.symbolic_audit
        self.output_forms = base.output_forms

    def run(self, net, secrets):
        outputs = self.base.run(net, secrets)
        net.send(net.get(self.sender, self.label), self.receiver, label=f"leak({self.label})")
        return outputs

    def expected(self, secrets):
        return self.base.expected(secrets)


SHIPPED = [
    XorGate(),
    NotGate(),
    And4(),
    And3(),
    ReuseBoth(),
    ReuseLeft(),
    ReuseRight(),
    ReuseReencrypt(),
    Reencrypt(),
    FaninAnd(1),
    FaninAnd(2),
    FaninAnd(3),
]

_by_name = {p.name: p for p in SHIPPED}

MUTANTS = [
    LeakyMutant("mutant-xor-leak", _by_name["xor"], KH, "K_a", EVH),
    LeakyMutant("mutant-not-leak", _by_name["not"], KH, "K_a", EVH),
    LeakyMutant("mutant-and4-leak", _by_name["and4"], HELPER, "K_b", EVH),
    LeakyMutant("mutant-and3-leak", _by_name["and3"], EVH, "K2", KH),
    LeakyMutant("mutant-and3-k6", _by_name["and3"], KH, "ENC_{K6}(K_a)", EVH),
    LeakyMutant("mutant-reuse-both-leak", _by_name["and3_reuse_both"], KH, "K_a", EVH),
    LeakyMutant("mutant-reuse-left-leak", _by_name["and3_reuse_left"], KH, "K_a", EVH),
    LeakyMutant("mutant-reuse-right-leak", _by_name["and3_reuse_right"], HELPER, "K_b", EVH),
    LeakyMutant("mutant-reuse-reencrypt-leak", _by_name["and3_reuse_reencrypt"], KH, "g:K_b'", EVH),
    LeakyMutant("mutant-reencrypt-leak", _by_name["reencrypt"], KH, "K_a'", EVH),
    LeakyMutant("mutant-fanin1-leak", _by_name["fanin1"], KH, "K_x1", EVH),
    LeakyMutant("mutant-fanin2-leak", _by_name["fanin2"], KH, "K_x1", EVH),
    LeakyMutant("mutant-fanin2-output-leak", _by_name["fanin2"], KH, "andn:K_f", EVH),
    LeakyMutant("mutant-fanin3-leak", _by_name["fanin3"], KH, "K_x3", EVH),
]

REGISTRY = {p.name: p for p in SHIPPED + MUTANTS}


def get_protocol(name):
    """Look up a shipped protocol or mutant by name."""
    if name in REGISTRY:
        return REGISTRY[name]
    if name.startswith("fanin") and name[5:].isdigit():
        return FaninAnd(int(name[5:]))
    raise MPCError(f"unknown protocol {name!r}; known: {', '.join(REGISTRY)}")
