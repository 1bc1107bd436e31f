"""
Encryption primitives and pre-shared randomness.

Bits are plain ints in {0, 1}. A bit is encrypted with a one-time pad,
ENC_K(m) = m XOR K. Rationals (used by the exponential protocol) are
additively blended without modulo, ENC_K(a) = a + K, over exact
fractions.Fraction values.

Keys never travel over the network: every pair of parties owns a
RandomTape seeded from a shared secret, and both ends of the pair draw the
same key from it. The client deals the seeds, so it can reproduce any draw.
"""
from dataclasses import dataclass
from fractions import Fraction

from cryptography.hazmat.primitives import hashes, hmac

from mpc.errors import KeyRangeError, MPCError

Q = Fraction  # exact rational type alias

SEED_BYTES = 32


@dataclass(frozen=True)
class Ciphertext:
    """An encrypted bit plus the name of the key that opens it.

    The label is bookkeeping for tests and audits; it is never transmitted.
    """
    value: int
    key_label: str = ""

    def __xor__(self, other):
        other_value = other.value if isinstance(other, Ciphertext) else other
        return Ciphertext(self.value ^ other_value, self.key_label)


def xor_encrypt(m, k, key_label=""):
    """ENC_K(m) := K xor m."""
    return Ciphertext((m ^ k) & 1, key_label)


def xor_decrypt(c, k):
    """DEC_K(c) := c xor K."""
    value = c.value if isinstance(c, Ciphertext) else c
    return (value ^ k) & 1


def add_encrypt(x, k):
    """ENC_K(a) := a + K, exact."""
    return Q(x) + Q(k)


def add_decrypt(c, k):
    """DEC_K(c) := c - K, exact."""
    return Q(c) - Q(k)


def pair_key(p, q):
    """Unordered party pair as a sorted tuple, so (KH, EVH) == (EVH, KH)."""
    return tuple(sorted((p, q)))


def pair_name(pair):
    return "-".join(pair)


def _prf(seed, message):
    h = hmac.HMAC(seed, hashes.SHA256())
    h.update(message)
    return h.finalize()


class RandomTape:
    """
    Deterministic key stream shared by one pair of parties.

    Block i of the stream is HMAC-SHA256(seed, pair || i). The same
    (pair, seed, counter) always yields the same output, so a run can be
    replayed bit for bit.

    Attributes:
        pair: sorted tuple of the two party names
        seed: fixed-width byte string
        counter: index of the next block to consume
    """

    def __init__(self, pair, seed, counter=0):
        if len(seed) != SEED_BYTES:
            raise ValueError(f"tape seed must be {SEED_BYTES} bytes, got {len(seed)}")
        self.pair = tuple(sorted(pair))
        self.seed = bytes(seed)
        self.counter = counter

    def _block(self):
        message = pair_name(self.pair).encode() + b"|" + self.counter.to_bytes(8, "big")
        self.counter += 1
        return _prf(self.seed, message)

    def _bits(self, nbits):
        """Next nbits of stream as an integer, consuming whole blocks."""
        value, have = 0, 0
        while have < nbits:
            value = (value << 256) | int.from_bytes(self._block(), "big")
            have += 256
        return value >> (have - nbits)

    def __repr__(self):
        return f"RandomTape({pair_name(self.pair)}, counter={self.counter})"


def draw_key_bit(tape):
    """Draw one uniformly random key bit, advancing the tape by one block."""
    return tape._bits(1)


def draw_key_int(tape, key_range):
    """
    Draw an integer key uniformly from [0, key_range).

    Uses rejection sampling, so the result is exactly uniform; the tape
    advances by at least one block.
    """
    if key_range < 1:
        raise KeyRangeError("empty key range")
    if key_range == 1:
        tape._bits(1)
        return Q(0)
    nbits = (key_range - 1).bit_length()
    while True:
        candidate = tape._bits(nbits)
        if candidate < key_range:
            return Q(candidate)


class TapeSet:
    """
    All pairwise tapes of one run, derived from a single master seed.

    Each pair's tape seed is HMAC(master, pair), so the client (who holds
    the master seed) can reproduce every key any pair draws.
    """

    def __init__(self, master_seed=b"\x00"):
        if isinstance(master_seed, str):
            master_seed = bytes.fromhex(master_seed) if master_seed else b"\x00"
        self.master_seed = bytes(master_seed)
        self._tapes = {}

    def tape(self, p, q):
        pair = pair_key(p, q)
        if pair not in self._tapes:
            seed = _prf(self.master_seed.ljust(SEED_BYTES, b"\x00"), pair_name(pair).encode())
            self._tapes[pair] = RandomTape(pair, seed)
        return self._tapes[pair]

    def bit(self, p, q):
        return draw_key_bit(self.tape(p, q))

    def integer(self, p, q, key_range):
        return draw_key_int(self.tape(p, q), key_range)


class ScriptedTapes:
    """
    Tape set that hands out a fixed bit vector in draw order.

    Used by the exhaustive harness: running a protocol once per assignment
    of the vector enumerates every possible tape outcome. With bits=None
    every draw returns 0 and only the number of draws is recorded.
    """

    def __init__(self, bits=None):
        self.bits = bits
        self.drawn = 0

    def bit(self, p, q):
        pair_key(p, q)
        if self.bits is None:
            value = 0
        elif self.drawn >= len(self.bits):
            raise IndexError(f"scripted tape exhausted after {self.drawn} draws")
        else:
            value = self.bits[self.drawn] & 1
        self.drawn += 1
        return value

    def integer(self, p, q, key_range):
        if key_range < 1:
            raise KeyRangeError("empty key range")
        nbits = max(1, (key_range - 1).bit_length())
        value = 0
        for _ in range(nbits):
            value = (value << 1) | self.bit(p, q)
        return Q(value % key_range)


class Anf:
    """
    A bit as a polynomial over GF(2) in algebraic normal form.

    `terms` is a set of monomials, each a frozenset of variable names; the
    empty monomial is the constant 1. XOR is the symmetric difference of
    the monomial sets and AND multiplies out with x & x = x, so two Anfs
    are equal exactly when they agree on every assignment.
    """
    __slots__ = ("terms",)

    def __init__(self, terms=()):
        self.terms = frozenset(terms)

    @classmethod
    def var(cls, name):
        return cls((frozenset((name,)),))

    @classmethod
    def const(cls, bit):
        return cls((frozenset(),)) if bit & 1 else cls()

    @staticmethod
    def _lift(other):
        if isinstance(other, Anf):
            return other
        if isinstance(other, int):
            return Anf.const(other)
        return None

    def __xor__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return Anf(self.terms ^ other.terms)

    __rxor__ = __xor__

    def __and__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        product = set()
        for m in self.terms:
            for n in other.terms:
                product ^= {m | n}
        return Anf(product)

    __rand__ = __and__

    def __eq__(self, other):
        other = self._lift(other)
        return other is not None and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    @property
    def variables(self):
        return frozenset().union(*self.terms) if self.terms else frozenset()

    @property
    def is_const(self):
        return not self.variables

    def evaluate(self, assignment):
        """Value under {name: bit}; every variable must be assigned."""
        bit = 0
        for m in self.terms:
            bit ^= all(assignment[v] for v in m)
        return int(bit)

    def sliced(self, columns, ones):
        """
        Value on many assignments at once: `columns` maps each variable to
        an int whose bit j is its value in assignment j, `ones` has every
        assignment bit set.
        """
        out = 0
        for m in self.terms:
            column = ones
            for v in m:
                column &= columns[v]
            out ^= column
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        monomials = sorted("*".join(sorted(m)) if m else "1" for m in self.terms)
        return " ^ ".join(monomials)


class SymbolicTapes:
    """
    Tape set whose draws are fresh variables r0, r1, ...

    One run on symbolic tapes (and symbolic secrets) yields every value as
    an Anf over the secrets and all tape bits, which covers every tape
    outcome at once.
    """

    def __init__(self):
        self.drawn = 0

    def bit(self, p, q):
        pair_key(p, q)
        name = f"r{self.drawn}"
        self.drawn += 1
        return Anf.var(name)

    def integer(self, p, q, key_range):
        raise MPCError("symbolic tapes only draw key bits")
