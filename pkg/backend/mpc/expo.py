"""
Exponentiation with a public base over additively encrypted exponents.

The secret exponent a is held as ENC_K(a) = a + K at EVH, with K known to
KH and the Helper. Using c^(a+K) / c^K = c^a:

    round 1   EVH -> Helper   c^(a+K) + K1            K1 on the (EVH, KH) tape
              KH  -> Helper   K3 = K1 / c^K - K2      K2 private to KH
    round 2   Helper -> EVH   (c^(a+K) + K1) / c^K - K3  =  c^a + K2

EVH ends with ENC_K2(c^a), KH with K2. Blinding is additive without a
modulus, so hiding is statistical: it depends on how wide the K1, K2 range
is compared with the values it hides.

All arithmetic is exact over fractions.Fraction.
"""
import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from pydantic import BaseModel

from mpc.config import (CLIENT, DEFAULT_EXP_KEY_RANGE, DEFAULT_LAMBDA, DEFAULT_VALUE_BOUND, EVH,
                        EXP_STATE_BUDGET, HELPER, KH, REVEAL, SHARING)
from mpc.errors import BudgetExceeded, DomainError
from mpc.netsim import Network, cost_of
from mpc.sharing import Q, TapeSet, add_decrypt, add_encrypt

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SecurityParam:
    """
    Statistical blinding parameters.

    Attributes:
        lam: statistical security parameter
        value_bound: B, an upper bound on c^(a+K)
        exponent_key_range: K is drawn from [0, exponent_key_range)
    """
    lam: int = DEFAULT_LAMBDA
    value_bound: int = DEFAULT_VALUE_BOUND
    exponent_key_range: int = DEFAULT_EXP_KEY_RANGE

    @property
    def key_range(self):
        """K1 and K2 are drawn from [0, B * 2^lam)."""
        return self.value_bound * 2 ** self.lam


@dataclass
class AdditiveShare:
    """ENC_K(a) = a + K at EVH; K at KH and, for exponents, at the Helper."""
    evh_ct: object
    kh_key: object
    helper_key: Optional[object] = None


class ExpResult(BaseModel):
    base: str
    exponent: int
    value: str
    expected: str
    correct: bool
    bits: int
    rounds: int
    literal: bool = False
    leakage: Optional[str] = None


def _base(c):
    c = Q(c)
    if c <= 0:
        raise DomainError(f"base domain: base must be positive, got {c}")
    return c


def _power(c, exponent, sp):
    if exponent.denominator != 1:
        raise DomainError(f"value bound: exponent {exponent} is not an integer")
    value = c ** int(exponent)
    if abs(value) > sp.value_bound:
        raise DomainError(f"value bound: {c}^{exponent} exceeds {sp.value_bound}")
    return value


def share_exponent(net, a, sp):
    """Client shares the exponent: K on the (KH, Helper) tape, a + K to EVH."""
    k_kh = net.draw_int(KH, HELPER, "K", sp.exponent_key_range)
    k_helper = net.get(HELPER, k_kh.label)
    k_client = net.hold(CLIENT, k_kh.label, k_kh.value)
    secret = net.hold(CLIENT, "a", Q(a))
    ct = net.local(CLIENT, "ENC_{K}(a)", add_encrypt(secret.value, k_client.value), secret, k_client)
    evh_ct = net.send(ct, EVH, phase=SHARING, round=0)
    return AdditiveShare(evh_ct, k_kh, k_helper)


def exp_public_base(net, c, x, sp, literal=False):
    """
    Compute a share of c^a from a share of a.

    Args:
        net: Network with Client, KH, EVH and Helper
        c: public positive base
        x: AdditiveShare of the exponent (K known to KH and Helper)
        sp: SecurityParam
        literal: draw K2 at the Helper and negate K1 in K3 instead; this
            variant neither decrypts correctly nor hides c^a from the Helper

    Returns:
        AdditiveShare of c^a: c^a + K2 at EVH, K2 at KH

    Raises:
        DomainError: "base domain" for c <= 0, "value bound" when c^(a+K)
            is not an integer power below B
    """
    c = _base(c)
    powered = _power(c, x.evh_ct.value, sp)
    k1 = net.draw_int(EVH, KH, "K1", sp.key_range)
    k1_kh = net.get(KH, k1.label)
    m = net.local(EVH, "ENC_{K1}(c^(a+K))", add_encrypt(powered, k1.value), x.evh_ct, k1)
    m_helper = net.send(m, HELPER)

    c_k = c ** int(x.kh_key.value)
    if literal:
        k2 = net.draw_int(KH, HELPER, "K2", sp.key_range)
        k3_value = -k1_kh.value / c_k - k2.value
    else:
        k2 = net.draw_int(KH, CLIENT, "K2", sp.key_range)
        k3_value = k1_kh.value / c_k - k2.value
    k3 = net.local(KH, "K3", k3_value, k1_kh, k2, x.kh_key)
    k3_helper = net.send(k3, HELPER)

    helper_c_k = c ** int(x.helper_key.value)
    result = net.local(HELPER, "ENC_{K2}(c^a)", m_helper.value / helper_c_k - k3_helper.value,
                       m_helper, k3_helper, x.helper_key)
    result_evh = net.send(result, EVH)
    logger.debug("exp %s^a done", c)
    return AdditiveShare(result_evh, k2)


def reveal_additive(net, share):
    ct = net.send(share.evh_ct, CLIENT, label="reveal_ct", phase=REVEAL)
    key = net.send(share.kh_key, CLIENT, label="reveal_key", phase=REVEAL)
    return net.local(CLIENT, "value", add_decrypt(ct.value, key.value), ct, key).value


def run_exp(c, a, sp=SecurityParam(), tapes=None, literal=False):
    """Share a, run the protocol, reveal. Returns (value, Transcript)."""
    net = Network(tapes if tapes is not None else TapeSet())
    share = share_exponent(net, a, sp)
    value = reveal_additive(net, exp_public_base(net, c, share, sp, literal=literal))
    return value, net.transcript()


def exp_report(c, a, sp=SecurityParam(), seed="00", literal=False, leakage=True):
    value, transcript = run_exp(c, a, sp, TapeSet(seed), literal=literal)
    expected = _base(c) ** a
    cost = cost_of(transcript)
    report = ExpResult(base=str(Q(c)), exponent=a, value=str(value), expected=str(expected),
                       correct=value == expected, bits=cost.computation_bits, rounds=cost.rounds,
                       literal=literal)
    if leakage:
        other = a - 1 if a > 0 else a + 1
        try:
            report.leakage = str(statistical_leakage(c, (a, other), sp, literal=literal))
        except (BudgetExceeded, DomainError) as exc:
            logger.info("leakage not computed: %s", exc)
    return report


def helper_view_distribution(c, a, sp, literal=False):
    """
    Exact distribution of the Helper's view over all K, K1, K2.

    The view is (K, c^(a+K) + K1, K3), plus K2 in the literal variant where
    the Helper draws it.
    """
    c = _base(c)
    states = sp.exponent_key_range * sp.key_range ** 2
    if states > EXP_STATE_BUDGET:
        raise BudgetExceeded(f"range too large: {states} states exceed {EXP_STATE_BUDGET}")
    views = Counter()
    for k, k1, k2 in itertools.product(range(sp.exponent_key_range), range(sp.key_range),
                                       range(sp.key_range)):
        c_k = c ** k
        m = _power(c, Q(a + k), sp) + k1
        if literal:
            views[(k, k2, m, -Q(k1) / c_k - k2)] += 1
        else:
            views[(k, m, Q(k1) / c_k - k2)] += 1
    return views, states


def statistical_leakage(c, exponents, sp, literal=False):
    """
    Largest exact total-variation distance between the Helper's views for
    any two exponents in `exponents`.

    Raises:
        BudgetExceeded: "range too large" when the key space exceeds
            EXP_STATE_BUDGET states
    """
    exponents = list(exponents)
    distributions = [helper_view_distribution(c, a, sp, literal) for a in exponents]
    worst = Q(0)
    for (p, total), (q, _) in itertools.combinations(distributions, 2):
        distance = sum((abs(Q(p[v], total) - Q(q[v], total)) for v in set(p) | set(q)), Q(0)) / 2
        worst = max(worst, distance)
    return worst


def leakage_bound(c, a, b, sp):
    """
    max_K |c^(a+K) - c^(b+K)| / R + |c^a - c^b| / R, with R = B * 2^lam.

    The Helper sees two blinded values: K1 hides c^(a+K) inside the first
    message and K2 hides c^a inside K3. Each shift costs at most its
    spread over R, so the bound carries both terms. The first term alone
    is exceeded, e.g. c = 2, exponents (0, 1), B = 4, lam = 1 leak 37/128
    against 2/8.
    """
    c = _base(c)
    r = sp.key_range
    spread = max(abs(c ** (a + k) - c ** (b + k)) for k in range(sp.exponent_key_range))
    return Q(spread, r) + Q(abs(c ** a - c ** b), r)
