"""
Boolean gate protocols.

A secret bit v lives as a ShareHandle: EVH holds ENC_K(v) = v ^ K, KH holds
K. XOR and NOT are local. AND needs a helper; the three-party AND is built
from three steps so fresh and reuse variants share one code path:

    share_left    EVH and KH hand the Helper ENC_Ka(a) and ENC_K6(Ka)   2 bits
    share_right   EVH and Helper hand KH a double encryption of b       2 bits
    combine       Helper returns ENC_K7(t4) to EVH                      1 bit

A fresh AND is all three (5 bits). When an operand's helper share is
already resident it is reused and its two bits are saved.

Which key a slot uses decides its orientation. A left operand's key must
be unknown to the Helper; a right operand's key must be known to it. The
client therefore draws left keys on the (Client, KH) tape and right keys on
the (KH, Helper) tape.
"""
import logging
from collections import defaultdict, namedtuple
from dataclasses import dataclass
from typing import Optional

from mpc.config import CLIENT, EVH, HELPER, HELPER2, KH, REVEAL, SHARING, W_MAX
from mpc.errors import ProtocolError
from mpc.netsim import enc_tag, key_tag

logger = logging.getLogger(__name__)

FIRST = "First"
SECOND = "Second"

LEFT = "left"
RIGHT = "right"
NEUTRAL = "neutral"

NOT_SHARED = "NotShared"
SHARED_LEFT = "SharedLeft"
SHARED_RIGHT = "SharedRight"


@dataclass
class HelperShareLeft:
    """Left operand resident at the Helper: ENC_Ka(a) and ENC_K6(Ka). K6 is on (KH, EVH)."""
    enc_a: object
    enc_key: object
    k6_kh: object
    k6_evh: object


@dataclass
class HelperShareRight:
    """
    Right operand resident at the Helper.

    The Helper holds Kb ^ K2; KH holds ENC_{Kb^K2}(b) and ENC_K5(Kb ^ K2);
    EVH holds K2, K5 and ENC_{Kb^K2}(b). KH never holds K2 or K5.
    """
    kbk2_helper: object
    k2_helper: object
    k2_evh: object
    k5_evh: object
    b2_evh: object
    b2_kh: object
    e5_kh: object


Masks = namedtuple("Masks", "k2_evh k5_evh k2_helper k5_helper")


@dataclass
class ShareHandle:
    """
    One encryption ("slot") of a shared value.

    Attributes:
        var_id: name of the value
        slot: First or Second
        evh_ct: ENC_K(v) at EVH
        kh_key: K at KH
        capability: left (Helper cannot know K), right (Helper holds K),
            or neutral (never handed to the Helper)
        form: linear form of the plaintext over secret atoms
        key_form: linear form of K over key atoms
        peer_key: copy of K at the Helper (or Helper2) for tape-shared keys
    """
    var_id: str
    slot: str
    evh_ct: object
    kh_key: object
    capability: str
    form: frozenset
    key_form: frozenset
    peer_key: object = None
    left: Optional[HelperShareLeft] = None
    right: Optional[HelperShareRight] = None
    live: bool = True

    @property
    def helper_state(self):
        if self.left is not None:
            return SHARED_LEFT
        if self.right is not None:
            return SHARED_RIGHT
        return NOT_SHARED

    @property
    def key_label(self):
        return self.kh_key.label.split(":")[-1]

    def __repr__(self):
        return f"ShareHandle({self.var_id}, {self.slot}, {self.capability}, {self.helper_state})"


def fanin_terms(cts, keys):
    """
    The 2^w subset terms whose XOR is the AND of the plaintexts.

    Term S ANDs the ciphertexts indexed by S with the keys outside S;
    both empty products are 1.

    Returns:
        list of (subset mask, term bit), one per subset
    """
    w = len(cts)
    terms = []
    for mask in range(2 ** w):
        t_e, t_k = 1, 1
        for i in range(w):
            if mask >> i & 1:
                t_e &= cts[i]
            else:
                t_k &= keys[i]
        terms.append((mask, t_e & t_k))
    return terms


class GateEngine:
    """
    Runs gate protocols on one Network and tracks live slots per value.

    Attributes:
        net: the Network all protocols execute on
        w_max: largest fan-in fanin_and accepts
        slots: var_id -> live ShareHandles (at most two)
    """

    def __init__(self, net, w_max=W_MAX):
        self.net = net
        self.w_max = w_max
        self.slots = defaultdict(list)
        self._generation = defaultdict(int)

    # ------------------------------------------------------------------ slots

    def _next_key_label(self, var_id, rekey=False):
        # primed labels belong to re-keyed slots; K_v itself may be a gate output key
        g = max(self._generation[var_id], 1 if rekey else 0)
        self._generation[var_id] = g + 1
        return f"K_{var_id}" + "'" * g

    def _register(self, handle):
        live = self.slots[handle.var_id]
        if len(live) >= 2:
            raise ProtocolError(f"slot budget exhausted for {handle.var_id}")
        live.append(handle)
        return handle

    def retire(self, handle):
        """Take a slot out of service; its values stay where they are."""
        if handle.live:
            handle.live = False
            self.slots[handle.var_id].remove(handle)

    def live_slots(self, var_id):
        return list(self.slots[var_id])

    # ---------------------------------------------------------------- sharing

    def share_input(self, var_id, bit, slot=FIRST, pair=None):
        """
        Client encrypts a secret bit: EVH gets the ciphertext (1 sharing
        bit), the key comes from a tape so KH gets it for free.

        Args:
            var_id: secret's name
            bit: its value
            slot: First (left-capable) or Second (right-capable)
            pair: tape override, e.g. (KH, Helper2) for the four-party AND

        A First-slot key is drawn on the (Client, KH) tape and the Helper sees
        nothing. A Second-slot key is drawn on the (KH, Helper) tape, so the
        Helper holds that key bit from the sharing phase on.
        """
        net = self.net
        if pair is None:
            pair = (CLIENT, KH) if slot == FIRST else (KH, HELPER)
        if KH not in pair:
            raise ProtocolError("input keys must be drawn on a tape KH shares")
        label = self._next_key_label(var_id)
        other = pair[1] if pair[0] == KH else pair[0]
        key_kh = net.draw_bit(KH, other, label)
        peer_key = None if other == CLIENT else net.get(other, key_kh.label)
        if other == CLIENT:
            key_client = net.get(CLIENT, key_kh.label)
        else:
            # the client dealt the tape seeds, so it can reproduce the draw
            key_client = net.hold(CLIENT, key_kh.label, key_kh.value, 0, key_kh.tag)
        name = net.name(var_id)
        if net.has(CLIENT, name):
            secret = net.get(CLIENT, name)
        else:
            secret = net.hold(CLIENT, name, bit & 1, 0, frozenset((var_id,)))
        ct = net.local(CLIENT, f"ENC_{{{label}}}({var_id})", (secret.value ^ key_client.value) & 1,
                       secret, key_client, tag=enc_tag({var_id}, {key_kh.label}))
        evh_ct = net.send(ct, EVH, phase=SHARING, round=0)
        capability = RIGHT if other == HELPER else LEFT
        handle = ShareHandle(var_id, slot, evh_ct, key_kh, capability,
                             frozenset((var_id,)), key_tag(key_kh.label), peer_key=peer_key)
        logger.debug("shared %s into %s slot (%s)", var_id, slot, capability)
        return self._register(handle)

    # ------------------------------------------------------------ local gates

    def xor_gate(self, x, y, out=None):
        """EVH XORs ciphertexts, KH XORs keys. No communication."""
        net = self.net
        out = out or f"({x.var_id}^{y.var_id})"
        key_form = x.key_form ^ y.key_form
        kh = net.local(KH, f"K_{out}", x.kh_key.value ^ y.kh_key.value, x.kh_key, y.kh_key, tag=key_form)
        form = x.form ^ y.form
        evh = net.local(EVH, f"ENC_{{K_{out}}}({out})", x.evh_ct.value ^ y.evh_ct.value,
                        x.evh_ct, y.evh_ct, tag=form ^ key_form)
        return self._register(ShareHandle(out, FIRST, evh, kh, NEUTRAL, form, key_form))

    def not_gate(self, x, out=None):
        """EVH flips its ciphertext; the key is unchanged."""
        net = self.net
        out = out or f"!{x.var_id}"
        kh = net.copy(x.kh_key, f"K_{out}")
        evh = net.local(EVH, f"ENC_{{K_{out}}}({out})", x.evh_ct.value ^ 1, x.evh_ct, tag=x.evh_ct.tag)
        return self._register(ShareHandle(out, FIRST, evh, kh, NEUTRAL, x.form, x.key_form))

    def copy(self, x, out):
        """Same plaintext under the same key, as a new value (a AND a, fan-in 1)."""
        net = self.net
        kh = net.copy(x.kh_key, f"K_{out}")
        evh = net.copy(x.evh_ct, f"ENC_{{K_{out}}}({out})")
        return self._register(ShareHandle(out, FIRST, evh, kh, NEUTRAL, x.form, x.key_form))

    def reencrypt(self, x, capability=LEFT):
        """
        Give x's value a new slot under a fresh key K'.

        KH sends ENC_K'(K) to EVH (1 bit); EVH turns ENC_K(v) into ENC_K'(v).
        K' is KH-private for a left slot and shared with the Helper for a
        right slot. A neutral base slot is retired by its first re-encryption.

        Raises:
            ProtocolError: if the value already has two live slots
        """
        net = self.net
        live = [h for h in self.slots[x.var_id] if not (h is x and h.capability == NEUTRAL)]
        if len(live) >= 2:
            raise ProtocolError(f"slot budget exhausted for {x.var_id}")
        if x.capability == NEUTRAL:
            self.retire(x)
        label = self._next_key_label(x.var_id, rekey=True)
        if capability == RIGHT:
            kp = net.draw_bit(KH, HELPER, label)
            peer_key = net.get(HELPER, kp.label)
        else:
            kp = net.draw_bit(KH, CLIENT, label)
            peer_key = None
        delta = net.local(KH, f"ENC_{{{label}}}({x.key_label})", x.kh_key.value ^ kp.value,
                          x.kh_key, kp, tag=x.key_form ^ kp.tag)
        delta_evh = net.send(delta, EVH)
        evh = net.local(EVH, f"ENC_{{{label}}}({x.var_id})", x.evh_ct.value ^ delta_evh.value,
                        x.evh_ct, delta_evh, tag=enc_tag(x.form, kp.tag))
        slot = SECOND if capability == RIGHT else FIRST
        handle = ShareHandle(x.var_id, slot, evh, kp, capability, x.form, kp.tag, peer_key=peer_key)
        logger.debug("re-encrypted %s into a %s slot", x.var_id, capability)
        return self._register(handle)

    # ------------------------------------------------------ three-party AND

    def share_left(self, x):
        if x.capability != LEFT:
            raise ProtocolError(f"operand orientation: {x.var_id} cannot be a left operand")
        net = self.net
        k6 = net.draw_bit(KH, EVH, "K6")
        k6_evh = net.get(EVH, k6.label)
        enc_a = net.send(x.evh_ct, HELPER, label=x.evh_ct.label.split(":")[-1])
        masked = net.local(KH, f"ENC_{{K6}}({x.key_label})", x.kh_key.value ^ k6.value,
                           x.kh_key, k6, tag=x.key_form ^ k6.tag)
        enc_key = net.send(masked, HELPER)
        x.left = HelperShareLeft(enc_a, enc_key, k6, k6_evh)
        return x.left

    def _draw_masks(self):
        net = self.net
        k2 = net.draw_bit(EVH, HELPER, "K2")
        k5 = net.draw_bit(EVH, HELPER, "K5")
        return Masks(k2, k5, net.get(HELPER, k2.label), net.get(HELPER, k5.label))

    def share_right(self, y, masks=None):
        if y.capability != RIGHT or y.peer_key is None or y.peer_key.party != HELPER:
            raise ProtocolError(f"operand orientation: {y.var_id} cannot be a right operand")
        net = self.net
        masks = masks or self._draw_masks()
        kb = y.key_label
        b2 = net.local(EVH, f"ENC_{{{kb}^K2}}({y.var_id})", y.evh_ct.value ^ masks.k2_evh.value,
                       y.evh_ct, masks.k2_evh, tag=y.evh_ct.tag ^ masks.k2_evh.tag)
        b2_kh = net.send(b2, KH)
        kbk2 = net.local(HELPER, f"{kb}^K2", y.peer_key.value ^ masks.k2_helper.value,
                         y.peer_key, masks.k2_helper, tag=y.key_form ^ masks.k2_helper.tag)
        e5 = net.local(HELPER, f"ENC_{{K5}}({kb}^K2)", kbk2.value ^ masks.k5_helper.value,
                       kbk2, masks.k5_helper, tag=kbk2.tag ^ masks.k5_helper.tag)
        e5_kh = net.send(e5, KH)
        y.right = HelperShareRight(kbk2, masks.k2_helper, masks.k2_evh, masks.k5_evh, b2, b2_kh, e5_kh)
        return y.right

    def combine(self, x, y, out, with_k8=True, register=True):
        """
        Helper sends ENC_K7(t4) to EVH, t4 = (a ^ K6) & (Kb ^ K2). Then

            EVH:  A & B2  ^  K5 & K6  ^  ENC_K7(t4)  ^  K8
            KH:   Ka & B2 ^  K6 & ENC_K5(Kb ^ K2)  ^  K7 ^ K8

        XOR to a & b.
        """
        net = self.net
        left, right = x.left, y.right
        k7 = net.draw_bit(KH, HELPER, "K7")
        k7_helper = net.get(HELPER, k7.label)
        a6 = net.local(HELPER, f"{x.var_id}^K6", left.enc_a.value ^ left.enc_key.value,
                       left.enc_a, left.enc_key, tag=left.enc_a.tag ^ left.enc_key.tag)
        t4 = net.local(HELPER, "t4", a6.value & right.kbk2_helper.value, a6, right.kbk2_helper)
        t4_enc = net.local(HELPER, "ENC_{K7}(t4)", t4.value ^ k7_helper.value, t4, k7_helper)
        t4_evh = net.send(t4_enc, EVH)

        t0 = net.local(EVH, "t0", x.evh_ct.value & right.b2_evh.value, x.evh_ct, right.b2_evh)
        t1 = net.local(EVH, "t1", right.k5_evh.value & left.k6_evh.value, right.k5_evh, left.k6_evh)
        t2 = net.local(KH, "t2", x.kh_key.value & right.b2_kh.value, x.kh_key, right.b2_kh)
        t3 = net.local(KH, "t3", left.k6_kh.value & right.e5_kh.value, left.k6_kh, right.e5_kh)
        ct_deps = [t0, t1, t4_evh]
        key_deps = [t2, t3, k7]
        if with_k8:
            k8 = net.draw_bit(KH, EVH, "K8")
            ct_deps.append(net.get(EVH, k8.label))
            key_deps.append(k8)
        kf_label = net.name("K_f")
        ct_value, key_value = 0, 0
        for d in ct_deps:
            ct_value ^= d.value
        for d in key_deps:
            key_value ^= d.value
        form = frozenset((out,))
        kh = net.local(KH, "K_f", key_value, *key_deps, tag=key_tag(kf_label))
        evh = net.local(EVH, f"ENC_{{K_f}}({out})", ct_value, *ct_deps, tag=enc_tag(form, {kf_label}))
        handle = ShareHandle(out, FIRST, evh, kh, LEFT, form, key_tag(kf_label))
        return self._register(handle) if register else handle

    def _check_operands(self, x, y):
        if x is y or (x.var_id == y.var_id and x.slot == y.slot):
            raise ProtocolError(f"operand aliasing: {x.var_id} on both sides")

    def and3(self, x, y, out=None):
        """Fresh three-party AND: x left, y right. 5 bits, 2 rounds."""
        self._check_operands(x, y)
        self.share_left(x)
        self.share_right(y)
        return self.combine(x, y, out or f"{x.var_id}&{y.var_id}")

    def and3_reuse_both(self, x, y, out=None):
        """Both operands already resident at the Helper: 1 bit."""
        self._check_operands(x, y)
        if x.left is None or y.right is None:
            raise ProtocolError("shares not resident at helper")
        return self.combine(x, y, out or f"{x.var_id}&{y.var_id}")

    def and3_reuse_left(self, x, y, out=None):
        """Left operand resident, right operand shared now: 3 bits."""
        self._check_operands(x, y)
        if x.left is None:
            raise ProtocolError("shares not resident at helper")
        self.share_right(y)
        return self.combine(x, y, out or f"{x.var_id}&{y.var_id}")

    def and3_reuse_right(self, x, y, out=None):
        """Right operand resident, left operand shared now: 3 bits."""
        self._check_operands(x, y)
        if y.right is None:
            raise ProtocolError("shares not resident at helper")
        self.share_left(x)
        return self.combine(x, y, out or f"{x.var_id}&{y.var_id}")

    def and3_reuse_reencrypt(self, x, y, out=None):
        """
        Reuse x's left share and re-key y's resident right share: 2 bits.

        KH draws Kb' with the Helper and sends ENC_Kb'(Kb) to EVH, which
        re-encrypts b. KH updates ENC_{Kb^K2}(b) and ENC_K5(Kb ^ K2) by XOR
        with Kb ^ Kb', so K2 and K5 are kept and the Helper only swaps keys.
        """
        self._check_operands(x, y)
        if x.left is None or y.right is None:
            raise ProtocolError("shares not resident at helper")
        net = self.net
        old = y.right
        label = self._next_key_label(y.var_id, rekey=True)
        kbp = net.draw_bit(KH, HELPER, label)
        kbp_helper = net.get(HELPER, kbp.label)
        delta = net.local(KH, f"ENC_{{{label}}}({y.key_label})", y.kh_key.value ^ kbp.value,
                          y.kh_key, kbp, tag=y.key_form ^ kbp.tag)
        delta_evh = net.send(delta, EVH)
        evh = net.local(EVH, f"ENC_{{{label}}}({y.var_id})", y.evh_ct.value ^ delta_evh.value,
                        y.evh_ct, delta_evh, tag=y.evh_ct.tag ^ delta_evh.tag)
        b2 = net.local(EVH, f"ENC_{{{label}^K2}}({y.var_id})", evh.value ^ old.k2_evh.value,
                       evh, old.k2_evh, tag=evh.tag ^ old.k2_evh.tag)
        b2_kh = net.local(KH, f"ENC_{{{label}^K2}}({y.var_id})", old.b2_kh.value ^ delta.value,
                          old.b2_kh, delta, tag=old.b2_kh.tag ^ delta.tag)
        e5_kh = net.local(KH, f"ENC_{{K5}}({label}^K2)", old.e5_kh.value ^ delta.value,
                          old.e5_kh, delta, tag=old.e5_kh.tag ^ delta.tag)
        kbk2 = net.local(HELPER, f"{label}^K2", kbp_helper.value ^ old.k2_helper.value,
                         kbp_helper, old.k2_helper, tag=kbp_helper.tag ^ old.k2_helper.tag)
        y.evh_ct, y.kh_key, y.key_form, y.peer_key = evh, kbp, kbp.tag, kbp_helper
        y.right = HelperShareRight(kbk2, old.k2_helper, old.k2_evh, old.k5_evh, b2, b2_kh, e5_kh)
        return self.combine(x, y, out or f"{x.var_id}&{y.var_id}")

    # ------------------------------------------------------- four-party AND

    def and4(self, x, y, out=None):
        """
        AND with two helpers. Ka is shared by KH and Helper2, Kb by KH and
        Helper. Each cross term is computed by the one party that may see
        it and returned to EVH under a key KH shares with that party.
        4 bits, 2 rounds.
        """
        net = self.net
        if HELPER2 not in net.parties:
            raise ProtocolError("four-party topology required")
        self._check_operands(x, y)
        if x.peer_key is None or x.peer_key.party != HELPER2:
            raise ProtocolError(f"operand orientation: {x.var_id} key must be shared with {HELPER2}")
        if y.peer_key is None or y.peer_key.party != HELPER:
            raise ProtocolError(f"operand orientation: {y.var_id} key must be shared with {HELPER}")
        out = out or f"{x.var_id}&{y.var_id}"

        a_helper = net.send(x.evh_ct, HELPER, label=x.evh_ct.label.split(":")[-1])
        b_helper2 = net.send(y.evh_ct, HELPER2, label=y.evh_ct.label.split(":")[-1])

        t1 = net.local(HELPER, "t1", a_helper.value & y.peer_key.value, a_helper, y.peer_key)
        k3 = net.draw_bit(KH, HELPER, "K3")
        k3_helper = net.get(HELPER, k3.label)
        e1 = net.local(HELPER, "ENC_{K3}(t1)", t1.value ^ k3_helper.value, t1, k3_helper)
        e1_evh = net.send(e1, EVH)

        t2 = net.local(HELPER2, "t2", x.peer_key.value & b_helper2.value, x.peer_key, b_helper2)
        k4 = net.draw_bit(KH, HELPER2, "K4")
        k4_helper2 = net.get(HELPER2, k4.label)
        e2 = net.local(HELPER2, "ENC_{K4}(t2)", t2.value ^ k4_helper2.value, t2, k4_helper2)
        e2_evh = net.send(e2, EVH)

        t3 = net.local(KH, "t3", x.kh_key.value & y.kh_key.value, x.kh_key, y.kh_key)
        kf_label = net.name("K_f")
        kh = net.local(KH, "K_f", t3.value ^ k3.value ^ k4.value, t3, k3, k4, tag=key_tag(kf_label))
        t0 = net.local(EVH, "t0", x.evh_ct.value & y.evh_ct.value, x.evh_ct, y.evh_ct)
        form = frozenset((out,))
        evh = net.local(EVH, f"ENC_{{K_f}}({out})", t0.value ^ e1_evh.value ^ e2_evh.value,
                        t0, e1_evh, e2_evh, tag=enc_tag(form, {kf_label}))
        return self._register(ShareHandle(out, FIRST, evh, kh, LEFT, form, key_tag(kf_label)))

    # ------------------------------------------------------------ fan-in AND

    def fanin_and(self, xs, out=None):
        """
        AND of w values in two rounds through the 2^w-term expansion.

        For each subset S, EVH ANDs the ciphertexts in S (t_E) and KH ANDs
        the keys outside S (t_K). EVH re-shares t_E under a key it draws with
        KH; KH re-shares t_K under a key it draws with the Helper and sends
        EVH the ciphertext (1 bit). The pair then goes through the
        three-party AND (5 bits), all terms in parallel. The terms share one
        K2/K5 mask pair, and the XOR of their outputs is closed with a
        single K8.

        Raises:
            ProtocolError: "empty gate" for w = 0, "fan-in budget" for w > w_max
        """
        w = len(xs)
        if w == 0:
            raise ProtocolError("empty gate")
        if w > self.w_max:
            raise ProtocolError(f"fan-in budget: {w} operands exceed w_max={self.w_max}")
        out = out or "&".join(x.var_id for x in xs)
        if w == 1:
            return self.copy(xs[0], out)
        net = self.net
        masks = self._draw_masks()
        term_cts, term_keys = [], []
        for mask in range(2 ** w):
            with net.scope(f"T{mask:0{w}b}"):
                cts = [xs[i].evh_ct for i in range(w) if mask >> i & 1]
                keys = [xs[i].kh_key for i in range(w) if not mask >> i & 1]
                t_e_value, t_k_value = 1, 1
                for c in cts:
                    t_e_value &= c.value
                for k in keys:
                    t_k_value &= k.value
                t_e_atom, t_k_atom = net.name("tE"), net.name("tK")
                t_e = net.local(EVH, "tE", t_e_value, *cts, tag=frozenset((t_e_atom,)))
                t_k = net.local(KH, "tK", t_k_value, *keys, tag=frozenset((t_k_atom,)))

                k_te = net.draw_bit(KH, EVH, "K_tE")
                k_te_evh = net.get(EVH, k_te.label)
                a = net.local(EVH, "ENC_{K_tE}(tE)", t_e.value ^ k_te_evh.value, t_e, k_te_evh,
                              tag=t_e.tag ^ k_te.tag)
                left = ShareHandle(t_e_atom, FIRST, a, k_te, LEFT, t_e.tag, k_te.tag)

                k_tk = net.draw_bit(KH, HELPER, "K_tK")
                b = net.local(KH, "ENC_{K_tK}(tK)", t_k.value ^ k_tk.value, t_k, k_tk,
                              tag=t_k.tag ^ k_tk.tag)
                b_evh = net.send(b, EVH)
                right = ShareHandle(t_k_atom, SECOND, b_evh, k_tk, RIGHT, t_k.tag, k_tk.tag,
                                    peer_key=net.get(HELPER, k_tk.label))

                self.share_left(left)
                self.share_right(right, masks)
                term = self.combine(left, right, net.name("term"), with_k8=False, register=False)
                term_cts.append(term.evh_ct)
                term_keys.append(term.kh_key)

        k8 = net.draw_bit(KH, EVH, "K8")
        k8_evh = net.get(EVH, k8.label)
        ct_value, key_value = k8.value, k8.value
        for c, k in zip(term_cts, term_keys):
            ct_value ^= c.value
            key_value ^= k.value
        kf_label = net.name("K_f")
        kh = net.local(KH, "K_f", key_value, *term_keys, k8, tag=key_tag(kf_label))
        form = frozenset((out,))
        evh = net.local(EVH, f"ENC_{{K_f}}({out})", ct_value, *term_cts, k8_evh, tag=enc_tag(form, {kf_label}))
        logger.debug("fan-in AND over %d operands, %d terms", w, 2 ** w)
        return self._register(ShareHandle(out, FIRST, evh, kh, LEFT, form, key_tag(kf_label)))

    # ------------------------------------------------------------------ reveal

    def reveal(self, x):
        """EVH and KH send ciphertext and key to the client (2 reveal bits)."""
        net = self.net
        slot = f"{x.var_id}@{x.key_label}"
        ct = net.send(x.evh_ct, CLIENT, label=f"reveal_ct({slot})", phase=REVEAL)
        key = net.send(x.kh_key, CLIENT, label=f"reveal_key({slot})", phase=REVEAL)
        plain = net.local(CLIENT, f"value({slot})", ct.value ^ key.value, ct, key)
        return plain.value
