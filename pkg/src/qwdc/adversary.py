"""Channel attacks and their exact per-state detection oracles.

Eve knows the public parameters (N, the step set, theta in fixed mode) and
reads all classical traffic. She never sees a preparation before it is
revealed, except as an untrusted Charlie who prepared the states himself.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from . import kernels
from .analysis import ParameterSpace
from .lm05 import measure_qubit, prepared_qubit, LABELS
from .protocol import Interceptor, ProtocolConfig, run_cqd, run_qsdc
from .walk import CoinParams, basis_state, evolve, measure, encode_symbol, step_powers

__all__ = [
    "AttackReport",
    "attack_ir1",
    "attack_ir2",
    "attack_dos",
    "IR1Interceptor",
    "IR2Interceptor",
    "DoSInterceptor",
    "MitmInterceptor",
    "UntrustedCharlie",
    "QubitInterceptResend",
    "make_interceptor",
    "attack_mitm",
    "attack_untrusted_charlie",
    "detection_exact",
    "detection_mc",
    "lm05_ir_detection_exact",
    "lm05_ir_detection_mc",
    "charlie_guess_accuracy_exact",
    "charlie_detection_exact",
    "charlie_guess_mc",
    "ATTACK_KINDS",
]

ATTACK_KINDS = ("IR1", "IR2", "DoS", "MITM", "UntrustedCharlie", "LM05-IR")


@dataclass
class AttackReport:
    kind: str
    legs: tuple
    records: dict = field(default_factory=dict)
    symbol_guesses: dict = field(default_factory=dict)
    detected: dict = field(default_factory=dict)
    extraction_accuracy: float = None

    @property
    def detection_rate(self):
        """Fraction of intercepted, checked states that failed their check."""
        if not self.detected:
            return 0.0
        return sum(self.detected.values()) / len(self.detected)

    def to_dict(self):
        return {
            "kind": self.kind,
            "legs": list(self.legs),
            "detection_rate": self.detection_rate,
            "extraction_accuracy": self.extraction_accuracy,
            "detected": {str(k): bool(v) for k, v in self.detected.items()},
            "symbol_guesses": {str(k): int(v) for k, v in self.symbol_guesses.items()},
            "records": self.records,
        }


# --------------------------------------------------------------------------
# single-state attacks


def _eve_coin(space, rng, random_theta):
    if random_theta:
        return CoinParams(float(rng.uniform(0.0, 2.0 * math.pi)), space.coin.xi, space.coin.zeta)
    return space.coin


def attack_ir1(state, rng):
    """Measure in the position-coin basis and resend the collapsed state."""
    x, c, collapsed = measure(state, rng)
    return collapsed, {"x_E": x, "c_E": c}


def attack_ir2(state, eve_space, rng, random_theta=False):
    """Guess a step count, undo that many steps, measure, and re-prepare.

    The resend is ``U^t_E |x_E, c_E>``, the state consistent with Eve's guess.
    """
    if state.N != eve_space.N:
        raise ValueError("Eve's parameter space does not match the state")
    t_e = int(rng.integers(eve_space.nT))
    coin = _eve_coin(eve_space, rng, random_theta)
    x, c, _ = measure(evolve(state, coin, -t_e), rng)
    resent = evolve(basis_state(state.N, x, c), coin, t_e)
    return resent, {"t_E": t_e, "x_E": x, "c_E": c, "theta_E": coin.theta}


def attack_dos(state, space, rng, random_theta=False):
    """Drop the incoming state and send a fresh random walk state instead."""
    t = int(rng.integers(space.nT))
    x = int(rng.integers(space.N))
    c = int(rng.integers(2))
    coin = _eve_coin(space, rng, random_theta)
    return evolve(basis_state(space.N, x, c), coin, t), {"t": t, "x": x, "c": c, "theta": coin.theta}


# --------------------------------------------------------------------------
# interceptors


def _public_space(config):
    return ParameterSpace(config.N, config.nT, config.coin), config.theta_mode == "random"


class IR1Interceptor(Interceptor):
    kind = "IR1"

    def intercept(self, leg, index, state, rng):
        return attack_ir1(state, rng)


class IR2Interceptor(Interceptor):
    kind = "IR2"

    def __init__(self, legs=None, eve_space=None):
        super().__init__(legs)
        self.eve_space = eve_space

    def begin(self, session):
        super().begin(session)
        space, self.random_theta = _public_space(session.config)
        if self.eve_space is None:
            self.eve_space = space

    def intercept(self, leg, index, state, rng):
        return attack_ir2(state, self.eve_space, rng, self.random_theta)


class DoSInterceptor(Interceptor):
    kind = "DoS"

    def begin(self, session):
        super().begin(session)
        self.space, self.random_theta = _public_space(session.config)

    def intercept(self, leg, index, state, rng):
        return attack_dos(state, self.space, rng, self.random_theta)


class MitmInterceptor(Interceptor):
    """Store the genuine states, substitute Eve's own, and read the encoding off hers.

    QSDC: Bob encodes on Eve's states; she decodes them exactly, re-encodes
    the symbol onto Alice's stored state and returns that. CQD: Alice
    encodes on Eve's states; Eve forwards Charlie's stored states to Bob and
    decodes hers once the extra layer is announced.
    """

    kind = "MITM"

    def default_legs(self, session):
        return session.legs

    def begin(self, session):
        super().begin(session)
        if set(self.legs) != set(session.legs):
            raise ValueError("MITM must span both quantum legs")
        self.space, self.random_theta = _public_space(session.config)
        self.protocol = session.protocol
        self.stored = {}
        self.own = {}
        self.held = {}

    def intercept(self, leg, index, state, rng):
        if leg == self.session.legs[0]:
            self.stored[index] = state
            fresh, prep = attack_dos(state, self.space, rng, self.random_theta)
            self.own[index] = prep
            return fresh, {"substituted": prep}
        if self.protocol == "qsdc":
            prep = self.own[index]
            coin = CoinParams(prep["theta"], self.space.coin.xi, self.space.coin.zeta)
            x, _, _ = measure(evolve(state, coin, -prep["t"]), rng)
            m = (x - prep["x"]) % state.N
            self.symbol_guesses[index] = m
            return encode_symbol(self.stored[index], m), {"read": m}
        self.held[index] = state
        return self.stored[index], {"held": True}

    def on_classical(self, event):
        if self.protocol != "cqd" or event.label != "layer":
            return
        layer = CoinParams(event.payload["theta_r"], self.space.coin.xi, self.space.coin.zeta)
        k = event.payload["k"]
        rng = np.random.default_rng(0)  # Eve's own states undo exactly; the draw is deterministic
        for index, state in sorted(self.held.items()):
            prep = self.own[index]
            coin = CoinParams(prep["theta"], self.space.coin.xi, self.space.coin.zeta)
            x, _, _ = measure(evolve(evolve(state, layer, -k), coin, -prep["t"]), rng)
            self.symbol_guesses[index] = (x - prep["x"]) % state.N


class UntrustedCharlie(Interceptor):
    """Charlie undoes his own preparation on the Alice-to-Bob leg and measures.

    He does not know Alice's extra layer, so his guess ``x - x_i`` is
    scrambled by it. He re-prepares ``U(theta_i)^t_i |x, c>`` and forwards.
    """

    kind = "UntrustedCharlie"
    needs_secrets = True

    def default_legs(self, session):
        return ("alice->bob",)

    def begin(self, session):
        if session.protocol != "cqd":
            raise ValueError("an untrusted Charlie only exists in the CQD protocol")
        super().begin(session)
        self.preps = {p.index: p for p in session.preps}

    def intercept(self, leg, index, state, rng):
        prep = self.preps[index]
        x, c, _ = measure(evolve(state, prep.coin, -prep.t), rng)
        guess = (x - prep.x) % state.N
        self.symbol_guesses[index] = guess
        resent = evolve(basis_state(state.N, x, c), prep.coin, prep.t)
        return resent, {"x": x, "c": c, "guess": guess}


class QubitInterceptResend(Interceptor):
    """Measure each qubit in a random Z/X basis and resend the eigenstate."""

    kind = "LM05-IR"

    def begin(self, session):
        if session.protocol != "lm05":
            raise ValueError("qubit intercept-resend only applies to LM05")
        super().begin(session)

    def intercept(self, leg, index, state, rng):
        basis = int(rng.integers(2))
        label = measure_qubit(state, basis, rng)
        return prepared_qubit(label), {"basis": "ZX"[basis], "outcome": LABELS[label]}


def make_interceptor(kind, legs=None, protocol="qsdc"):
    """Build an interceptor by name; IR1 on LM05 maps to the qubit attack."""
    if kind in (None, "none"):
        return None
    if protocol == "lm05":
        if kind not in ("IR1", "IR", "LM05-IR"):
            raise ValueError(f"attack {kind!r} is not defined for LM05")
        return QubitInterceptResend(legs)
    table = {
        "IR1": IR1Interceptor,
        "IR2": IR2Interceptor,
        "DoS": DoSInterceptor,
        "MITM": MitmInterceptor,
        "UntrustedCharlie": UntrustedCharlie,
    }
    if kind not in table:
        raise ValueError(f"unknown attack {kind!r}")
    return table[kind](legs)


def attack_mitm(config, message, rng, protocol="qsdc", msg_b=None):
    """Run a full session under MITM and return the attack report."""
    eve = MitmInterceptor()
    if protocol == "qsdc":
        return run_qsdc(config, message, eve, rng).attack
    return run_cqd(config, message, msg_b, eve, rng).attack


def attack_untrusted_charlie(config, msg_a, msg_b, rng, protocol="cqd"):
    if protocol != "cqd":
        raise ValueError("an untrusted Charlie only exists in the CQD protocol")
    return run_cqd(config, msg_a, msg_b, UntrustedCharlie(), rng).attack


# --------------------------------------------------------------------------
# exact oracles (fixed-theta ensemble)


def _pass_ir1(P):
    a2 = np.abs(P) ** 2  # [t, out, in]
    return float(np.mean(np.sum(a2 ** 2, axis=1)))


def _pass_ir2(P):
    nT = P.shape[0]
    total = 0.0
    for ta in range(nT):
        for te in range(nT):
            M = P[te].conj().T @ P[ta]
            total += np.sum(np.abs(M) ** 4)
    return total / (nT * nT * P.shape[1])


def _pass_dos(P):
    # average of |<i_A| U^-t_A U^t' |i'>|^2 over prep and replacement ensembles
    nT, d, _ = P.shape
    total = 0.0
    for ta in range(nT):
        for tr in range(nT):
            total += np.sum(np.abs(P[ta].conj().T @ P[tr]) ** 2)
    return total / (nT * d) ** 2


def detection_exact(strategy, space):
    """Per-checked-state detection probability, by full enumeration.

    The ensemble is Alice's uniform ``(t_A, x_A, c_A)`` with the public
    fixed coin, Eve's uniform choices, and all measurement outcomes.
    """
    P = step_powers(space.N, space.coin, space.nT)
    if strategy == "IR1":
        return 1.0 - _pass_ir1(P)
    if strategy == "IR2":
        return 1.0 - _pass_ir2(P)
    if strategy in ("DoS", "MITM"):
        return 1.0 - _pass_dos(P)
    raise ValueError(f"no exact oracle for strategy {strategy!r}")


def detection_mc(strategy, space, trials, rng):
    """Monte Carlo estimate; returns ``(rate, detections, trials)``."""
    P = step_powers(space.N, space.coin, space.nT)
    d = 2 * space.N
    t_a = rng.integers(space.nT, size=trials)
    i_a = rng.integers(d, size=trials)
    t_e = rng.integers(space.nT, size=trials)
    i_r = rng.integers(d, size=trials)
    u_eve = rng.random(trials)
    u_bob = rng.random(trials)
    mismatch, _ = kernels.mc_detection(P, strategy, t_a, i_a, t_e, i_r, u_eve, u_bob)
    hits = int(np.count_nonzero(mismatch))
    return hits / trials, hits, trials


def _overlap(a, b):
    """``|<a|b>|^2`` for BB84 labels, as an exact fraction."""
    if a // 2 != b // 2:
        return Fraction(1, 2)
    return Fraction(int(a == b))


def lm05_ir_detection_exact():
    """Enumerate 4 preparations x 2 Eve bases x outcomes; returns 1/4."""
    passed = Fraction(0)
    for a in range(4):
        for eb in range(2):
            for e in (2 * eb, 2 * eb + 1):
                passed += Fraction(1, 4) * Fraction(1, 2) * _overlap(e, a) * _overlap(a, e)
    return float(1 - passed)


def lm05_ir_detection_mc(trials, rng):
    hits = 0
    for _ in range(trials):
        a = int(rng.integers(4))
        q = prepared_qubit(a)
        e = measure_qubit(q, int(rng.integers(2)), rng)
        hits += measure_qubit(prepared_qubit(e), a // 2, rng) != a
    return hits / trials, hits, trials


def _charlie_matrices(space, coin_r, k):
    P = step_powers(space.N, space.coin, space.nT)
    R = np.linalg.matrix_power(np.asarray(step_powers(space.N, coin_r, 2)[1]), k)
    return [P[t].conj().T @ R @ P[t] for t in range(space.nT)]


def charlie_guess_accuracy_exact(space, coin_r, ks):
    """Chance that Charlie's guess equals Alice's symbol, fixed-theta ensemble.

    Averages over ``t`` in the step set, the initial basis state, and the
    layer exponents ``ks``. The symbol itself drops out by translation
    invariance.
    """
    ks = [ks] if isinstance(ks, int) else list(ks)
    total = 0.0
    for k in ks:
        for M in _charlie_matrices(space, coin_r, k):
            a2 = np.abs(M) ** 2
            for i in range(M.shape[0]):
                x = i // 2
                total += a2[2 * x, i] + a2[2 * x + 1, i]
    return total / (len(ks) * space.nT * 2 * space.N)


def charlie_detection_exact(space, coin_r, ks):
    """Probability Bob's decoy check flags a state Charlie re-prepared."""
    ks = [ks] if isinstance(ks, int) else list(ks)
    passed = 0.0
    for k in ks:
        for M in _charlie_matrices(space, coin_r, k):
            passed += np.sum(np.abs(M) ** 4)
    return 1.0 - passed / (len(ks) * space.nT * 2 * space.N)


def charlie_guess_mc(space, trials, rng, coin_r=None, ks=None, random_theta=False):
    """Simulate Charlie's guess on single message states.

    ``coin_r``/``ks`` default to Alice's per-batch draws (uniform theta_r and
    ``k`` in ``1..nT``). Returns ``(accuracy, hits, trials)``.
    """
    N = space.N
    hits = 0
    for _ in range(trials):
        t = int(rng.integers(space.nT))
        x = int(rng.integers(N))
        c = int(rng.integers(2))
        a = int(rng.integers(N))
        coin = _eve_coin(space, rng, random_theta)
        layer = coin_r if coin_r is not None else CoinParams(
            float(rng.uniform(0.0, 2.0 * math.pi)), space.coin.xi, space.coin.zeta)
        k = int(rng.choice(ks)) if ks is not None else int(rng.integers(1, space.nT + 1))
        state = evolve(encode_symbol(evolve(basis_state(N, x, c), coin, t), a), layer, k)
        xm, _, _ = measure(evolve(state, coin, -t), rng)
        hits += (xm - x) % N == a
    return hits / trials, hits, trials


def fixed_config(space, n=16, error_tolerance=0.0, **kw):
    """Protocol config matching a fixed-theta analysis space."""
    return ProtocolConfig(N=space.N, n=n, nT=space.nT, theta_mode="fixed", coin=space.coin,
                          error_tolerance=error_tolerance, **kw)
