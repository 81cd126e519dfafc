"""QSDC and CQD protocol runs over a simulated channel.

A run is a sequential state machine driven by one ``numpy.random.Generator``.
Quantum payloads pass through :class:`Channel`, which hands them to an
optional :class:`Interceptor` on the legs it targets. Everything that
happens is recorded in a :class:`Transcript`.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np

from .walk import CoinParams, basis_state, encode_symbol, evolve, measure

__all__ = [
    "Message",
    "chunk_message",
    "unchunk",
    "StatePrep",
    "ProtocolConfig",
    "ChannelEvent",
    "CheckReport",
    "Transcript",
    "Session",
    "Interceptor",
    "Channel",
    "eavesdrop_check",
    "prepare_states",
    "run_qsdc",
    "run_cqd",
    "QSDC_LEGS",
    "CQD_LEGS",
]

QSDC_LEGS = ("alice->bob", "bob->alice")
CQD_LEGS = ("charlie->alice", "alice->bob")


# --------------------------------------------------------------------------
# messages


def bits_per_symbol(N):
    return max(1, int(math.floor(math.log2(N))))


@dataclass(frozen=True)
class Message:
    bits: str
    symbols: tuple
    padding: int
    N: int

    @classmethod
    def from_symbols(cls, symbols, N, padding=0):
        """Rebuild a message from decoded symbols.

        ``bits`` is empty when a symbol does not fit in the per-symbol width,
        which only happens when the channel was disturbed.
        """
        k = bits_per_symbol(N)
        symbols = tuple(int(s) for s in symbols)
        if any(s >= 2 ** k for s in symbols):
            return cls("", symbols, padding, N)
        raw = "".join(format(s, f"0{k}b") for s in symbols)
        if padding:
            raw = raw[:-padding]
        return cls(raw, symbols, padding, N)

    def to_dict(self):
        return {"bits": self.bits, "symbols": list(self.symbols), "padding": self.padding, "N": self.N}


def chunk_message(bits, N):
    """Big-endian grouping of ``bits`` into ``floor(log2 N)``-bit symbols.

    The last group is zero-padded at its tail.
    """
    if N < 2:
        raise ValueError(f"cycle length must be >= 2, got {N}")
    if not isinstance(bits, str):
        bits = "".join(str(int(b)) for b in bits)
    if set(bits) - {"0", "1"}:
        raise ValueError("bits must contain only '0' and '1'")
    k = bits_per_symbol(N)
    padding = (-len(bits)) % k
    padded = bits + "0" * padding
    symbols = tuple(int(padded[i:i + k], 2) for i in range(0, len(padded), k))
    return Message(bits, symbols, padding, N)


def unchunk(message):
    return Message.from_symbols(message.symbols, message.N, message.padding).bits


# --------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class StatePrep:
    index: int
    t: int
    x: int
    c: int
    coin: CoinParams

    def to_dict(self):
        return {"index": self.index, "t": self.t, "x": self.x, "c": self.c, "coin": self.coin.to_dict()}


@dataclass(frozen=True)
class ProtocolConfig:
    """Public parameters of a run.

    ``theta_mode='random'`` draws each state's theta uniformly from
    ``[0, 2pi)``; ``'fixed'`` uses ``coin.theta`` for every state. ``coin.xi``
    and ``coin.zeta`` are used in both modes. ``cqd_k``/``cqd_theta_r``
    pin Alice's extra CQD layer; left as ``None`` they are drawn per batch.
    """

    N: int = 5
    n: int = 16
    nT: int = 7
    theta_mode: str = "random"
    coin: CoinParams = field(default_factory=lambda: CoinParams(math.pi / 4, math.pi / 4, math.pi / 4))
    error_tolerance: float = 0.0
    cqd_k: int = None
    cqd_theta_r: float = None

    check_fraction = 0.5

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.n <= 0 or self.n % 4:
            raise ValueError(f"n must be a positive multiple of 4, got {self.n}")
        if self.nT < 1:
            raise ValueError(f"nT must be >= 1, got {self.nT}")
        if self.theta_mode not in ("random", "fixed"):
            raise ValueError(f"theta_mode must be 'random' or 'fixed', got {self.theta_mode!r}")
        if not 0.0 <= self.error_tolerance <= 1.0:
            raise ValueError("error_tolerance must lie in [0, 1]")
        if self.cqd_k is not None and self.cqd_k < 0:
            raise ValueError("cqd_k must be non-negative")

    @property
    def capacity(self):
        """Number of message symbols one batch carries."""
        return self.n // 4

    def to_dict(self):
        return {
            "N": self.N,
            "n": self.n,
            "nT": self.nT,
            "theta_mode": self.theta_mode,
            "coin": self.coin.to_dict(),
            "check_fraction": self.check_fraction,
            "error_tolerance": self.error_tolerance,
            "cqd_k": self.cqd_k,
            "cqd_theta_r": self.cqd_theta_r,
        }


@dataclass(frozen=True)
class ChannelEvent:
    leg: str
    kind: str  # "quantum" or "classical"
    label: str
    payload: object
    index: int = None
    action: str = "none"
    delivered: object = None

    def to_dict(self):
        d = {"leg": self.leg, "kind": self.kind, "label": self.label}
        if self.index is not None:
            d["index"] = self.index
        d["payload"] = _jsonable(self.payload)
        d["action"] = self.action
        if self.delivered is not None:
            d["delivered"] = _jsonable(self.delivered)
        return d


@dataclass(frozen=True)
class CheckReport:
    step: str
    indices: tuple
    mismatched: tuple
    tolerance: float

    @property
    def error_rate(self):
        return len(self.mismatched) / len(self.indices) if self.indices else 0.0

    @property
    def passed(self):
        return self.error_rate <= self.tolerance

    def to_dict(self):
        return {
            "step": self.step,
            "indices": list(self.indices),
            "mismatched": list(self.mismatched),
            "error_rate": self.error_rate,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class Transcript:
    protocol: str
    config: ProtocolConfig
    preps: list
    events: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    partition: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    decoded: dict = field(default_factory=dict)
    announcements: dict = field(default_factory=dict)
    aborted: bool = False
    abort_step: str = None
    attack: object = None

    @property
    def error_rate(self):
        return max((c.error_rate for c in self.checks), default=0.0)

    def to_dict(self):
        return {
            "protocol": self.protocol,
            "config": self.config.to_dict(),
            "preps": [p.to_dict() for p in self.preps],
            "partition": {k: list(v) for k, v in self.partition.items()},
            "events": [e.to_dict() for e in self.events],
            "checks": [c.to_dict() for c in self.checks],
            "inputs": {k: v.to_dict() for k, v in self.inputs.items()},
            "aborted": self.aborted,
            "abort_step": self.abort_step,
            "decoded": {k: v.to_dict() for k, v in self.decoded.items()},
            "announcements": _jsonable(self.announcements),
            "attack": None if self.attack is None else self.attack.to_dict(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _jsonable(obj):
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# --------------------------------------------------------------------------
# channel and interception


@dataclass(frozen=True)
class Session:
    """What an interceptor is told when a run starts.

    ``preps`` is only filled in for an interceptor that is itself the
    preparing party (an untrusted Charlie).
    """

    protocol: str
    config: ProtocolConfig
    legs: tuple
    preps: tuple = None


class Interceptor:
    """Base class for channel attacks.

    Subclasses override :meth:`intercept`. The channel calls it for every
    quantum payload on a targeted leg and shows every classical message to
    :meth:`on_classical`.
    """

    kind = "none"
    needs_secrets = False

    def __init__(self, legs=None):
        self.legs = tuple(legs) if legs is not None else None
        self.session = None
        self.records = {}
        self.symbol_guesses = {}

    def begin(self, session):
        legs = self.legs if self.legs is not None else self.default_legs(session)
        bad = [leg for leg in legs if leg not in session.legs]
        if bad:
            raise ValueError(f"{self.kind} cannot target legs {bad} of {session.protocol}")
        self.legs = tuple(legs)
        self.session = session
        self.records = {}
        self.symbol_guesses = {}

    def default_legs(self, session):
        return session.legs[:1]

    def targets(self, leg):
        return leg in self.legs

    def intercept(self, leg, index, state, rng):
        return state

    def on_classical(self, event):
        pass

    def report(self, checks, truth_symbols):
        from .adversary import AttackReport

        touched = {i for (leg, i) in self.records}
        detected = {}
        for chk in checks:
            bad = set(chk.mismatched)
            for i in chk.indices:
                if i in touched:
                    detected[i] = i in bad
        accuracy = None
        scored = [i for i in truth_symbols if i in self.symbol_guesses]
        if scored:
            accuracy = sum(self.symbol_guesses[i] == truth_symbols[i] for i in scored) / len(scored)
        return AttackReport(
            kind=self.kind,
            legs=self.legs,
            records={f"{leg}:{i}": r for (leg, i), r in sorted(self.records.items(), key=lambda kv: (kv[0][0], kv[0][1]))},
            symbol_guesses=dict(sorted(self.symbol_guesses.items())),
            detected=dict(sorted(detected.items())),
            extraction_accuracy=accuracy,
        )


class Channel:
    """Moves payloads between parties and logs them in a transcript."""

    def __init__(self, transcript, interceptor, rng):
        self.transcript = transcript
        self.interceptor = interceptor
        self.rng = rng

    def send_quantum(self, leg, index, state, label="state"):
        eve = self.interceptor
        if eve is not None and eve.targets(leg):
            delivered, record = eve.intercept(leg, index, state, self.rng)
            if record is not None:
                eve.records[(leg, index)] = record
            self.transcript.events.append(
                ChannelEvent(leg, "quantum", label, state, index=index, action=eve.kind, delivered=delivered)
            )
            return delivered
        self.transcript.events.append(ChannelEvent(leg, "quantum", label, state, index=index))
        return state

    def send_classical(self, leg, label, payload):
        event = ChannelEvent(leg, "classical", label, payload)
        self.transcript.events.append(event)
        if self.interceptor is not None:
            self.interceptor.on_classical(event)
        return payload


# --------------------------------------------------------------------------
# protocol steps


def _draw_coin(config, rng):
    if config.theta_mode == "fixed":
        return config.coin
    return CoinParams(float(rng.uniform(0.0, 2.0 * math.pi)), config.coin.xi, config.coin.zeta)


def prepare_states(config, rng):
    """Draw ``n`` secret preparations and build ``U(theta_i)^t_i |x_i, c_i>``."""
    preps, states = [], []
    for i in range(config.n):
        t = int(rng.integers(config.nT))
        x = int(rng.integers(config.N))
        c = int(rng.integers(2))
        coin = _draw_coin(config, rng)
        preps.append(StatePrep(i, t, x, c, coin))
        states.append(evolve(basis_state(config.N, x, c), coin, t))
    return preps, states


def _undo(state, prep, outer=None):
    """Invert Alice's extra CQD layer (if any), then the preparation walk."""
    if outer is not None:
        coin_r, k = outer
        state = evolve(state, coin_r, -k)
    return evolve(state, prep.coin, -prep.t)


def eavesdrop_check(states, reveals, tolerance, rng, step="check", outer=None):
    """Invert each revealed preparation, measure, and compare with ``(x_i, c_i)``.

    ``states`` maps state index to received :class:`WalkState`. ``outer`` is an
    optional ``(coin, k)`` layer removed before the preparation walk.
    """
    reveals = list(reveals)
    if sorted(states) != sorted(p.index for p in reveals):
        raise ValueError("revealed indices do not match the checked states")
    mismatched = []
    for prep in sorted(reveals, key=lambda p: p.index):
        x, c, _ = measure(_undo(states[prep.index], prep, outer), rng)
        if (x, c) != (prep.x, prep.c):
            mismatched.append(prep.index)
    return CheckReport(step, tuple(sorted(states)), tuple(mismatched), tolerance)


def _split(n, rng):
    check = sorted(int(i) for i in rng.choice(n, n // 2, replace=False))
    rest = sorted(set(range(n)) - set(check))
    msg = sorted(int(i) for i in rng.choice(rest, n // 4, replace=False))
    decoy = sorted(set(rest) - set(msg))
    return check, msg, decoy


def _pad(message, capacity):
    if len(message.symbols) > capacity:
        raise ValueError(f"message needs {len(message.symbols)} symbols, batch carries {capacity}")
    return list(message.symbols) + [0] * (capacity - len(message.symbols))


def _start(protocol, config, interceptor, legs, preps):
    transcript = Transcript(protocol, config, list(preps))
    if interceptor is not None:
        secret = tuple(preps) if interceptor.needs_secrets else None
        interceptor.begin(Session(protocol, config, legs, secret))
    return transcript


def _finish(transcript, interceptor, truth):
    if interceptor is not None:
        transcript.attack = interceptor.report(transcript.checks, truth)
    return transcript


def run_qsdc(config, message, interceptor=None, rng=None):
    """One-way direct communication from Bob to Alice."""
    if message.N != config.N:
        raise ValueError("message was chunked for a different cycle length")
    symbols = _pad(message, config.capacity)
    rng = np.random.default_rng() if rng is None else rng
    N = config.N

    preps, prepared = prepare_states(config, rng)
    tr = _start("qsdc", config, interceptor, QSDC_LEGS, preps)
    tr.inputs["bob"] = message
    ch = Channel(tr, interceptor, rng)
    received = [ch.send_quantum("alice->bob", i, s) for i, s in enumerate(prepared)]

    check, msg_idx, decoys = _split(config.n, rng)
    tr.partition = {"check": check, "message": msg_idx, "decoy": decoys}
    ch.send_classical("bob->alice", "check-indices", check)
    reveal = ch.send_classical("alice->bob", "reveal", [preps[i] for i in check])
    report = eavesdrop_check({i: received[i] for i in check}, reveal, config.error_tolerance, rng, "bob-check")
    tr.checks.append(report)
    truth = dict(zip(msg_idx, symbols))
    if not report.passed:
        tr.aborted, tr.abort_step = True, "bob-check"
        return _finish(tr, interceptor, truth)

    outgoing = {}
    for i, m in zip(msg_idx, symbols):
        outgoing[i] = encode_symbol(received[i], m)
    for i in decoys:
        outgoing[i] = received[i]
    returned = {i: ch.send_quantum("bob->alice", i, outgoing[i]) for i in sorted(outgoing)}

    ch.send_classical("alice->bob", "received", True)
    ch.send_classical("bob->alice", "decoy-indices", decoys)
    report = eavesdrop_check(
        {i: returned[i] for i in decoys}, [preps[i] for i in decoys], config.error_tolerance, rng, "alice-decoy-check"
    )
    tr.checks.append(report)
    if not report.passed:
        tr.aborted, tr.abort_step = True, "alice-decoy-check"
        return _finish(tr, interceptor, truth)

    decoded = []
    for i in msg_idx:
        x, _, _ = measure(_undo(returned[i], preps[i]), rng)
        decoded.append((x - preps[i].x) % N)
    tr.decoded["alice"] = Message.from_symbols(decoded[: len(message.symbols)], N, message.padding)
    return _finish(tr, interceptor, truth)


def _cqd_layer(config, rng):
    k = config.cqd_k if config.cqd_k is not None else int(rng.integers(1, config.nT + 1))
    if config.cqd_theta_r is not None:
        theta_r = float(config.cqd_theta_r)
    else:
        theta_r = float(rng.uniform(0.0, 2.0 * math.pi))
    return CoinParams(theta_r, config.coin.xi, config.coin.zeta), k


def run_cqd(config, msg_a, msg_b, interceptor=None, rng=None):
    """Two-way dialogue between Alice and Bob with states supplied by Charlie."""
    for m in (msg_a, msg_b):
        if m.N != config.N:
            raise ValueError("message was chunked for a different cycle length")
    sym_a = _pad(msg_a, config.capacity)
    sym_b = _pad(msg_b, config.capacity)
    rng = np.random.default_rng() if rng is None else rng
    N = config.N

    preps, prepared = prepare_states(config, rng)
    tr = _start("cqd", config, interceptor, CQD_LEGS, preps)
    tr.inputs["alice"] = msg_a
    tr.inputs["bob"] = msg_b
    ch = Channel(tr, interceptor, rng)
    received = [ch.send_quantum("charlie->alice", i, s) for i, s in enumerate(prepared)]

    check, msg_idx, decoys = _split(config.n, rng)
    tr.partition = {"check": check, "message": msg_idx, "decoy": decoys}
    ch.send_classical("alice->charlie", "check-indices", check)
    reveal = ch.send_classical("charlie->alice", "reveal", [preps[i] for i in check])
    report = eavesdrop_check({i: received[i] for i in check}, reveal, config.error_tolerance, rng, "alice-check")
    tr.checks.append(report)
    truth = dict(zip(msg_idx, sym_a))
    if not report.passed:
        tr.aborted, tr.abort_step = True, "alice-check"
        return _finish(tr, interceptor, truth)

    coin_r, k = _cqd_layer(config, rng)
    outgoing = {}
    for i, a in zip(msg_idx, sym_a):
        outgoing[i] = encode_symbol(received[i], a)
    for i in decoys:
        outgoing[i] = received[i]
    at_bob = {}
    for i in sorted(outgoing):
        at_bob[i] = ch.send_quantum("alice->bob", i, evolve(outgoing[i], coin_r, k))

    ch.send_classical("bob->alice", "received", True)
    ch.send_classical("alice->public", "layer", {"theta_r": coin_r.theta, "k": k, "decoys": decoys})
    reveal = ch.send_classical("charlie->bob", "reveal-decoys", [preps[i] for i in decoys])
    report = eavesdrop_check(
        {i: at_bob[i] for i in decoys}, reveal, config.error_tolerance, rng, "bob-decoy-check", outer=(coin_r, k)
    )
    tr.checks.append(report)
    if not report.passed:
        tr.aborted, tr.abort_step = True, "bob-decoy-check"
        return _finish(tr, interceptor, truth)

    encoded = {i: encode_symbol(at_bob[i], b) for i, b in zip(msg_idx, sym_b)}
    reveal = ch.send_classical("charlie->bob", "reveal-messages", [preps[i] for i in msg_idx])
    sums = []
    for prep in reveal:
        x, _, _ = measure(_undo(encoded[prep.index], prep, (coin_r, k)), rng)
        sums.append((x - prep.x) % N)
    ch.send_classical("bob->public", "sums", sums)
    tr.announcements = {"theta_r": coin_r.theta, "k": k, "sums": sums}

    from_bob = [(s - a) % N for s, a in zip(sums, sym_a)]
    from_alice = [(s - b) % N for s, b in zip(sums, sym_b)]
    tr.decoded["alice"] = Message.from_symbols(from_bob[: len(msg_b.symbols)], N, msg_b.padding)
    tr.decoded["bob"] = Message.from_symbols(from_alice[: len(msg_a.symbols)], N, msg_a.padding)
    return _finish(tr, interceptor, truth)
