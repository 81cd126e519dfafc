"""Qubit baseline: the LM05/DL04 two-way direct communication protocol.

Qubits are standalone 2-vectors, independent of the cycle machinery.
Preparation labels: 0 -> |0>, 1 -> |1>, 2 -> |+>, 3 -> |->.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .protocol import (
    CheckReport,
    Channel,
    Message,
    ProtocolConfig,
    QSDC_LEGS,
    Session,
    Transcript,
)

__all__ = ["Qubit", "QubitPrep", "IY", "prepared_qubit", "measure_qubit", "run_lm05", "LM05_LEGS"]

LM05_LEGS = QSDC_LEGS

_S = 1.0 / np.sqrt(2.0)
_KETS = np.array([[1, 0], [0, 1], [_S, _S], [_S, -_S]], dtype=np.complex128)
LABELS = ("0", "1", "+", "-")

IY = np.array([[0, 1], [-1, 0]], dtype=np.complex128)  # Z @ X


@dataclass(frozen=True, eq=False)
class Qubit:
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=np.complex128).reshape(2)
        if abs(float(np.vdot(amp, amp).real) - 1.0) > 1e-10:
            raise ValueError("qubit is not normalized")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def apply(self, op):
        return Qubit(op @ self.amplitudes)

    def to_dict(self):
        return {"amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes]}


@dataclass(frozen=True)
class QubitPrep:
    index: int
    label: int

    @property
    def basis(self):
        """0 for the Z basis, 1 for the X basis."""
        return self.label // 2

    def to_dict(self):
        return {"index": self.index, "state": LABELS[self.label]}


def prepared_qubit(label):
    return Qubit(_KETS[label])


def measure_qubit(q, basis, rng):
    """Measure in Z (``basis=0``) or X (``basis=1``); returns the outcome label."""
    kets = _KETS[2 * basis: 2 * basis + 2]
    probs = np.abs(kets.conj() @ q.amplitudes) ** 2
    return 2 * basis + kernels.sample_index(probs, rng.random())


def _check(states, preps, tolerance, rng, step):
    bad = [p.index for p in preps if measure_qubit(states[p.index], p.basis, rng) != p.label]
    return CheckReport(step, tuple(sorted(states)), tuple(bad), tolerance)


def run_lm05(config, message, interceptor=None, rng=None):
    """Run the qubit protocol carrying one bit per message qubit.

    Only ``config.n`` and ``config.error_tolerance`` are used.
    """
    if any(s not in (0, 1) for s in message.symbols):
        raise ValueError("LM05 carries 1-bit symbols")
    if len(message.symbols) > config.capacity:
        raise ValueError(f"message needs {len(message.symbols)} symbols, batch carries {config.capacity}")
    rng = np.random.default_rng() if rng is None else rng
    n = config.n
    bits = list(message.symbols) + [0] * (config.capacity - len(message.symbols))

    preps = [QubitPrep(i, int(rng.integers(4))) for i in range(n)]
    tr = Transcript("lm05", config, preps)
    tr.inputs["bob"] = message
    if interceptor is not None:
        interceptor.begin(Session("lm05", config, LM05_LEGS, None))
    ch = Channel(tr, interceptor, rng)
    received = [ch.send_quantum("alice->bob", p.index, prepared_qubit(p.label), "qubit") for p in preps]

    check = sorted(int(i) for i in rng.choice(n, n // 2, replace=False))
    rest = sorted(set(range(n)) - set(check))
    msg_idx = sorted(int(i) for i in rng.choice(rest, n // 4, replace=False))
    decoys = sorted(set(rest) - set(msg_idx))
    tr.partition = {"check": check, "message": msg_idx, "decoy": decoys}
    truth = dict(zip(msg_idx, bits))

    ch.send_classical("bob->alice", "check-indices", check)
    reveal = ch.send_classical("alice->public", "reveal", [preps[i] for i in check])
    report = _check({i: received[i] for i in check}, reveal, config.error_tolerance, rng, "bob-check")
    tr.checks.append(report)
    if not report.passed:
        tr.aborted, tr.abort_step = True, "bob-check"
        return _done(tr, interceptor, truth)

    outgoing = {i: (received[i].apply(IY) if b else received[i]) for i, b in zip(msg_idx, bits)}
    outgoing.update({i: received[i] for i in decoys})
    returned = {i: ch.send_quantum("bob->alice", i, outgoing[i], "qubit") for i in sorted(outgoing)}

    ch.send_classical("alice->bob", "received", True)
    ch.send_classical("bob->alice", "decoy-indices", decoys)
    report = _check({i: returned[i] for i in decoys}, [preps[i] for i in decoys],
                    config.error_tolerance, rng, "alice-decoy-check")
    tr.checks.append(report)
    if not report.passed:
        tr.aborted, tr.abort_step = True, "alice-decoy-check"
        return _done(tr, interceptor, truth)

    # iY flips the label within its basis, so a changed outcome reads as 1
    decoded = [int(measure_qubit(returned[i], preps[i].basis, rng) != preps[i].label) for i in msg_idx]
    tr.decoded["alice"] = Message.from_symbols(decoded[: len(message.symbols)], 2, message.padding)
    return _done(tr, interceptor, truth)


def _done(tr, interceptor, truth):
    if interceptor is not None:
        tr.attack = interceptor.report(tr.checks, truth)
    return tr


def default_config(n=16, error_tolerance=0.0):
    return ProtocolConfig(N=2, n=n, nT=1, theta_mode="fixed", error_tolerance=error_tolerance)
