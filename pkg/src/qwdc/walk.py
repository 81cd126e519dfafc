"""Discrete-time quantum walk on an N-cycle.

Basis ordering is ``index = 2*x + c`` for position ``x`` and coin ``c``.
Operators are dense ``complex128`` arrays; the cycles involved are small.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from . import kernels

__all__ = [
    "CoinParams",
    "WalkState",
    "make_coin",
    "make_shift",
    "make_step",
    "make_translation",
    "step_powers",
    "basis_state",
    "evolve",
    "position_distribution",
    "measure",
    "encode_symbol",
    "is_unitary",
    "UNITARY_ATOL",
]

UNITARY_ATOL = 1e-10


def _check_cycle(N):
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
        raise TypeError(f"cycle length must be an int, got {type(N).__name__}")
    if N < 2:
        raise ValueError(f"cycle length must be >= 2, got {N}")
    return int(N)


@dataclass(frozen=True)
class CoinParams:
    """Angles ``(theta, xi, zeta)`` of the SU(2) coin, in radians.

    Values are stored as given; no reduction to ``[0, 2pi)`` is applied.
    """

    theta: float
    xi: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        for name in ("theta", "xi", "zeta"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"coin parameter {name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    def to_dict(self):
        return {"theta": self.theta, "xi": self.xi, "zeta": self.zeta}

    @classmethod
    def from_dict(cls, d):
        return cls(d["theta"], d.get("xi", 0.0), d.get("zeta", 0.0))


@dataclass(frozen=True, eq=False)
class WalkState:
    """Pure state of the walker: ``2N`` complex amplitudes."""

    N: int
    amplitudes: np.ndarray

    def __post_init__(self):
        N = _check_cycle(self.N)
        amp = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amp.shape[0] != 2 * N:
            raise ValueError(f"expected {2 * N} amplitudes for N={N}, got {amp.shape[0]}")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > UNITARY_ATOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amp.setflags(write=False)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self):
        return 2 * self.N

    def amplitude(self, x, c):
        return complex(self.amplitudes[2 * x + c])

    def allclose(self, other, atol=UNITARY_ATOL):
        return self.N == other.N and np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol)

    def to_dict(self):
        return {
            "N": self.N,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, d):
        amps = np.array([complex(re, im) for re, im in d["amplitudes"]], dtype=np.complex128)
        return cls(int(d["N"]), amps)


def make_coin(params):
    """Return the 2x2 coin for ``params``.

    The bottom-right entry carries a minus sign so the matrix is unitary
    for every theta; at ``theta=pi/4, xi=zeta=0`` this is the Hadamard coin.
    """
    th, xi, ze = params.theta, params.xi, params.zeta
    c, s = math.cos(th), math.sin(th)
    return np.array(
        [
            [np.exp(1j * xi) * c, np.exp(1j * ze) * s],
            [np.exp(-1j * ze) * s, -np.exp(-1j * xi) * c],
        ],
        dtype=np.complex128,
    )


@lru_cache(maxsize=64)
def _shift(N):
    S = np.zeros((2 * N, 2 * N), dtype=np.complex128)
    for x in range(N):
        S[2 * ((x - 1) % N), 2 * x] = 1.0
        S[2 * ((x + 1) % N) + 1, 2 * x + 1] = 1.0
    S.setflags(write=False)
    return S


def make_shift(N):
    """Conditional shift: coin 0 moves to ``x-1``, coin 1 to ``x+1`` (mod N)."""
    return _shift(_check_cycle(N)).copy()


def make_step(N, params):
    """One walk step ``S (I_N kron R_c)``."""
    N = _check_cycle(N)
    return _shift(N) @ np.kron(np.eye(N), make_coin(params))


def make_translation(N, y):
    """``T(y) kron I_c``: ``|x, c> -> |x + y mod N, c>``."""
    N = _check_cycle(N)
    y = int(y) % N
    T = np.zeros((2 * N, 2 * N), dtype=np.complex128)
    for x in range(N):
        for c in (0, 1):
            T[2 * ((x + y) % N) + c, 2 * x + c] = 1.0
    return T


@lru_cache(maxsize=256)
def _powers_cached(N, params, count):
    P = kernels.matrix_powers(make_step(N, params), count)
    P.setflags(write=False)
    return P


def step_powers(N, params, count):
    """Stacked ``U**0 .. U**(count-1)``, cached per ``(N, params, count)``."""
    return _powers_cached(_check_cycle(N), params, int(count))


def is_unitary(op, atol=UNITARY_ATOL):
    op = np.asarray(op)
    eye = np.eye(op.shape[0])
    return bool(np.max(np.abs(op @ op.conj().T - eye)) <= atol)


def basis_state(N, x, c):
    N = _check_cycle(N)
    if not 0 <= x < N:
        raise ValueError(f"position {x} outside 0..{N - 1}")
    if c not in (0, 1):
        raise ValueError(f"coin must be 0 or 1, got {c}")
    amp = np.zeros(2 * N, dtype=np.complex128)
    amp[2 * x + c] = 1.0
    return WalkState(N, amp)


def evolve(state, params, t):
    """Apply ``U**t``; negative ``t`` applies ``(U^dagger)**|t|``."""
    t = int(t)
    if t == 0:
        return state
    U = make_step(state.N, params)
    if t < 0:
        U = U.conj().T
    amp = np.array(state.amplitudes)
    for _ in range(abs(t)):
        amp = U @ amp
    return WalkState(state.N, _renormalize(amp))


def _renormalize(amp):
    # long evolutions drift by ~1e-15 per step; keep the stored norm exact
    return amp / math.sqrt(float(np.vdot(amp, amp).real))


def position_distribution(state):
    p = np.abs(state.amplitudes) ** 2
    return p[0::2] + p[1::2]


def measure(state, rng):
    """Projective measurement in the ``|x, c>`` basis.

    Returns ``(x, c, collapsed_state)``.
    """
    probs = np.abs(state.amplitudes) ** 2
    idx = kernels.sample_index(probs, rng.random())
    x, c = divmod(idx, 2)
    return x, c, basis_state(state.N, x, c)


def encode_symbol(state, m):
    if not 0 <= m < state.N:
        raise ValueError(f"symbol {m} outside 0..{state.N - 1}")
    if m == 0:
        return state
    return WalkState(state.N, np.roll(state.amplitudes, 2 * m))
