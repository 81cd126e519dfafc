"""Brute-force reference computations, written without the package's code paths."""
import cmath
import itertools
import math

import numpy as np


def coin(theta, xi, zeta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([
        [cmath.exp(1j * xi) * c, cmath.exp(1j * zeta) * s],
        [cmath.exp(-1j * zeta) * s, -cmath.exp(-1j * xi) * c],
    ])


def step(N, theta, xi, zeta):
    """Walk step assembled entry by entry: coin first, then the conditional move."""
    C = coin(theta, xi, zeta)
    U = np.zeros((2 * N, 2 * N), dtype=complex)
    for x in range(N):
        for c in range(2):
            for c2 in range(2):
                x2 = (x - 1) % N if c2 == 0 else (x + 1) % N
                U[2 * x2 + c2, 2 * x + c] += C[c2, c]
    return U


def joint_ir2(N, nT, theta, xi, zeta):
    U = step(N, theta, xi, zeta)
    powers = [np.linalg.matrix_power(U, t) for t in range(nT)]
    inverses = [np.linalg.inv(p) for p in powers]
    p = np.zeros((nT, N, 2, nT, N, 2))
    for ta, xa, ca, te, xe, ce in itertools.product(range(nT), range(N), range(2), range(nT), range(N), range(2)):
        amp = (inverses[te] @ powers[ta])[2 * xe + ce, 2 * xa + ca]
        p[ta, xa, ca, te, xe, ce] = abs(amp) ** 2 / (2 * N * nT * nT)
    return p


def joint_ir1(N, nT, theta, xi, zeta):
    U = step(N, theta, xi, zeta)
    p = np.zeros((nT, N, 2, N, 2))
    for ta in range(nT):
        Pt = np.linalg.matrix_power(U, ta)
        for xa, ca, xe, ce in itertools.product(range(N), range(2), range(N), range(2)):
            p[ta, xa, ca, xe, ce] = abs(Pt[2 * xe + ce, 2 * xa + ca]) ** 2 / (2 * N * nT)
    return p


def total_correlation(p):
    """sum p log2(p / prod of single-axis marginals), by explicit loops."""
    margs = []
    for a in range(p.ndim):
        m = [0.0] * p.shape[a]
        for idx in itertools.product(*[range(s) for s in p.shape]):
            m[idx[a]] += p[idx]
        margs.append(m)
    total = 0.0
    for idx in itertools.product(*[range(s) for s in p.shape]):
        v = p[idx]
        if v > 0:
            denom = 1.0
            for a, i in enumerate(idx):
                denom *= margs[a][i]
            total += v * math.log2(v / denom)
    return total


def matrix_power_evolve(N, theta, xi, zeta, x, c, t):
    U = step(N, theta, xi, zeta)
    v = np.zeros(2 * N, dtype=complex)
    v[2 * x + c] = 1
    M = np.linalg.matrix_power(U, t) if t >= 0 else np.linalg.matrix_power(np.linalg.inv(U), -t)
    return M @ v
