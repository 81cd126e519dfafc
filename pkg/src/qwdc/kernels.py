"""Hot numeric kernels with a numba path and a pure-numpy path.

Every public function here dispatches on :func:`qwdc._accel.get_backend`.
Both paths take identical inputs (including pre-drawn uniforms for the
Monte Carlo kernels), so for a given seed they return the same samples.
"""
import numpy as np

from ._accel import get_backend, njit

__all__ = [
    "matrix_powers",
    "ir2_kernel",
    "ir1_kernel",
    "total_correlation",
    "sample_index",
    "mc_detection",
    "STRATEGY_CODES",
]

STRATEGY_CODES = {"none": 0, "IR1": 1, "IR2": 2, "DoS": 3, "MITM": 3}

_MC_CHUNK = 16384


def matrix_powers(u, count):
    """Return ``[u**0, u**1, ..., u**(count-1)]`` stacked on axis 0."""
    d = u.shape[0]
    out = np.empty((count, d, d), dtype=np.complex128)
    if count == 0:
        return out
    out[0] = np.eye(d, dtype=np.complex128)
    for t in range(1, count):
        out[t] = u @ out[t - 1]
    return out


# --------------------------------------------------------------------------
# joint-table kernels


@njit(cache=True)
def _ir2_kernel_nb(powers):
    nT, d, _ = powers.shape
    out = np.empty((nT, d, nT, d))
    for ta in range(nT):
        for te in range(nT):
            for i in range(d):
                for o in range(d):
                    acc = 0j
                    for k in range(d):
                        acc += np.conj(powers[te, k, o]) * powers[ta, k, i]
                    out[ta, i, te, o] = acc.real * acc.real + acc.imag * acc.imag
    return out


def _ir2_kernel_np(powers):
    amp = np.einsum("sko,tki->tiso", powers.conj(), powers)
    return amp.real ** 2 + amp.imag ** 2


def ir2_kernel(powers):
    """``K[ta, i, te, o] = |<o| U^-te U^ta |i>|^2`` for stacked powers of U."""
    powers = np.ascontiguousarray(powers, dtype=np.complex128)
    if get_backend() == "numba":
        return _ir2_kernel_nb(powers)
    return _ir2_kernel_np(powers)


@njit(cache=True)
def _ir1_kernel_nb(powers):
    nT, d, _ = powers.shape
    out = np.empty((nT, d, d))
    for ta in range(nT):
        for i in range(d):
            for o in range(d):
                a = powers[ta, o, i]
                out[ta, i, o] = a.real * a.real + a.imag * a.imag
    return out


def _ir1_kernel_np(powers):
    amp = powers.transpose(0, 2, 1)
    return amp.real ** 2 + amp.imag ** 2


def ir1_kernel(powers):
    """``K[ta, i, o] = |<o| U^ta |i>|^2``."""
    powers = np.ascontiguousarray(powers, dtype=np.complex128)
    if get_backend() == "numba":
        return _ir1_kernel_nb(powers)
    return np.ascontiguousarray(_ir1_kernel_np(powers))


# --------------------------------------------------------------------------
# information kernels


@njit(cache=True)
def _total_correlation_nb(flat, shape):
    ndim = shape.shape[0]
    offsets = np.zeros(ndim + 1, dtype=np.int64)
    for a in range(ndim):
        offsets[a + 1] = offsets[a] + shape[a]
    strides = np.ones(ndim, dtype=np.int64)
    for a in range(ndim - 2, -1, -1):
        strides[a] = strides[a + 1] * shape[a + 1]
    marg = np.zeros(offsets[ndim])
    n = flat.shape[0]
    for f in range(n):
        p = flat[f]
        if p == 0.0:
            continue
        for a in range(ndim):
            idx = (f // strides[a]) % shape[a]
            marg[offsets[a] + idx] += p
    total = 0.0
    for f in range(n):
        p = flat[f]
        if p <= 0.0:
            continue
        denom = 1.0
        for a in range(ndim):
            idx = (f // strides[a]) % shape[a]
            denom *= marg[offsets[a] + idx]
        total += p * np.log2(p / denom)
    return total


def _total_correlation_np(table):
    ndim = table.ndim
    denom = np.ones(table.shape)
    for a in range(ndim):
        others = tuple(b for b in range(ndim) if b != a)
        m = table.sum(axis=others)
        view = [1] * ndim
        view[a] = table.shape[a]
        denom = denom * m.reshape(view)
    mask = table > 0
    p = table[mask]
    return float(np.sum(p * np.log2(p / denom[mask])))


def total_correlation(table):
    """``sum p log2(p / prod_k p_k)`` over every axis of ``table``.

    Zero cells contribute nothing. On a 2-d table this is ordinary mutual
    information between the row and column variables.
    """
    table = np.ascontiguousarray(table, dtype=np.float64)
    if get_backend() == "numba":
        shape = np.asarray(table.shape, dtype=np.int64)
        return float(_total_correlation_nb(table.ravel(), shape))
    return _total_correlation_np(table)


# --------------------------------------------------------------------------
# sampling and Monte Carlo detection


@njit(cache=True)
def _pick(probs, u):
    total = 0.0
    for j in range(probs.shape[0]):
        total += probs[j]
    target = u * total
    acc = 0.0
    last = 0
    for j in range(probs.shape[0]):
        if probs[j] > 0.0:
            last = j
        acc += probs[j]
        if acc > target:
            return j
    return last


def _pick_rows_np(probs, u):
    cdf = np.cumsum(probs, axis=1)
    target = u * cdf[:, -1]
    j = np.sum(cdf <= target[:, None], axis=1)
    # guard against round-off pushing past the last non-zero cell
    over = j >= probs.shape[1]
    if np.any(over):
        nz = probs[over] > 0
        j[over] = probs.shape[1] - 1 - np.argmax(nz[:, ::-1], axis=1)
    return j


def sample_index(probs, u):
    """Inverse-CDF draw of one index from ``probs`` using uniform ``u``."""
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    if get_backend() == "numba":
        return int(_pick(probs, float(u)))
    return int(_pick_rows_np(probs[None, :], np.array([u]))[0])


@njit(cache=True)
def _mc_detection_nb(powers, code, t_a, i_a, t_e, i_r, u_eve, u_bob):
    m = t_a.shape[0]
    d = powers.shape[1]
    mismatch = np.zeros(m, dtype=np.bool_)
    eve_out = np.full(m, -1, dtype=np.int64)
    psi = np.empty(d, dtype=np.complex128)
    sent = np.empty(d, dtype=np.complex128)
    probs = np.empty(d)
    for s in range(m):
        pa = powers[t_a[s]]
        for k in range(d):
            psi[k] = pa[k, i_a[s]]
        if code == 0:
            for k in range(d):
                sent[k] = psi[k]
        elif code == 1:
            for k in range(d):
                probs[k] = psi[k].real ** 2 + psi[k].imag ** 2
            j = _pick(probs, u_eve[s])
            eve_out[s] = j
            for k in range(d):
                sent[k] = 0j
            sent[j] = 1.0
        elif code == 2:
            pe = powers[t_e[s]]
            for o in range(d):
                acc = 0j
                for k in range(d):
                    acc += np.conj(pe[k, o]) * psi[k]
                probs[o] = acc.real * acc.real + acc.imag * acc.imag
            j = _pick(probs, u_eve[s])
            eve_out[s] = j
            for k in range(d):
                sent[k] = pe[k, j]
        else:
            pe = powers[t_e[s]]
            for k in range(d):
                sent[k] = pe[k, i_r[s]]
        for o in range(d):
            acc = 0j
            for k in range(d):
                acc += np.conj(pa[k, o]) * sent[k]
            probs[o] = acc.real * acc.real + acc.imag * acc.imag
        mismatch[s] = _pick(probs, u_bob[s]) != i_a[s]
    return mismatch, eve_out


def _mc_detection_np(powers, code, t_a, i_a, t_e, i_r, u_eve, u_bob):
    m = t_a.shape[0]
    d = powers.shape[1]
    mismatch = np.zeros(m, dtype=np.bool_)
    eve_out = np.full(m, -1, dtype=np.int64)
    for lo in range(0, m, _MC_CHUNK):
        sl = slice(lo, min(m, lo + _MC_CHUNK))
        pa = powers[t_a[sl]]
        rows = np.arange(pa.shape[0])
        psi = pa[rows, :, i_a[sl]]
        if code == 0:
            sent = psi
        elif code == 1:
            j = _pick_rows_np(np.abs(psi) ** 2, u_eve[sl])
            eve_out[sl] = j
            sent = np.zeros_like(psi)
            sent[rows, j] = 1.0
        elif code == 2:
            pe = powers[t_e[sl]]
            phi = np.einsum("mko,mk->mo", pe.conj(), psi)
            j = _pick_rows_np(phi.real ** 2 + phi.imag ** 2, u_eve[sl])
            eve_out[sl] = j
            sent = pe[rows, :, j]
        else:
            pe = powers[t_e[sl]]
            sent = pe[rows, :, i_r[sl]]
        chi = np.einsum("mko,mk->mo", pa.conj(), sent)
        got = _pick_rows_np(chi.real ** 2 + chi.imag ** 2, u_bob[sl])
        mismatch[sl] = got != i_a[sl]
    return mismatch, eve_out


def mc_detection(powers, strategy, t_a, i_a, t_e, i_r, u_eve, u_bob):
    """Simulate prepare, intercept, resend, invert and check for a batch.

    ``i_a`` and ``i_r`` are flat basis indices ``2x + c``. ``t_e`` is Eve's
    step guess (IR2) or the replacement step count (DoS/MITM); ``i_r`` is the
    replacement basis index. Returns ``(mismatch, eve_outcome)`` where
    ``eve_outcome`` is -1 for strategies without a measurement.
    """
    code = STRATEGY_CODES[strategy]
    args = (
        np.ascontiguousarray(powers, dtype=np.complex128),
        code,
        np.ascontiguousarray(t_a, dtype=np.int64),
        np.ascontiguousarray(i_a, dtype=np.int64),
        np.ascontiguousarray(t_e, dtype=np.int64),
        np.ascontiguousarray(i_r, dtype=np.int64),
        np.ascontiguousarray(u_eve, dtype=np.float64),
        np.ascontiguousarray(u_bob, dtype=np.float64),
    )
    if get_backend() == "numba":
        return _mc_detection_nb(*args)
    return _mc_detection_np(*args)
