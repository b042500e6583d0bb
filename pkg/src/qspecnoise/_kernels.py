"""Hot inner loops for density-matrix noise simulation.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics.  The numba path is used when numba is
importable and the environment variable ``QSPECNOISE_DISABLE_NUMBA`` is not
set to a truthy value.  Both paths are importable directly (``*_numba`` /
``*_numpy``) so tests and ``benchmarks/bench_kernels.py`` can compare them.

Qubit ``q`` is bit ``q`` (value ``2**q``) of a basis index.
"""

import os

import numpy as np

_FLAG = os.environ.get("QSPECNOISE_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


# ---------------------------------------------------------------------------
# numpy reference path
# ---------------------------------------------------------------------------

def kraus_superop(kraus):
    """4x4 superoperator S with vec(rho') = S vec(rho) on one qubit.

    ``vec`` flattens the (row bit, column bit) pair row-major.
    """
    kraus = np.asarray(kraus, dtype=np.complex128)
    return np.einsum("kab,kcd->acbd", kraus, kraus.conj()).reshape(4, 4)


def apply_kraus_1q_numpy(rho, kraus, qubit):
    dim = rho.shape[0]
    lo = 1 << qubit
    hi = dim // (2 * lo)
    s = kraus_superop(kraus).reshape(2, 2, 2, 2)
    # index = h * 2*lo + b * lo + l
    t = rho.reshape(hi, 2, lo, hi, 2, lo)
    out = np.einsum("acbd,xbyzdw->xayzcw", s, t, optimize=True)
    return np.ascontiguousarray(out).reshape(dim, dim)


def conjugate_diagonal_numpy(rho, phases):
    return rho * np.outer(phases, phases.conj())


def popcount_table_numpy(n):
    idx = np.arange(1 << n, dtype=np.int64)
    x = idx[:, None] ^ idx[None, :]
    count = np.zeros_like(x)
    for _ in range(n):
        count += x & 1
        x >>= 1
    return count


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def apply_kraus_1q_numba(rho, kraus, qubit):
        dim = rho.shape[0]
        lo = 1 << qubit
        s = np.zeros((2, 2, 2, 2), dtype=np.complex128)
        for k in range(kraus.shape[0]):
            for a in range(2):
                for b in range(2):
                    for c in range(2):
                        for d in range(2):
                            s[a, c, b, d] += kraus[k, a, b] * np.conj(kraus[k, c, d])
        out = np.empty_like(rho)
        for i in range(dim):
            if i & lo:
                continue
            i1 = i | lo
            for j in range(dim):
                if j & lo:
                    continue
                j1 = j | lo
                r00 = rho[i, j]
                r01 = rho[i, j1]
                r10 = rho[i1, j]
                r11 = rho[i1, j1]
                out[i, j] = s[0, 0, 0, 0] * r00 + s[0, 0, 0, 1] * r01 + s[0, 0, 1, 0] * r10 + s[0, 0, 1, 1] * r11
                out[i, j1] = s[0, 1, 0, 0] * r00 + s[0, 1, 0, 1] * r01 + s[0, 1, 1, 0] * r10 + s[0, 1, 1, 1] * r11
                out[i1, j] = s[1, 0, 0, 0] * r00 + s[1, 0, 0, 1] * r01 + s[1, 0, 1, 0] * r10 + s[1, 0, 1, 1] * r11
                out[i1, j1] = s[1, 1, 0, 0] * r00 + s[1, 1, 0, 1] * r01 + s[1, 1, 1, 0] * r10 + s[1, 1, 1, 1] * r11
        return out

    @numba.njit(cache=True, nogil=True)
    def conjugate_diagonal_numba(rho, phases):
        dim = rho.shape[0]
        out = np.empty_like(rho)
        for i in range(dim):
            pi = phases[i]
            for j in range(dim):
                out[i, j] = pi * rho[i, j] * np.conj(phases[j])
        return out

    @numba.njit(cache=True, nogil=True)
    def popcount_table_numba(n):
        dim = 1 << n
        out = np.empty((dim, dim), dtype=np.int64)
        for i in range(dim):
            for j in range(dim):
                x = i ^ j
                c = 0
                while x:
                    x &= x - 1
                    c += 1
                out[i, j] = c
        return out

else:  # pragma: no cover
    apply_kraus_1q_numba = apply_kraus_1q_numpy
    conjugate_diagonal_numba = conjugate_diagonal_numpy
    popcount_table_numba = popcount_table_numpy


if USE_NUMBA:
    apply_kraus_1q = apply_kraus_1q_numba
    conjugate_diagonal = conjugate_diagonal_numba
    popcount_table = popcount_table_numba
else:
    apply_kraus_1q = apply_kraus_1q_numpy
    conjugate_diagonal = conjugate_diagonal_numpy
    popcount_table = popcount_table_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
