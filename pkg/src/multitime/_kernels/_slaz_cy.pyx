# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hierarchical protocol.

Operation-for-operation mirror of ``_slaz_py`` (same constants, same
evaluation order, double-double chain included); compiled with
-ffp-contract=off so results are bit-identical to the fallback.
"""

import numpy as np

from ._slaz_py import _constants

cdef double _SPLIT = 134217729.0  # 2**27 + 1


cdef inline void _two_prod(double a, double b, double *p, double *err) noexcept:
    cdef double aa, ah, al, bb, bh, bl
    p[0] = a * b
    aa = a * _SPLIT
    ah = aa - (aa - a)
    al = a - ah
    bb = b * _SPLIT
    bh = bb - (bb - b)
    bl = b - bh
    err[0] = ((ah * bh - p[0]) + ah * bl + al * bh) + al * bl


cdef inline void _dd_mul(double xh, double xl, double yh, double yl,
                         double *rh, double *rl) noexcept:
    cdef double ph, pl, s
    _two_prod(xh, yh, &ph, &pl)
    pl = pl + (xh * yl + xl * yh)
    s = ph + pl
    rh[0] = s
    rl[0] = pl - (s - ph)


def slaz_single(int bit, int outer, int inner, snapshots=None):
    """See _slaz_py.slaz_single."""
    cdef int M = outer, N = inner
    cdef double cm, sm, cnh, cnl, snh, snl
    cm, sm, cnh, cnl, snh, snl = _constants(M, N)

    cdef double a1 = 1.0, a2 = 0.0, a3 = 0.0
    cdef double t1, t2, hi, lo, ph, pl, s
    a4_arr = np.zeros(M)
    send_arr = np.empty(M * N)
    cdef double[::1] a4 = a4_arr
    cdef double[::1] send = send_arr
    cdef Py_ssize_t t = 0
    cdef int m, n
    for m in range(M):
        t1 = a1 * cm - a2 * sm
        t2 = a1 * sm + a2 * cm
        a1 = t1
        a2 = t2
        if bit == 0:
            for n in range(N):
                t1 = a2 * cnh - a3 * snh
                t2 = a2 * snh + a3 * cnh
                a2 = t1
                a3 = t2
                send[t] = a3
                t += 1
        else:
            hi = a2
            lo = 0.0
            for n in range(N):
                _two_prod(hi, snh, &ph, &pl)
                s = ph + (pl + (hi * snl + lo * snh))
                send[t] = s
                _dd_mul(hi, lo, cnh, cnl, &hi, &lo)
                t += 1
            a2 = hi + lo
            a3 = 0.0
        a4[m] = a3
        a3 = 0.0
        if snapshots is not None:
            snapshots.append(np.concatenate([[a1, a2, a3], a4_arr]))
    return np.concatenate([[a1, a2, a3], a4_arr]), send_arr


def slaz_pair(int outer, int inner, bint record_rounds=False):
    """See _slaz_py.slaz_pair."""
    cdef int M = outer, N = inner
    cdef double cm, sm, cnh, cnl, snh, snl
    cm, sm, cnh, cnl, snh, snl = _constants(M, N)

    cdef double x1 = 1.0, x2 = 0.0, x3 = 0.0
    cdef double y1 = 1.0, y2 = 0.0
    cdef double t1, t2, hi, lo, ph, pl, s, rest
    x4_arr = np.zeros(M)
    y4_arr = np.zeros(M)
    send0_arr = np.empty(M * N)
    send1_arr = np.empty(M * N)
    g01_arr = np.empty(M * N + 1) if record_rounds else None
    cdef double[::1] x4 = x4_arr
    cdef double[::1] y4 = y4_arr
    cdef double[::1] send0 = send0_arr
    cdef double[::1] send1 = send1_arr
    cdef double[::1] g01
    if record_rounds:
        g01 = g01_arr
        g01[0] = 1.0
    cdef Py_ssize_t t = 0
    cdef int m, n, k
    for m in range(M):
        t1 = x1 * cm - x2 * sm
        t2 = x1 * sm + x2 * cm
        x1 = t1
        x2 = t2
        t1 = y1 * cm - y2 * sm
        t2 = y1 * sm + y2 * cm
        y1 = t1
        y2 = t2
        rest = x1 * y1
        for k in range(M):
            rest = rest + x4[k] * y4[k]
        hi = y2
        lo = 0.0
        if record_rounds:
            for n in range(N):
                t1 = x2 * cnh - x3 * snh
                t2 = x2 * snh + x3 * cnh
                x2 = t1
                x3 = t2
                send0[t] = x3
                _two_prod(hi, snh, &ph, &pl)
                s = ph + (pl + (hi * snl + lo * snh))
                send1[t] = s
                _dd_mul(hi, lo, cnh, cnl, &hi, &lo)
                g01[t + 1] = rest + x2 * (hi + lo)
                t += 1
        else:
            for n in range(N):
                t1 = x2 * cnh - x3 * snh
                t2 = x2 * snh + x3 * cnh
                x2 = t1
                x3 = t2
                send0[t] = x3
                _two_prod(hi, snh, &ph, &pl)
                s = ph + (pl + (hi * snl + lo * snh))
                send1[t] = s
                _dd_mul(hi, lo, cnh, cnl, &hi, &lo)
                t += 1
        y2 = hi + lo
        x4[m] = x3
        x3 = 0.0
    a0 = np.concatenate([[x1, x2, x3], x4_arr])
    a1 = np.concatenate([[y1, y2, 0.0], y4_arr])
    return a0, a1, send0_arr, send1_arr, g01_arr
