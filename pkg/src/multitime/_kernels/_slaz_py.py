"""Pure-Python kernels for the hierarchical (outer x inner round) protocol.

This is the reference backend: ``_slaz_cy`` mirrors it operation for
operation, so both produce bit-identical floats.  All amplitudes in these
runs are real, so the kernels work on float64 and the wrapper lifts the
results into complex state vectors.

Per inner round, written out against the primitive operations:
rotate (a2, a3) by pi/(2N); swap a3 into the empty channel; Bob either
reflects (bit 0: no-op) or absorbs the channel into a fresh B slot
(bit 1); record the return transit; swap the channel back into a3.  The
swap pairs cancel algebraically, which is why the loop body only touches
a2/a3 and the transit records.

The bit-1 branch multiplies a2 by cos(pi/(2N)) up to M*N times in a row;
that chain runs in double-double (see _ddtrig) to keep the final norm
within the 1e-12 budget.
"""

from __future__ import annotations

import math

import numpy as np

from ._ddtrig import dd_cos_sin, dd_mul, two_prod


def _constants(outer: int, inner: int):
    th_m = math.pi / (2.0 * outer)
    th_n = math.pi / (2.0 * inner)
    cm, sm = math.cos(th_m), math.sin(th_m)
    cnh, cnl, snh, snl = dd_cos_sin(th_n)
    return cm, sm, cnh, cnl, snh, snl


def slaz_single(bit: int, outer: int, inner: int, snapshots: list | None = None):
    """One run.  Returns (a, send) with a = [a1, a2, a3, a4_1..a4_M] float64.

    Return-transit amplitudes are not materialized: for bit 0 they equal
    ``send``, for bit 1 they are all zero.  With ``snapshots`` a list, a
    copy of ``a`` is appended at the end of every outer round.
    """
    M, N = outer, inner
    cm, sm, cnh, cnl, snh, snl = _constants(M, N)
    a1, a2, a3 = 1.0, 0.0, 0.0
    a4 = np.zeros(M)
    send = np.empty(M * N)
    t = 0
    for m in range(M):
        a1, a2 = a1 * cm - a2 * sm, a1 * sm + a2 * cm
        if bit == 0:
            for _ in range(N):
                a2, a3 = a2 * cnh - a3 * snh, a2 * snh + a3 * cnh
                send[t] = a3
                t += 1
        else:
            hi, lo = a2, 0.0
            for _ in range(N):
                ph, pl = two_prod(hi, snh)
                s = ph + (pl + (hi * snl + lo * snh))
                send[t] = s
                hi, lo = dd_mul(hi, lo, cnh, cnl)
                t += 1
            a2, a3 = hi + lo, 0.0
        a4[m] = a3
        a3 = 0.0
        if snapshots is not None:
            snapshots.append(np.concatenate([[a1, a2, a3], a4]))
    return np.concatenate([[a1, a2, a3], a4]), send


def slaz_pair(outer: int, inner: int, record_rounds: bool = False):
    """Both runs in lockstep (identical Alice operations by construction).

    Returns (a0, a1, send0, send1, g01) where g01, when requested, holds
    the Alice-side Gram overlap at every inner-round boundary (length
    M*N + 1, starting from the initial value 1).
    """
    M, N = outer, inner
    cm, sm, cnh, cnl, snh, snl = _constants(M, N)
    x1, x2, x3 = 1.0, 0.0, 0.0
    y1, y2 = 1.0, 0.0
    x4 = np.zeros(M)
    y4 = np.zeros(M)
    send0 = np.empty(M * N)
    send1 = np.empty(M * N)
    g01 = np.empty(M * N + 1) if record_rounds else None
    if record_rounds:
        g01[0] = 1.0
    t = 0
    for m in range(M):
        x1, x2 = x1 * cm - x2 * sm, x1 * sm + x2 * cm
        y1, y2 = y1 * cm - y2 * sm, y1 * sm + y2 * cm
        rest = x1 * y1
        for k in range(M):
            rest += x4[k] * y4[k]
        hi, lo = y2, 0.0
        if record_rounds:
            for _ in range(N):
                x2, x3 = x2 * cnh - x3 * snh, x2 * snh + x3 * cnh
                send0[t] = x3
                ph, pl = two_prod(hi, snh)
                s = ph + (pl + (hi * snl + lo * snh))
                send1[t] = s
                hi, lo = dd_mul(hi, lo, cnh, cnl)
                g01[t + 1] = rest + x2 * (hi + lo)
                t += 1
        else:
            for _ in range(N):
                x2, x3 = x2 * cnh - x3 * snh, x2 * snh + x3 * cnh
                send0[t] = x3
                ph, pl = two_prod(hi, snh)
                s = ph + (pl + (hi * snl + lo * snh))
                send1[t] = s
                hi, lo = dd_mul(hi, lo, cnh, cnl)
                t += 1
        y2 = hi + lo
        x4[m] = x3
        x3 = 0.0
        # bit-1 a3 is zero after every absorption, so its a4 slot stays 0
    a0 = np.concatenate([[x1, x2, x3], x4])
    a1 = np.concatenate([[y1, y2, 0.0], y4])
    return a0, a1, send0, send1, g01
