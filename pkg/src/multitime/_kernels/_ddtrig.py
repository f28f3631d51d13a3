"""Double-double helpers for the depletion chain in the hierarchical kernels.

A rotation pair (cos t, sin t) rounded to doubles has an intrinsic norm
defect c^2 + s^2 - 1 of order 1e-16.  Applied ~1e5 times to a unit-weight
amplitude, that defect drifts the state norm to ~1e-11, past the 1e-12
budget.  The fix is to carry the constants (and the one long product
chain that uses them) in double-double precision: the hi parts still match
the ordinary libm values, while the exact c^2 + s^2 defect drops to ~1e-32.

Everything here is branch-free elementary float arithmetic so the Cython
kernel (compiled with -ffp-contract=off) reproduces it bit for bit.
"""

from __future__ import annotations

import math

_SPLIT = 134217729.0  # 2**27 + 1, Dekker's splitter


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    t = s - a
    return s, (a - (s - t)) + (b - t)


def quick_two_sum(a: float, b: float) -> tuple[float, float]:
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


def two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    aa = a * _SPLIT
    ah = aa - (aa - a)
    al = a - ah
    bb = b * _SPLIT
    bh = bb - (bb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(xh: float, xl: float, yh: float, yl: float) -> tuple[float, float]:
    sh, se = two_sum(xh, yh)
    tl, te = two_sum(xl, yl)
    se += tl
    sh, se = quick_two_sum(sh, se)
    se += te
    return quick_two_sum(sh, se)


def dd_mul(xh: float, xl: float, yh: float, yl: float) -> tuple[float, float]:
    ph, pl = two_prod(xh, yh)
    pl += xh * yl + xl * yh
    return quick_two_sum(ph, pl)


def dd_div_int(xh: float, xl: float, d: int) -> tuple[float, float]:
    qh = xh / d
    ph, pl = two_prod(qh, float(d))
    ql = (((xh - ph) - pl) + xl) / d
    return quick_two_sum(qh, ql)


def dd_cos_sin(x: float) -> tuple[float, float, float, float]:
    """(cos_hi, cos_lo, sin_hi, sin_lo) of a double x, |x| <= pi/2.

    Plain Taylor series evaluated in double-double; accurate to ~1e-32,
    which a test pins against an independent high-precision oracle.
    """
    if not 0.0 <= x <= math.pi / 2 + 1e-9:
        raise ValueError(f"dd_cos_sin expects 0 <= x <= pi/2, got {x}")
    ch, cl = 1.0, 0.0
    sh, sl = x, 0.0
    x2h, x2l = dd_mul(x, 0.0, x, 0.0)
    tch, tcl = 1.0, 0.0
    tsh, tsl = x, 0.0
    for k in range(1, 40):
        tch, tcl = dd_mul(tch, tcl, x2h, x2l)
        tch, tcl = dd_div_int(tch, tcl, -((2 * k - 1) * (2 * k)))
        ch, cl = dd_add(ch, cl, tch, tcl)
        tsh, tsl = dd_mul(tsh, tsl, x2h, x2l)
        tsh, tsl = dd_div_int(tsh, tsl, -((2 * k) * (2 * k + 1)))
        sh, sl = dd_add(sh, sl, tsh, tsl)
        if abs(tch) < 1e-40 and abs(tsh) < 1e-40:
            break
    return ch, cl, sh, sl
