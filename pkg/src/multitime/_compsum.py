"""Compensated summation helpers.

Cost and Gram accumulations can cross ~1e6 terms, and the suite asserts
identities at 1e-10 and tighter, so sums go through ``math.fsum`` (exactly
rounded) instead of naive accumulation.
"""

from __future__ import annotations

import math

import numpy as np


def fsum(values) -> float:
    if isinstance(values, np.ndarray):
        values = values.tolist()
    return math.fsum(values)


def abs2_sum(amps: np.ndarray) -> float:
    """Sum of |a|^2 over a complex (or real) array, exactly rounded."""
    a = np.asarray(amps)
    if np.iscomplexobj(a):
        parts = np.concatenate([np.square(a.real.ravel()), np.square(a.imag.ravel())])
    else:
        parts = np.square(a.ravel())
    return math.fsum(parts.tolist())


def compensated_complex_sum(values: np.ndarray) -> complex:
    """Exactly rounded sum of a complex array (real and imag separately)."""
    v = np.asarray(values, dtype=np.complex128).ravel()
    return complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist()))
