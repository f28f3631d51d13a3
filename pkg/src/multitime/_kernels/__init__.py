"""Kernel backend selection.

The hierarchical protocol's inner loop dominates runtime (up to ~5e5
iterations per run pair), so it is implemented twice: a compiled Cython
extension and a pure-Python fallback with identical semantics.  The
compiled backend is used when importable; set ``MULTITIME_KERNEL`` to
``python`` or ``cython`` to force one (``cython`` raises if the extension
is missing).  ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

from . import _slaz_py

_cy = None
_requested = os.environ.get("MULTITIME_KERNEL", "auto").strip().lower()
if _requested not in ("python", "py", "pure"):
    try:
        from . import _slaz_cy as _cy
    except ImportError:
        _cy = None

if _requested in ("python", "py", "pure"):
    _impl = _slaz_py
elif _requested in ("cython", "cy", "compiled"):
    if _cy is None:
        raise ImportError(
            "MULTITIME_KERNEL=cython but the compiled extension is not available; "
            "reinstall with a C toolchain or unset the variable"
        )
    _impl = _cy
elif _requested == "auto":
    _impl = _cy if _cy is not None else _slaz_py
else:
    raise ImportError(f"unrecognized MULTITIME_KERNEL value {_requested!r}")

BACKEND = "cython" if _impl is _cy else "python"
HAVE_CYTHON = _cy is not None

slaz_single = _impl.slaz_single
slaz_pair = _impl.slaz_pair
