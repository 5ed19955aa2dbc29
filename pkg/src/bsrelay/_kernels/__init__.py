"""Kernel backend selection.

Two interchangeable implementations of the numerical hot kernels exist: a
Cython extension (``_fastkern``) and a pure-numpy fallback (``reference``).
The compiled one is preferred when importable. Override with the environment
variable ``BSRELAY_KERNELS=compiled`` (fail if missing) or
``BSRELAY_KERNELS=reference``.
"""

from __future__ import annotations

import os

from . import reference

_KERNEL_NAMES = ("log_bessel_i", "reg_gamma_lower", "marcum_q",
                 "marcum_q_diff", "frame_powers")


def _load_compiled():
    from . import _fastkern
    return _fastkern


def get_backend(name: str):
    """Return the backend module for ``name`` in {'compiled', 'reference'}."""
    if name == "reference":
        return reference
    if name == "compiled":
        return _load_compiled()
    raise ValueError(f"unknown kernel backend {name!r}")


_requested = os.environ.get("BSRELAY_KERNELS", "").strip().lower()
if _requested == "reference":
    _active = reference
elif _requested == "compiled":
    _active = _load_compiled()
elif _requested == "":
    try:
        _active = _load_compiled()
    except ImportError:
        _active = reference
else:
    raise ImportError(f"BSRELAY_KERNELS={_requested!r} is not a known backend")

ACTIVE_BACKEND = _active.BACKEND_NAME

log_bessel_i = _active.log_bessel_i
reg_gamma_lower = _active.reg_gamma_lower
marcum_q = _active.marcum_q
marcum_q_diff = _active.marcum_q_diff
frame_powers = _active.frame_powers
