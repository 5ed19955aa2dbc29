"""Backscatter-relay link performance laboratory."""

from ._kernels import ACTIVE_BACKEND as kernel_backend

__version__ = "0.1.0"
__all__ = ["kernel_backend", "__version__"]
