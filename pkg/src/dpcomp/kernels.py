"""Kernel backend selection: compiled extension with NumPy fallback.

The compiled kernel and the fallback produce bit-identical doubles (verified
by the parity test), so which backend runs is purely a speed concern.
"""

from __future__ import annotations

from . import _kernel_py

try:  # pragma: no cover - exercised only when the extension is built
    from . import _dpkernel

    _IMPL = _dpkernel
except ImportError:  # pragma: no cover
    _IMPL = _kernel_py

BACKEND: str = _IMPL.BACKEND

knapsack_pair = _IMPL.knapsack_pair
knapsack_single = _IMPL.knapsack_single


def backend() -> str:
    """Name of the active kernel backend ("cython" or "numpy")."""
    return BACKEND


def available_backends() -> dict:
    """All importable kernel implementations, keyed by name."""
    impls = {_kernel_py.BACKEND: _kernel_py}
    if _IMPL is not _kernel_py:
        impls[_IMPL.BACKEND] = _IMPL
    return impls
