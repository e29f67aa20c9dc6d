"""Hot numeric kernels for the recursive autoencoder.

At import time the compiled extension (``_speedups``, Cython) is
preferred; the pure-numpy twin (``_ref``) is used when the extension is
unavailable or when ``INGREPAIR_PURE_PYTHON=1`` is set. Both expose the
same functions and are cross-checked in the test suite;
``benchmarks/bench_kernels.py`` compares their throughput.
"""

from __future__ import annotations

import os

from . import _ref
from ._ref import pairwise_sq_dists

if os.environ.get("INGREPAIR_PURE_PYTHON"):
    _impl = _ref
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _ref

BACKEND = _impl.BACKEND_NAME

greedy_encode = _impl.greedy_encode
structure_errors = _impl.structure_errors
structure_grad = _impl.structure_grad


def available_backends() -> dict[str, object]:
    """Importable backends by name (always includes ``python``)."""
    backends = {"python": _ref}
    try:
        from . import _speedups

        backends["cython"] = _speedups
    except ImportError:
        pass
    return backends


__all__ = [
    "BACKEND",
    "available_backends",
    "greedy_encode",
    "pairwise_sq_dists",
    "structure_errors",
    "structure_grad",
]
