"""Batched state-vector kernels with a compiled core and a numpy fallback.

``BACKEND`` records which implementation was selected at import time:
``"cython"`` when the compiled extension built, ``"numpy"`` otherwise.
Both backends expose the same three functions with identical semantics,
so everything above this layer is backend-agnostic.
"""

from __future__ import annotations

try:
    from qaclab.kernels import _core as _impl

    BACKEND = "cython"
except ImportError:  # extension not built; the pure numpy path is exact too
    from qaclab.kernels import _numpy as _impl

    BACKEND = "numpy"

from qaclab.kernels import _numpy as numpy_backend

apply_1q = _impl.apply_1q
apply_phase = _impl.apply_phase
pair_contract = _impl.pair_contract

__all__ = ["BACKEND", "apply_1q", "apply_phase", "pair_contract", "numpy_backend"]
