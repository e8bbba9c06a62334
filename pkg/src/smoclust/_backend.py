"""Kernel backend selection.

The compiled extension is preferred when importable; set
``SMOCLUST_PURE_PYTHON=1`` to force the pure-Python fallback.  Both backends
implement the same contract and produce bit-identical results.
"""

import os

if os.environ.get("SMOCLUST_PURE_PYTHON", "0") not in ("", "0"):
    from smoclust import _pure as _impl
else:
    try:
        from smoclust import _speed as _impl  # type: ignore[attr-defined]
    except ImportError:
        from smoclust import _pure as _impl

BACKEND = _impl.BACKEND
Rng = _impl.Rng
NBState = _impl.NBState
unit_direction = _impl.unit_direction
positive_intercept = _impl.positive_intercept
skewed_sample = _impl.skewed_sample
gaussian_in_sphere = _impl.gaussian_in_sphere
