"""Propagation kernel backends.

The compiled core is preferred when present; the numpy reference implementation
is the fallback.  `CAVITAS_KERNELS=pure` forces the fallback (used by the
benchmark and for debugging).  Both backends expose the same API and consume no
randomness, so seeded runs are reproducible within a backend.
"""

from __future__ import annotations

import os

from . import _pure

COMPILED = False
_impl = _pure
if os.environ.get("CAVITAS_KERNELS", "").lower() != "pure":
    try:
        from . import _core  # type: ignore[attr-defined]

        _impl = _core
        COMPILED = True
    except ImportError:
        pass


def backend_name() -> str:
    return "compiled" if COMPILED else "pure"


StepEngine = _impl.StepEngine
apply_h = _impl.apply_h
