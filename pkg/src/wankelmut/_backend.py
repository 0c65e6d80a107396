"""Backend selection: compiled episode kernels when available, pure Python
otherwise.

Set ``WANKELMUT_PURE=1`` to force the pure backend (used by the
pure-vs-compiled equivalence tests and the benchmark).  Both backends are
bitwise-equivalent, so the choice affects speed only.
"""

from __future__ import annotations

import os

try:
    from . import _speedups

    HAVE_COMPILED = True
except ImportError:
    _speedups = None
    HAVE_COMPILED = False

_env = os.environ.get("WANKELMUT_PURE", "").strip().lower()
FORCE_PURE = _env in ("1", "true", "yes", "on")

# Mutable so tests can flip it; read via compiled_enabled() at call time.
use_compiled = HAVE_COMPILED and not FORCE_PURE


def compiled_enabled() -> bool:
    return use_compiled and HAVE_COMPILED


def backend_name() -> str:
    return "compiled" if compiled_enabled() else "pure"
