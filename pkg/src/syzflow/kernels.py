"""Kernel backend selection: compiled extension with pure-Python fallback.

The compiled module ``syzflow._core`` provides the hot inner loops (monomial
field evaluation and the projected trajectory integrator).  When it is
missing, or ``SYZFLOW_FORCE_PYTHON`` is set, the pure-Python equivalents in
``syzflow._corepy`` are used instead.  Both expose the same API and tests
assert they agree.
"""
from __future__ import annotations

import os

from . import _corepy

if os.environ.get("SYZFLOW_FORCE_PYTHON"):
    _backend = _corepy
    HAVE_COMPILED = False
else:
    try:
        from . import _core as _backend  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        _backend = _corepy
        HAVE_COMPILED = False

BACKEND = "compiled" if HAVE_COMPILED else "python"

monomial_s_ds = _backend.monomial_s_ds
monomial_V_flat = _backend.monomial_V_flat
integrate_monomial_flat = _backend.integrate_monomial_flat

python_backend = _corepy
