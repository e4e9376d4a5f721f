"""Backend selection for the Newton kernel.

The compiled kernel handles chains with a quadratic-plus-cosine local
potential; everything else, or any chain when ``PEIERLS_PURE_PYTHON=1``,
goes through the pure-Python iteration.
"""

from __future__ import annotations

import os

import numpy as np

from . import _newton

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None

COMPILED_AVAILABLE = _kernels is not None
BACKEND = "compiled" if COMPILED_AVAILABLE and os.environ.get("PEIERLS_PURE_PYTHON") != "1" else "python"


def set_backend(name):
    """Select ``"compiled"`` or ``"python"``; returns the previous choice."""
    global BACKEND
    if name not in ("compiled", "python"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "compiled" and not COMPILED_AVAILABLE:
        raise RuntimeError("compiled kernel is not built")
    prev, BACKEND = BACKEND, name
    return prev


def newton_minimize(pot, v0, p, q, fixed0=False, tol=1e-10, max_iters=500, backend=None):
    """Dispatch to the compiled kernel when possible.

    Returns ``(values, action, residual_norm, iterations, converged)``.
    """
    backend = backend or BACKEND
    form = pot.fk_form() if backend == "compiled" else None
    if form is not None:
        return _kernels.fk_newton(np.asarray(v0, dtype=float), int(p), int(q),
                                  np.asarray(form.couplings, dtype=float),
                                  np.asarray(form.amplitudes, dtype=float),
                                  float(form.const), bool(fixed0), float(tol), int(max_iters))
    return _newton.newton_minimize(pot, v0, p, q, fixed0=fixed0, tol=tol, max_iters=max_iters)
