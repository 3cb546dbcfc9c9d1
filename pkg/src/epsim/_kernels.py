"""Kernel lane selection.

The package ships two interchangeable implementations of its hot loops:
a jitted lane (``_kernels_numba``) and a pure-numpy lane (``_kernels_numpy``).
Setting the environment variable ``EPSIM_DISABLE_NUMBA`` to a truthy value
(or ``EPSIM_BACKEND=numpy``) forces the numpy lane; otherwise the numba lane
is used when numba imports cleanly.

``benchmarks/bench_kernels.py`` compares the two lanes on representative
workloads; ``tests/test_kernels.py`` pins their numerical agreement.
"""

from __future__ import annotations

import os


def _pick():
    forced = os.environ.get("EPSIM_BACKEND", "").strip().lower()
    disabled = os.environ.get("EPSIM_DISABLE_NUMBA", "").strip().lower()
    want_numba = True
    if forced == "numpy" or disabled in ("1", "true", "yes", "on"):
        want_numba = False
    if forced == "numba":
        want_numba = True
    if want_numba:
        try:
            from . import _kernels_numba as impl
            return impl
        except ImportError:
            pass
    from . import _kernels_numpy as impl
    return impl


_impl = _pick()

BACKEND = _impl.NAME
bessel_j012_array = _impl.bessel_j012_array
sommerfeld_integrand = _impl.sommerfeld_integrand
volterra_propagate = _impl.volterra_propagate
rk4_lindblad_propagate = _impl.rk4_lindblad_propagate
