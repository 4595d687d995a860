"""Kernel backend selection: compiled extension if built, numpy otherwise.

Set SMPI_FORCE_PYTHON=1 to force the numpy fallback (used by the tests and
the benchmark to compare both backends).
"""

import os

if os.environ.get("SMPI_FORCE_PYTHON"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

composite_layers = _impl.composite_layers
warp_bilinear = _impl.warp_bilinear

_threads = os.environ.get("SMPI_THREADS")
if _threads and BACKEND == "cython":
    _impl.set_num_threads(int(_threads))
