"""Backend selection for the Monte Carlo sampler.

The compiled extension is used when importable; setting ``QM_PURE_PYTHON=1``
forces the numpy implementation.
"""

import os

from . import _kernels_py

if os.environ.get("QM_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"
else:
    _impl = _kernels_py
    BACKEND = "python"

sample_local = _impl.sample_local
uniforms = _impl.uniforms
