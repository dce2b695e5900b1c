"""Select the kernel implementation at import.

The compiled core is used when it was built; set ``CTSB_BACKEND=python`` to
force the numpy fallback.
"""
import os

from . import _kernels_py

python_kernels = _kernels_py

try:
    from . import _ext as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if os.environ.get("CTSB_BACKEND", "").lower() == "python" or compiled_kernels is None:
    kernels = _kernels_py
else:
    kernels = compiled_kernels

BACKEND = kernels.NAME
