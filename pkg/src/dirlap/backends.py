"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the NumPy
implementation is used.  Set DIRLAP_KERNELS=python or =compiled to force a
choice (forcing "compiled" raises if the extension is missing).
"""

import os

from . import _kernels_py

_requested = os.environ.get("DIRLAP_KERNELS", "auto").lower()

if _requested not in ("auto", "python", "compiled"):
    raise ImportError(
        f"DIRLAP_KERNELS must be 'auto', 'python' or 'compiled', got {_requested!r}"
    )

if _requested == "python":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "DIRLAP_KERNELS=compiled but the dirlap._kernels_cy extension "
                "is not built; reinstall with a C compiler available"
            ) from None
        kernels = _kernels_py
        BACKEND = "python"


def backend_name():
    """Name of the kernel backend active in this process."""
    return BACKEND
