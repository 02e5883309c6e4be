"""Import-time selection between the compiled and the pure-numpy kernels.

Set ``PARAPRODUCT_KIT_BACKEND=py`` to force the numpy fallback, ``=cy`` to
require the compiled extension (raising if it is unavailable).  Both expose
the same functions and produce bit-identical floats.
"""

import os

from . import _kernels_py

_requested = os.environ.get("PARAPRODUCT_KIT_BACKEND", "auto").lower()

if _requested in ("py", "python", "numpy"):
    kernels = _kernels_py
    BACKEND = "python"
elif _requested in ("cy", "c", "compiled"):
    from . import _kernels_cy as kernels  # noqa: F401

    BACKEND = "compiled"
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"

axpy_window_1d = kernels.axpy_window_1d
axpy_window_2d = kernels.axpy_window_2d
axpy_window_3d = kernels.axpy_window_3d
add_box_1d = kernels.add_box_1d
add_box_2d = kernels.add_box_2d
add_box_3d = kernels.add_box_3d
down_batch = kernels.down_batch
up_batch = kernels.up_batch


def thread_cap():
    """Parallelism cap for experiment runners (PARAPRODUCT_KIT_THREADS)."""
    raw = os.environ.get("PARAPRODUCT_KIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
