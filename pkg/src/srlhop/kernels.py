"""Hot kernels, backed by the compiled extension when it is importable.

Set ``SRLHOP_PURE_PYTHON=1`` to force the pure-Python fallback.
"""

import os

from . import _pykernels as python_impl

compiled_impl = None
if not os.environ.get("SRLHOP_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_impl
    except ImportError:  # extension not built
        compiled_impl = None

_impl = compiled_impl if compiled_impl is not None else python_impl

BACKEND = "compiled" if _impl is compiled_impl else "python"

window_containment = _impl.window_containment
window_counts = _impl.window_counts
decode_span = _impl.decode_span
