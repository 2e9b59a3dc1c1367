"""Backend selection for the hot assembly kernel.

The compiled Cython extension is used when it was built; otherwise the numpy
fallback is loaded.  Set ``CURVEFLOW_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
assemble_triplets = _kernels_py.assemble_triplets

if os.environ.get("CURVEFLOW_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        assemble_triplets = _kernels.assemble_triplets


def backends():
    """Map of every importable backend name to its ``assemble_triplets``."""
    found = {"python": _kernels_py.assemble_triplets}
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        found["cython"] = _kernels.assemble_triplets
    return found
