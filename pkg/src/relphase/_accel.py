"""Backend selection for the hot multi-time kernels.

The compiled extension is used when it imports; otherwise the numpy twin.
Set ``RELPHASE_PURE=1`` to force the numpy path.
"""

from __future__ import annotations

import os

from . import _wfill_py

BACKEND = "python"
fill_w = _wfill_py.fill_w
right_chains = _wfill_py.right_chains

if os.environ.get("RELPHASE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _wfill as _compiled
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        fill_w = _compiled.fill_w
        right_chains = _compiled.right_chains
