"""Kernel selection.

The compiled extension ``_ckernels`` is used when it was built; setting
``GALSCAFFOLD_PURE=1`` forces the numpy fallback.
"""

from __future__ import annotations

import logging
import os

from . import _kernels_py

logger = logging.getLogger(__name__)

BACKEND = "python"
conv_pairs = _kernels_py.conv_pairs

if os.environ.get("GALSCAFFOLD_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # pragma: no cover - depends on the build
        logger.debug("compiled kernels unavailable, using numpy fallback")
    else:
        conv_pairs = _ckernels.conv_pairs
        BACKEND = "cython"
