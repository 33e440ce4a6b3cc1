"""Hot-loop kernels: compiled extension when available, numpy fallback otherwise.

Set MBOT_KERNELS=python to force the pure-Python implementation.
"""

import os

from . import _fallback

if os.environ.get("MBOT_KERNELS", "").lower() == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

raycast = _impl.raycast
raycast_bearings = _impl.raycast_bearings
score_particles = _impl.score_particles
update_map_cells = _impl.update_map_cells
