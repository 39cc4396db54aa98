"""Backend selection for the replay kernel.

The compiled extension is used when it imports; set STOCHGREEDY_PURE=1 to
force the pure-Python version.
"""

import os

from . import _pykernels

replay_python = _pykernels.replay

try:
    from ._ckernels import replay as replay_compiled
except ImportError:  # extension not built
    replay_compiled = None

if replay_compiled is not None and os.environ.get("STOCHGREEDY_PURE", "") not in ("1", "true"):
    replay = replay_compiled
    BACKEND = "cython"
else:
    replay = replay_python
    BACKEND = "python"
