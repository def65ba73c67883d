"""Hot-loop kernels with a compiled core and a NumPy fallback.

Two entry points are exposed:

- ``sos_stream(sos, x, zi)``: cascaded-biquad streaming filter, state
  carried across calls (direct form II transposed, matching scipy).
- ``scan_frames(buf, in_resync)``: wire-frame scanner with resync.

The compiled extension is preferred when it was built; set
``SEMGKIT_BACKEND=py`` to force the fallback or ``SEMGKIT_BACKEND=c`` to
require the extension.
"""

import os

from semgkit._kernels import _fallback

_requested = os.environ.get("SEMGKIT_BACKEND", "").strip().lower()

if _requested in ("py", "python"):
    _impl = _fallback
else:
    try:
        from semgkit._kernels import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "c":
            raise
        _impl = _fallback

BACKEND = "c" if _impl is not _fallback else "python"

sos_stream = _impl.sos_stream
scan_frames = _impl.scan_frames

__all__ = ["BACKEND", "sos_stream", "scan_frames"]
