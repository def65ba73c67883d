"""Pure NumPy/SciPy implementations of the streaming kernels.

Semantics must match semgkit._kernels._core exactly; the test suite runs
both backends against each other.
"""

import numpy as np
from scipy import signal as sig

_SYNC = 0xA0
_TRAILER = 0xC0
_FRAME_LEN = 16
# bulk-validation window: large enough to amortize the NumPy call overhead,
# small enough that a corruption does not trigger a rescan of the whole tail
_BLOCK = 256


def sos_stream(sos, x, zi):
    """Filter one chunk through a biquad cascade, updating zi in place.

    sos is an (n_sections, 6) float64 array with a0 normalized to 1;
    zi is the (n_sections, 2) running state.
    """
    y, zf = sig.sosfilt(sos, x, zi=zi)
    zi[...] = zf
    return y


def scan_frames(buf: bytes, in_resync: bool):
    """Scan a byte buffer for valid 16-byte frames.

    Returns (counts int32 (n, 4), seqs uint8 (n,), consumed, ok, corrupt,
    resyncs, in_resync). Validation failures advance the scan by one byte;
    a resync event spans a maximal run of rejected bytes. The bulk path
    vectorizes over contiguous runs of valid frames.
    """
    mv = np.frombuffer(buf, dtype=np.uint8)
    n = mv.size
    pos = 0
    ok = corrupt = resyncs = 0
    count_parts: list[np.ndarray] = []
    seq_parts: list[np.ndarray] = []

    while pos + _FRAME_LEN <= n:
        if mv[pos] != _SYNC:
            if not in_resync:
                resyncs += 1
                in_resync = True
            nxt = buf.find(_SYNC, pos + 1)
            pos = nxt if nxt != -1 else n
            continue
        m = min((n - pos) // _FRAME_LEN, _BLOCK)
        arr = mv[pos:pos + m * _FRAME_LEN].reshape(m, _FRAME_LEN)
        good = ((arr[:, 0] == _SYNC)
                & (arr[:, 15] == _TRAILER)
                & (np.bitwise_xor.reduce(arr[:, :14], axis=1) == arr[:, 14]))
        k = m if good.all() else int(np.argmin(good))
        if k > 0:
            blk = arr[:k]
            seq_parts.append(blk[:, 1].copy())
            raw = blk[:, 2:14].reshape(k, 4, 3).astype(np.int32)
            v = (raw[:, :, 0] << 16) | (raw[:, :, 1] << 8) | raw[:, :, 2]
            v -= (v & 0x800000) << 1
            count_parts.append(v)
            ok += k
            pos += _FRAME_LEN * k
            in_resync = False
            continue
        corrupt += 1
        if not in_resync:
            resyncs += 1
            in_resync = True
        pos += 1

    if count_parts:
        counts = np.concatenate(count_parts, axis=0)
        seqs = np.concatenate(seq_parts)
    else:
        counts = np.empty((0, 4), dtype=np.int32)
        seqs = np.empty(0, dtype=np.uint8)
    return counts, seqs, pos, ok, corrupt, resyncs, bool(in_resync)
