"""The two kernel backends must be interchangeable."""

import numpy as np
import pytest
from scipy import signal as sig

from semgkit._kernels import _fallback

try:
    from semgkit._kernels import _core
except ImportError:
    _core = None

BACKENDS = [("python", _fallback)] + ([("c", _core)] if _core else [])


@pytest.fixture(params=BACKENDS, ids=[name for name, _ in BACKENDS])
def backend(request):
    return request.param[1]


def bandpass_sos():
    return np.ascontiguousarray(
        sig.butter(4, [15 / 125, 120 / 125], btype="bandpass", output="sos"))


def test_sos_stream_matches_scipy(backend):
    rng = np.random.default_rng(1)
    x = rng.standard_normal(4096)
    sos = bandpass_sos()
    zi = np.zeros((sos.shape[0], 2))
    y = backend.sos_stream(sos, x, zi)
    expected = sig.sosfilt(sos, x)
    assert np.allclose(y, expected, rtol=1e-12, atol=1e-15)


def test_sos_stream_state_carries_across_chunks(backend):
    rng = np.random.default_rng(2)
    x = rng.standard_normal(5000)
    sos = bandpass_sos()
    zi = np.zeros((sos.shape[0], 2))
    chunks = [backend.sos_stream(sos, np.ascontiguousarray(c), zi)
              for c in np.split(x, [7, 130, 131, 2000])]
    assert np.allclose(np.concatenate(chunks), sig.sosfilt(sos, x),
                       rtol=1e-12, atol=1e-15)


@pytest.mark.skipif(_core is None, reason="compiled kernels not built")
def test_backends_bit_identical_filtering():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(2048)
    sos = bandpass_sos()
    zi_a = np.zeros((sos.shape[0], 2))
    zi_b = np.zeros((sos.shape[0], 2))
    ya = _fallback.sos_stream(sos, x, zi_a)
    yb = _core.sos_stream(sos, x, zi_b)
    assert np.array_equal(ya, yb)
    assert np.array_equal(zi_a, zi_b)


def dirty_stream(seed):
    from semgkit.ingest import encode_frames
    rng = np.random.default_rng(seed)
    n = 40
    counts = rng.integers(-(1 << 23), (1 << 23), size=(n, 4))
    data = bytearray(encode_frames(np.arange(n) % 256, counts))
    # flip some bytes and splice garbage
    for pos in rng.integers(0, len(data), size=5):
        data[pos] ^= 0x55
    insert_at = int(rng.integers(0, len(data)))
    return bytes(data[:insert_at]) + bytes(rng.integers(0, 256, 6, dtype=np.uint8)) \
        + bytes(data[insert_at:])


@pytest.mark.skipif(_core is None, reason="compiled kernels not built")
@pytest.mark.parametrize("seed", range(10))
def test_backends_agree_on_dirty_streams(seed):
    buf = dirty_stream(seed)
    res_py = _fallback.scan_frames(buf, False)
    res_c = _core.scan_frames(buf, False)
    assert np.array_equal(res_py[0], res_c[0])
    assert np.array_equal(res_py[1], res_c[1])
    assert res_py[2:] == res_c[2:]


def test_scan_reports_consumed_tail(backend):
    from semgkit.ingest import encode_frame
    data = encode_frame(0, (1, 2, 3, 4)) + b"\xa0\x01"  # partial candidate
    counts, seqs, consumed, ok, corrupt, resyncs, in_resync = \
        backend.scan_frames(data, False)
    assert ok == 1 and consumed == 16
    assert counts.shape == (1, 4)
