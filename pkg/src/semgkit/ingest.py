"""Amplifier wire-frame codec, stream resynchronization, recording files.

Wire frame, 16 bytes:

    offset 0   sync byte 0xA0
    offset 1   sequence counter, wraps mod 256
    offset 2   4 channels x 24-bit two's-complement counts, MSB first
    offset 14  checksum: XOR of bytes 0..13
    offset 15  trailer byte 0xC0

Recording container: magic ``SEMGREC1``, 4-byte little-endian header
length, UTF-8 JSON header, channel-major float32 LE sample payload, then
one label byte per sample.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from semgkit import _kernels
from semgkit.protocol import GestureLabel, ProtocolSpec

SYNC = 0xA0
TRAILER = 0xC0
FRAME_LEN = 16
COUNT_MIN = -(1 << 23)
COUNT_MAX = (1 << 23) - 1

MAGIC = b"SEMGREC1"


class FrameError(ValueError):
    """A 16-byte candidate failed frame validation."""


class BadSync(FrameError):
    pass


class BadChecksum(FrameError):
    pass


class BadTrailer(FrameError):
    pass


class RecordingFormatError(ValueError):
    """Recording file is not readable as claimed."""


class UnsupportedVersion(RecordingFormatError):
    pass


class TruncatedFile(RecordingFormatError):
    pass


class LengthMismatch(RecordingFormatError):
    pass


@dataclass(frozen=True)
class SampleFrame:
    """One decoded wire frame: sequence number and four channel counts."""

    seq: int
    counts: tuple[int, int, int, int]


@dataclass(frozen=True)
class ConversionSpec:
    """Counts-to-volts scaling of the acquisition chain."""

    vref: float = 4.5
    gain: float = 24.0

    def __post_init__(self):
        if self.vref <= 0:
            raise ValueError("vref must be > 0")
        if self.gain <= 0:
            raise ValueError("gain must be > 0")

    def to_dict(self) -> dict:
        return {"vref": self.vref, "gain": self.gain}

    @classmethod
    def from_dict(cls, d: dict) -> "ConversionSpec":
        return cls(vref=float(d["vref"]), gain=float(d["gain"]))


@dataclass
class StreamStats:
    frames_ok: int = 0
    frames_corrupt: int = 0
    frames_dropped: int = 0
    resyncs: int = 0

    def to_dict(self) -> dict:
        return {"frames_ok": self.frames_ok, "frames_corrupt": self.frames_corrupt,
                "frames_dropped": self.frames_dropped, "resyncs": self.resyncs}

    @classmethod
    def from_dict(cls, d: dict) -> "StreamStats":
        return cls(**{k: int(v) for k, v in d.items()})


def encode_frame(seq: int, counts) -> bytes:
    """Encode one frame. counts must be four 24-bit signed integers."""
    if not 0 <= seq <= 255:
        raise ValueError(f"seq must be in [0, 255], got {seq}")
    counts = tuple(int(c) for c in counts)
    if len(counts) != 4:
        raise ValueError("exactly 4 channel counts per frame")
    for c in counts:
        if not COUNT_MIN <= c <= COUNT_MAX:
            raise ValueError(f"count {c} outside 24-bit signed range")
    buf = bytearray(FRAME_LEN)
    buf[0] = SYNC
    buf[1] = seq
    for i, c in enumerate(counts):
        u = c & 0xFFFFFF
        buf[2 + 3 * i] = (u >> 16) & 0xFF
        buf[3 + 3 * i] = (u >> 8) & 0xFF
        buf[4 + 3 * i] = u & 0xFF
    x = 0
    for b in buf[:14]:
        x ^= b
    buf[14] = x
    buf[15] = TRAILER
    return bytes(buf)


def decode_frame(data: bytes) -> SampleFrame:
    """Decode one 16-byte frame or raise exactly one typed FrameError.

    Check order: sync, checksum, trailer.
    """
    if len(data) != FRAME_LEN:
        raise ValueError(f"frame must be exactly {FRAME_LEN} bytes, got {len(data)}")
    if data[0] != SYNC:
        raise BadSync(f"sync byte 0x{data[0]:02X}, expected 0x{SYNC:02X}")
    x = 0
    for b in data[:14]:
        x ^= b
    if x != data[14]:
        raise BadChecksum(f"checksum 0x{data[14]:02X}, computed 0x{x:02X}")
    if data[15] != TRAILER:
        raise BadTrailer(f"trailer byte 0x{data[15]:02X}, expected 0x{TRAILER:02X}")
    counts = []
    for i in range(4):
        v = (data[2 + 3 * i] << 16) | (data[3 + 3 * i] << 8) | data[4 + 3 * i]
        if v & 0x800000:
            v -= 1 << 24
        counts.append(v)
    return SampleFrame(seq=data[1], counts=tuple(counts))


def encode_frames(seqs, counts) -> bytes:
    """Vectorized bulk encoder: counts is an (n, 4) int array."""
    counts = np.asarray(counts, dtype=np.int64)
    seqs = np.asarray(seqs, dtype=np.int64)
    if counts.ndim != 2 or counts.shape[1] != 4 or len(seqs) != len(counts):
        raise ValueError("counts must be (n, 4) with one seq per frame")
    if counts.min(initial=0) < COUNT_MIN or counts.max(initial=0) > COUNT_MAX:
        raise ValueError("counts outside 24-bit signed range")
    n = len(counts)
    arr = np.empty((n, FRAME_LEN), dtype=np.uint8)
    arr[:, 0] = SYNC
    arr[:, 1] = seqs & 0xFF
    u = counts & 0xFFFFFF
    arr[:, 2:14:3] = (u >> 16) & 0xFF
    arr[:, 3:14:3] = (u >> 8) & 0xFF
    arr[:, 4:14:3] = u & 0xFF
    arr[:, 14] = np.bitwise_xor.reduce(arr[:, :14], axis=1)
    arr[:, 15] = TRAILER
    return arr.tobytes()


def counts_to_volts(counts, spec: ConversionSpec):
    """Linear delta-sigma scaling: v = counts * vref / (gain * (2^23 - 1))."""
    scale = spec.vref / (spec.gain * COUNT_MAX)
    return np.asarray(counts, dtype=np.float64) * scale


def volts_to_counts(volts, spec: ConversionSpec):
    """Inverse scaling with rounding and saturation to the 24-bit range."""
    scale = spec.gain * COUNT_MAX / spec.vref
    c = np.rint(np.asarray(volts, dtype=np.float64) * scale)
    return np.clip(c, COUNT_MIN, COUNT_MAX).astype(np.int32)


class StreamDecoder:
    """Incremental frame scanner over an arbitrarily chunked byte stream.

    Feed chunks of any size; valid frames come back as count/seq arrays.
    Corruption never raises: bad candidates are skipped byte by byte and
    accounted in stats, dropped frames are inferred from sequence gaps.
    """

    def __init__(self):
        self._pending = b""
        self._in_resync = False
        self._last_seq: int | None = None
        self.stats = StreamStats()

    def feed(self, chunk: bytes) -> tuple[np.ndarray, np.ndarray]:
        """Consume a chunk; returns (counts (n, 4) int32, seqs (n,) uint8)."""
        buf = self._pending + bytes(chunk)
        counts, seqs, consumed, ok, corrupt, resyncs, in_resync = \
            _kernels.scan_frames(buf, self._in_resync)
        self._pending = buf[consumed:]
        self._in_resync = in_resync
        self.stats.frames_ok += int(ok)
        self.stats.frames_corrupt += int(corrupt)
        self.stats.resyncs += int(resyncs)
        if len(seqs):
            s = seqs.astype(np.int64)
            prev = np.empty_like(s)
            prev[1:] = s[:-1]
            if self._last_seq is None:
                prev[0] = (s[0] - 1) % 256
            else:
                prev[0] = self._last_seq
            self.stats.frames_dropped += int(((s - prev - 1) % 256).sum())
            self._last_seq = int(s[-1])
        return counts, seqs

    def close(self) -> StreamStats:
        """Discard any pending partial frame and return the final stats."""
        self._pending = b""
        return self.stats


def stream_decode(data: bytes) -> tuple[list[SampleFrame], StreamStats]:
    """One-shot decode of a complete byte stream."""
    dec = StreamDecoder()
    counts, seqs = dec.feed(data)
    stats = dec.close()
    frames = [SampleFrame(seq=int(s), counts=tuple(int(v) for v in row))
              for s, row in zip(seqs, counts)]
    return frames, stats


# ---------------------------------------------------------------------------
# recording container

@dataclass(frozen=True)
class RecordingHeader:
    protocol: ProtocolSpec
    conversion: ConversionSpec | None = None
    subject_id: str = ""
    placement_notes: str = ""
    seed: int | None = None
    version: int = 1


@dataclass
class Recording:
    """A labeled multi-channel session in volts.

    samples is (channels, n) float32, labels is (n,) uint8 gesture codes.
    """

    header: RecordingHeader
    samples: np.ndarray
    labels: np.ndarray
    stats: StreamStats = field(default_factory=StreamStats)

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype=np.float32)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if self.samples.ndim != 2:
            raise ValueError("samples must be (channels, n)")
        if self.labels.shape != (self.samples.shape[1],):
            raise ValueError("label track length must match the sample count")
        if self.samples.shape[0] != self.header.protocol.channels:
            raise ValueError(
                f"samples have {self.samples.shape[0]} channels, header says "
                f"{self.header.protocol.channels}")

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def sample_rate(self) -> float:
        return self.header.protocol.sample_rate

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate

    def label_histogram(self) -> dict[GestureLabel, int]:
        binc = np.bincount(self.labels, minlength=6)
        return {GestureLabel(i): int(binc[i]) for i in range(6)}


def _header_dict(rec: Recording) -> dict:
    h = rec.header
    return {
        "format_version": h.version,
        "protocol": h.protocol.to_dict(),
        "conversion": None if h.conversion is None else h.conversion.to_dict(),
        "subject_id": h.subject_id,
        "placement_notes": h.placement_notes,
        "seed": h.seed,
        "stats": rec.stats.to_dict(),
        "channels": rec.channels,
        "n_samples": rec.n_samples,
    }


def write_recording(rec: Recording, path) -> None:
    header = json.dumps(_header_dict(rec), sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(len(header).to_bytes(4, "little"))
        f.write(header)
        f.write(rec.samples.astype("<f4", copy=False).tobytes(order="C"))
        f.write(rec.labels.tobytes())


def read_recording(path) -> Recording:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < len(MAGIC) + 4:
        raise TruncatedFile(f"{path}: shorter than the fixed preamble")
    magic = blob[:8]
    if magic != MAGIC:
        if magic[:7] == MAGIC[:7]:
            raise UnsupportedVersion(f"{path}: container version tag "
                                     f"{magic[7:8]!r} not supported")
        raise RecordingFormatError(f"{path}: not a recording file")
    hlen = int.from_bytes(blob[8:12], "little")
    if len(blob) < 12 + hlen:
        raise TruncatedFile(f"{path}: header truncated")
    try:
        meta = json.loads(blob[12:12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise RecordingFormatError(f"{path}: unreadable header: {exc}") from exc
    if meta.get("format_version") != 1:
        raise UnsupportedVersion(
            f"{path}: format_version {meta.get('format_version')!r} not supported")
    channels = int(meta["channels"])
    n = int(meta["n_samples"])
    payload = blob[12 + hlen:]
    expect = 4 * channels * n + n
    if len(payload) < expect:
        raise TruncatedFile(f"{path}: payload has {len(payload)} bytes, "
                            f"header declares {expect}")
    if len(payload) > expect:
        raise LengthMismatch(f"{path}: {len(payload) - expect} trailing bytes "
                             "beyond the declared series")
    samples = np.frombuffer(payload, dtype="<f4", count=channels * n)
    samples = samples.reshape(channels, n).copy()
    labels = np.frombuffer(payload, dtype=np.uint8, count=n,
                           offset=4 * channels * n).copy()
    conv = meta.get("conversion")
    header = RecordingHeader(
        protocol=ProtocolSpec.from_dict(meta["protocol"]),
        conversion=None if conv is None else ConversionSpec.from_dict(conv),
        subject_id=meta.get("subject_id", ""),
        placement_notes=meta.get("placement_notes", ""),
        seed=meta.get("seed"),
    )
    return Recording(header=header, samples=samples, labels=labels,
                     stats=StreamStats.from_dict(meta.get("stats", {})))


def recording_from_counts(counts: np.ndarray, conversion: ConversionSpec,
                          protocol: ProtocolSpec, stats: StreamStats,
                          subject_id: str = "") -> Recording:
    """Wrap decoded wire counts (n, 4) into a Recording, all labels NEUTRAL."""
    if protocol.channels != counts.shape[1]:
        raise ValueError(f"protocol declares {protocol.channels} channels, "
                         f"wire frames carry {counts.shape[1]}")
    volts = counts_to_volts(counts, conversion).T.astype(np.float32)
    header = RecordingHeader(protocol=protocol, conversion=conversion,
                             subject_id=subject_id)
    labels = np.zeros(counts.shape[0], dtype=np.uint8)
    return Recording(header=header, samples=volts, labels=labels, stats=stats)
