"""Real-time path: byte stream in, gesture events out.

A single ordered consumer chains the wire decoder, causal filtering,
envelope extraction, onset detection and window classification. All filter
state lives in this object; feed it chunks of any size from one producer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from semgkit import _kernels
from semgkit.ingest import ConversionSpec, StreamDecoder, counts_to_volts
from semgkit.pipeline import (ClassifierModel, PipelineSettings, bandpass_sos,
                              classify, envelope_sos, notch_sos, tma_map)
from semgkit.protocol import GestureLabel


class StreamingSos:
    """Per-channel biquad cascade with persistent state."""

    def __init__(self, sos: np.ndarray, channels: int):
        self.sos = np.ascontiguousarray(sos, dtype=np.float64)
        self.zi = np.zeros((channels, self.sos.shape[0], 2))

    def process(self, x: np.ndarray) -> np.ndarray:
        out = np.empty_like(x)
        for ch in range(x.shape[0]):
            out[ch] = _kernels.sos_stream(self.sos, np.ascontiguousarray(x[ch]),
                                          self.zi[ch])
        return out


@dataclass(frozen=True)
class GestureEvent:
    time_s: float
    label: GestureLabel
    margin: float


class RealTimeClassifier:
    """Streaming decode + filter + envelope + classify.

    The onset baseline is the median of a trailing envelope ring buffer,
    refreshed on a fixed sample grid (every 0.2 s of stream time) so the
    result does not depend on how the byte stream is chunked. After an
    onset, one classification window is accumulated and classified; the
    detector re-arms after the hysteresis interval once the envelope drops
    back under threshold.
    """

    def __init__(self, model: ClassifierModel,
                 conversion: ConversionSpec = ConversionSpec(),
                 settings: PipelineSettings = PipelineSettings()):
        self.model = model
        self.conversion = conversion
        self.settings = settings
        fs = model.sample_rate
        channels = model.map_shape[0]
        self.fs = fs
        self.channels = channels
        sos = bandpass_sos(fs, settings.filter)
        if settings.filter.notch_hz is not None:
            sos = np.vstack([sos, notch_sos(fs, settings.filter.notch_hz,
                                            settings.filter.notch_q)])
        self.decoder = StreamDecoder()
        self._filt = StreamingSos(sos, channels)
        self._env = StreamingSos(envelope_sos(fs, settings.envelope), channels)
        self._window = int(round(model.window_s * fs))
        self._refresh = max(1, int(round(0.2 * fs)))
        self._baseline_ring = np.zeros(int(round(settings.onset.baseline_s * fs)))
        self._ring_pos = 0
        self._ring_filled = 0
        self._sample_clock = 0
        self._threshold = settings.onset.min_threshold
        self._armed = True
        self._next_allowed = 0
        self._collecting: np.ndarray | None = None
        self._collected = 0
        self._onset_sample = 0

    def feed(self, chunk: bytes) -> list[GestureEvent]:
        """Consume raw wire bytes; returns classification events."""
        counts, _ = self.decoder.feed(chunk)
        if len(counts) == 0:
            return []
        volts = counts_to_volts(counts, self.conversion).T  # (channels, n)
        if volts.shape[0] != self.channels:
            raise ValueError(f"model expects {self.channels} channels, frames "
                             f"carry {volts.shape[0]}")
        # split at absolute refresh boundaries so the threshold schedule is
        # independent of how the producer chunks the bytes
        events: list[GestureEvent] = []
        pos = 0
        n = volts.shape[1]
        while pos < n:
            take = min(self._refresh - self._sample_clock % self._refresh,
                       n - pos)
            events.extend(self._consume(np.ascontiguousarray(
                volts[:, pos:pos + take])))
            pos += take
        return events

    def _refresh_threshold(self):
        spec = self.settings.onset
        filled = max(self._ring_filled, 1)
        baseline = float(np.median(self._baseline_ring[:filled]))
        self._threshold = max(spec.threshold_factor * baseline,
                              spec.min_threshold)

    def _consume(self, volts: np.ndarray) -> list[GestureEvent]:
        spec = self.settings.onset
        events: list[GestureEvent] = []
        envs = self._env.process(np.abs(self._filt.process(volts)))
        np.maximum(envs, 0.0, out=envs)
        combined = envs.max(axis=0)
        n = combined.size

        if self._sample_clock % self._refresh == 0:
            self._refresh_threshold()
        threshold = self._threshold

        if self._collecting is not None:
            take = min(self._window - self._collected, n)
            self._collecting[:, self._collected:self._collected + take] = envs[:, :take]
            self._collected += take
            if self._collected >= self._window:
                events.append(self._classify_window())

        active = combined > threshold
        for i in range(n):
            t = self._sample_clock + i
            if active[i] and self._armed and t >= self._next_allowed:
                self._armed = False
                self._next_allowed = t + int(round(spec.hysteresis_s * self.fs))
                if self._collecting is None:
                    self._begin_window(t, envs, i)
            elif not active[i]:
                self._armed = True
        if self._collecting is not None and self._collected >= self._window:
            events.append(self._classify_window())

        self._push_ring(combined)
        self._sample_clock += n
        return events

    def flush(self) -> list[GestureEvent]:
        """Classify a pending window that already has all its samples."""
        if self._collecting is not None and self._collected >= self._window:
            return [self._classify_window()]
        return []

    def _begin_window(self, onset_sample: int, envs: np.ndarray, offset: int):
        self._collecting = np.zeros((self.channels, self._window))
        avail = envs.shape[1] - offset
        take = min(self._window, avail)
        self._collecting[:, :take] = envs[:, offset:offset + take]
        self._collected = take
        self._onset_sample = onset_sample

    def _classify_window(self) -> GestureEvent:
        tmap = tma_map(self._collecting, self.fs, 0.0, self.model.window_s)
        label, margin = classify(self.model, tmap)
        event = GestureEvent(time_s=self._onset_sample / self.fs,
                             label=label, margin=margin)
        self._collecting = None
        self._collected = 0
        return event

    def _push_ring(self, values: np.ndarray):
        ring = self._baseline_ring
        m = ring.size
        for start in range(0, values.size, m):
            seg = values[start:start + m]
            k = seg.size
            end = self._ring_pos + k
            if end <= m:
                ring[self._ring_pos:end] = seg
            else:
                split = m - self._ring_pos
                ring[self._ring_pos:] = seg[:split]
                ring[:end - m] = seg[split:]
            self._ring_pos = end % m
            self._ring_filled = min(self._ring_filled + k, m)
