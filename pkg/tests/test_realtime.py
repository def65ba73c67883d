import numpy as np
import pytest
from scipy import signal as sig

from semgkit import pipeline
from semgkit.ingest import ConversionSpec, encode_frames, volts_to_counts
from semgkit.pipeline import PipelineSettings
from semgkit.protocol import ProtocolSpec
from semgkit.realtime import RealTimeClassifier, StreamingSos
from semgkit.synth import ActivationTemplate, InterferenceModel, generate_session

CAUSAL = PipelineSettings(zero_phase=False)


def wire_bytes(rec, conversion=ConversionSpec()):
    counts = volts_to_counts(rec.samples.astype(np.float64).T, conversion)
    seqs = np.arange(len(counts)) % 256
    return encode_frames(seqs, counts)


def test_streaming_sos_matches_batch():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((3, 4000))
    sos = sig.butter(4, [15 / 125, 120 / 125], btype="bandpass", output="sos")
    streamer = StreamingSos(sos, channels=3)
    parts = [streamer.process(np.ascontiguousarray(x[:, i:i + 333]))
             for i in range(0, 4000, 333)]
    assert np.allclose(np.hstack(parts), sig.sosfilt(sos, x, axis=-1),
                       rtol=1e-10, atol=1e-13)


@pytest.fixture(scope="module")
def trained():
    protocol = ProtocolSpec(reps_per_gesture=4)
    tmpl = ActivationTemplate.default(4)
    noise = InterferenceModel()
    train_rec = generate_session(protocol, tmpl, noise, seed=100, subject_id="T")
    maps, labels = pipeline.session_maps(train_rec, CAUSAL)
    model = pipeline.train(maps, labels, sample_rate=protocol.sample_rate,
                           window_s=CAUSAL.window_s)
    live_rec = generate_session(protocol, tmpl, noise, seed=200, subject_id="T")
    return model, live_rec


def test_realtime_classifies_streamed_session(trained):
    model, live = trained
    rtc = RealTimeClassifier(model, settings=CAUSAL)
    stream = wire_bytes(live)
    events = []
    chunk = 16 * 25  # 25 frames = 0.1 s
    for i in range(0, len(stream), chunk):
        events.extend(rtc.feed(stream[i:i + chunk]))
    events.extend(rtc.flush())

    # expected: one event per hold, labeled with that gesture
    expected = [g for g in live.header.protocol.gestures
                for _ in range(live.header.protocol.reps_per_gesture)]
    assert len(events) == len(expected)
    correct = sum(e.label == g for e, g in zip(events, expected))
    assert correct / len(expected) >= 0.9
    # onsets land inside their holds
    rep_s = live.header.protocol.rep_samples / live.sample_rate
    for k, e in enumerate(events):
        hold_start = k * rep_s
        assert hold_start - 0.1 <= e.time_s <= hold_start + 5.0


def test_realtime_survives_byte_fragmentation(trained):
    model, live = trained
    stream = wire_bytes(live)[: 16 * 250 * 25]  # first 25 s
    one = RealTimeClassifier(model, settings=CAUSAL)
    ev_one = one.feed(stream) + one.flush()
    ragged = RealTimeClassifier(model, settings=CAUSAL)
    ev_ragged = []
    rng = np.random.default_rng(1)
    i = 0
    while i < len(stream):
        step = int(rng.integers(1, 700))
        ev_ragged.extend(ragged.feed(stream[i:i + step]))
        i += step
    ev_ragged.extend(ragged.flush())
    assert [e.label for e in ev_one] == [e.label for e in ev_ragged]


def test_realtime_channel_mismatch(trained):
    model, _ = trained
    rtc = RealTimeClassifier(model, settings=CAUSAL)
    frames = encode_frames([0], np.zeros((1, 4), dtype=np.int64))
    rtc.feed(frames)  # 4 channels: fine
    assert rtc.channels == 4
