"""Gesture classification pipeline.

Preprocessing (band-pass plus mains notch), envelope extraction, temporal
activation maps, a per-subject nearest-template classifier with neutral
rejection, and the train/test evaluation report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage
from scipy import signal as sig

from semgkit.ingest import Recording
from semgkit.protocol import FIVE_GESTURES, GestureLabel, ProtocolSpec
from semgkit.synth import ActivationTemplate, InterferenceModel, generate_session

MODEL_MAGIC = b"SEMGMDL1"


class MissingGestureError(ValueError):
    """Training data lacks instances of one or more gestures."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        names = ", ".join(g.display_name for g in self.missing)
        super().__init__(f"no training maps for: {names}")


# ---------------------------------------------------------------------------
# filtering and envelope extraction

@dataclass(frozen=True)
class FilterSpec:
    low_hz: float = 15.0
    high_hz: float = 120.0
    order: int = 4
    notch_hz: float | None = 50.0
    notch_q: float = 30.0

    def validate(self, fs: float) -> None:
        if not 0 < self.low_hz < self.high_hz < fs / 2:
            raise ValueError(f"band ({self.low_hz}, {self.high_hz}) Hz invalid "
                             f"for fs = {fs} Hz")
        if self.notch_hz is not None and not 0 < self.notch_hz < fs / 2:
            raise ValueError(f"notch at {self.notch_hz} Hz invalid for fs = {fs} Hz")


@dataclass(frozen=True)
class EnvelopeSpec:
    """Rectify-then-lowpass envelope."""

    cutoff_hz: float = 3.0
    order: int = 2


def bandpass_sos(fs: float, spec: FilterSpec) -> np.ndarray:
    spec.validate(fs)
    return sig.butter(spec.order, [spec.low_hz / (fs / 2), spec.high_hz / (fs / 2)],
                      btype="bandpass", output="sos")


def notch_sos(fs: float, center_hz: float, q: float) -> np.ndarray:
    if not 0 < center_hz < fs / 2:
        raise ValueError(f"notch center {center_hz} Hz invalid for fs = {fs} Hz")
    b, a = sig.iirnotch(center_hz, q, fs=fs)
    return sig.tf2sos(b, a)


def envelope_sos(fs: float, spec: EnvelopeSpec) -> np.ndarray:
    return sig.butter(spec.order, spec.cutoff_hz / (fs / 2),
                      btype="lowpass", output="sos")


def _run_sos(sos: np.ndarray, x: np.ndarray, zero_phase: bool) -> np.ndarray:
    return sig.sosfiltfilt(sos, x, axis=-1) if zero_phase else sig.sosfilt(sos, x, axis=-1)


def bandpass(x, fs: float, spec: FilterSpec = FilterSpec(), *,
             zero_phase: bool = True) -> np.ndarray:
    """Band-pass the signal (last axis is time)."""
    return _run_sos(bandpass_sos(fs, spec), np.asarray(x, dtype=np.float64),
                    zero_phase)


def notch(x, fs: float, center_hz: float = 50.0, q: float = 30.0, *,
          zero_phase: bool = True) -> np.ndarray:
    """Narrow mains rejection; tones 10 Hz away pass essentially untouched."""
    return _run_sos(notch_sos(fs, center_hz, q), np.asarray(x, dtype=np.float64),
                    zero_phase)


def preprocess(x, fs: float, spec: FilterSpec = FilterSpec(), *,
               zero_phase: bool = True) -> np.ndarray:
    y = bandpass(x, fs, spec, zero_phase=zero_phase)
    if spec.notch_hz is not None:
        y = notch(y, fs, spec.notch_hz, spec.notch_q, zero_phase=zero_phase)
    return y


def envelope(x, fs: float, spec: EnvelopeSpec = EnvelopeSpec(), *,
             zero_phase: bool = True) -> np.ndarray:
    """Nonnegative slow amplitude profile: |x| low-passed at spec.cutoff_hz.

    A steady tone of amplitude a settles near a * 2/pi (the mean of the
    rectified sine).
    """
    rect = np.abs(np.asarray(x, dtype=np.float64))
    env = _run_sos(envelope_sos(fs, spec), rect, zero_phase)
    return np.maximum(env, 0.0)


# ---------------------------------------------------------------------------
# onset detection

@dataclass(frozen=True)
class OnsetSpec:
    threshold_factor: float = 3.0   # k: threshold = k * baseline
    baseline_s: float = 2.0         # trailing median window
    hysteresis_s: float = 5.0       # no retrigger within one hold
    min_threshold: float = 1e-9     # floor for silent baselines


def _trailing_median(x: np.ndarray, w: int) -> np.ndarray:
    """Median over the w samples strictly before each position."""
    w = max(w, 1)
    med = ndimage.median_filter(x, size=w, mode="nearest")
    shift = w // 2 + 1
    out = np.empty_like(med)
    out[:shift] = med[0]
    out[shift:] = med[:-shift]
    return out


def detect_onsets(envelopes, fs: float, spec: OnsetSpec = OnsetSpec()) -> list[float]:
    """All activation onsets in seconds, honoring hysteresis.

    envelopes is (channels, n) or (n,); channels are combined by max. An
    onset is the earliest time the combined envelope exceeds
    threshold_factor times the median of the preceding rest; after firing,
    the detector re-arms only once the envelope has dropped back below
    threshold and the hysteresis interval has passed.
    """
    env = np.asarray(envelopes, dtype=np.float64)
    combined = env.max(axis=0) if env.ndim == 2 else env
    n = combined.size
    if n == 0:
        return []
    baseline = _trailing_median(combined, int(round(spec.baseline_s * fs)))
    threshold = np.maximum(spec.threshold_factor * baseline, spec.min_threshold)
    active = combined > threshold
    onsets: list[float] = []
    hyst = int(round(spec.hysteresis_s * fs))
    i = 0
    armed = True
    next_allowed = 0
    while i < n:
        if active[i] and armed and i >= next_allowed:
            onsets.append(i / fs)
            next_allowed = i + hyst
            armed = False
        elif not active[i]:
            armed = True
        i += 1
    return onsets


def detect_onset(envelopes, fs: float, spec: OnsetSpec = OnsetSpec()) -> float | None:
    """Earliest onset time, or None when the stream stays quiescent."""
    onsets = detect_onsets(envelopes, fs, spec)
    return onsets[0] if onsets else None


# ---------------------------------------------------------------------------
# activation maps

@dataclass(frozen=True)
class TmaMap:
    """channels x window activation matrix, normalized to unit peak."""

    values: np.ndarray
    start_s: float
    length_s: float
    normalization: str = "unit-peak"
    degenerate: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("map values must be channels x samples")
        if np.any(v < 0):
            raise ValueError("map values must be nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def tma_map(envelopes, fs: float, onset_s: float, length_s: float = 3.0) -> TmaMap:
    """Cut a unit-peak activation map from per-channel envelopes.

    An all-zero window yields an all-zero map carrying the degenerate flag.
    """
    env = np.atleast_2d(np.asarray(envelopes, dtype=np.float64))
    start = int(round(onset_s * fs))
    length = int(round(length_s * fs))
    if start < 0 or start + length > env.shape[1]:
        raise ValueError(f"window [{onset_s}, {onset_s + length_s}] s outside "
                         f"the recording ({env.shape[1] / fs:.2f} s)")
    window = env[:, start:start + length].copy()
    peak = window.max()
    if peak <= 0.0:
        return TmaMap(values=window, start_s=onset_s, length_s=length_s,
                      degenerate=True)
    return TmaMap(values=window / peak, start_s=onset_s, length_s=length_s)


# ---------------------------------------------------------------------------
# nearest-template classifier

@dataclass(frozen=True)
class ClassifierModel:
    """Per-gesture mean templates with a neutral-rejection threshold."""

    gestures: tuple[GestureLabel, ...]
    templates: np.ndarray          # (n_gestures, channels, window)
    reject_threshold: float
    metric: str = "frobenius"
    window_s: float = 3.0
    sample_rate: float = 250.0
    meta: dict = field(default_factory=dict)

    @property
    def map_shape(self) -> tuple[int, int]:
        return self.templates.shape[1], self.templates.shape[2]

    def distances(self, tmap: TmaMap) -> np.ndarray:
        if tmap.values.shape != self.map_shape:
            raise ValueError(f"map shape {tmap.values.shape} does not match "
                             f"model {self.map_shape}")
        d = self.templates - tmap.values[None, :, :]
        return np.sqrt(np.einsum("gcw,gcw->g", d, d))


def train(maps: list[TmaMap], labels: list[GestureLabel],
          gestures: tuple[GestureLabel, ...] = FIVE_GESTURES,
          threshold_factor: float = 1.5, **meta) -> ClassifierModel:
    """Fit mean templates per gesture.

    Requires at least two maps per expected gesture; the rejection
    threshold is the largest intra-class distance times threshold_factor.
    """
    if len(maps) != len(labels):
        raise ValueError("one label per map required")
    by_gesture: dict[GestureLabel, list[np.ndarray]] = {g: [] for g in gestures}
    for m, lab in zip(maps, labels):
        if lab in by_gesture:
            by_gesture[lab].append(m.values)
    missing = [g for g in gestures if len(by_gesture[g]) < 2]
    if missing:
        raise MissingGestureError(missing)
    shapes = {m.values.shape for m in maps}
    if len(shapes) > 1:
        raise ValueError(f"inconsistent map shapes: {shapes}")
    templates = np.stack([np.mean(by_gesture[g], axis=0) for g in gestures])
    max_intra = 0.0
    for gi, g in enumerate(gestures):
        for v in by_gesture[g]:
            d = v - templates[gi]
            max_intra = max(max_intra, float(np.sqrt(np.sum(d * d))))
    fs = meta.pop("sample_rate", 250.0)
    window_s = meta.pop("window_s", maps[0].length_s)
    return ClassifierModel(gestures=tuple(gestures), templates=templates,
                           reject_threshold=threshold_factor * max_intra,
                           window_s=window_s, sample_rate=fs, meta=meta)


def classify(model: ClassifierModel, tmap: TmaMap) -> tuple[GestureLabel, float]:
    """Nearest template by the model metric.

    Returns NEUTRAL when the best distance exceeds the rejection threshold.
    The score is the margin between best and second-best distance; exact
    ties break toward the earlier gesture in enumeration order and carry
    score 0.
    """
    d = model.distances(tmap)
    order = np.argsort(d, kind="stable")
    best = int(order[0])
    margin = float(d[order[1]] - d[order[0]]) if len(d) > 1 else float("inf")
    if d[best] > model.reject_threshold:
        return GestureLabel.NEUTRAL, margin
    return model.gestures[best], margin


def save_model(model: ClassifierModel, path) -> None:
    header = {
        "format_version": 1,
        "gestures": [g.name for g in model.gestures],
        "shape": list(model.templates.shape),
        "metric": model.metric,
        "reject_threshold": model.reject_threshold,
        "window_s": model.window_s,
        "sample_rate": model.sample_rate,
        "meta": model.meta,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(len(blob).to_bytes(4, "little"))
        f.write(blob)
        f.write(model.templates.astype("<f4").tobytes(order="C"))


def load_model(path) -> ClassifierModel:
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:8] != MODEL_MAGIC:
        raise ValueError(f"{path}: not a classifier model file")
    hlen = int.from_bytes(blob[8:12], "little")
    meta = json.loads(blob[12:12 + hlen].decode("utf-8"))
    if meta.get("format_version") != 1:
        raise ValueError(f"{path}: unsupported model version "
                         f"{meta.get('format_version')!r}")
    shape = tuple(meta["shape"])
    templates = np.frombuffer(blob[12 + hlen:], dtype="<f4",
                              count=int(np.prod(shape)))
    return ClassifierModel(
        gestures=tuple(GestureLabel[n] for n in meta["gestures"]),
        templates=templates.reshape(shape).astype(np.float64),
        reject_threshold=float(meta["reject_threshold"]),
        metric=meta["metric"], window_s=float(meta["window_s"]),
        sample_rate=float(meta["sample_rate"]), meta=meta.get("meta", {}))


# ---------------------------------------------------------------------------
# session segmentation and evaluation

@dataclass(frozen=True)
class PipelineSettings:
    filter: FilterSpec = FilterSpec()
    envelope: EnvelopeSpec = EnvelopeSpec()
    onset: OnsetSpec = OnsetSpec()
    window_s: float = 3.0
    zero_phase: bool = True

    def __post_init__(self):
        if self.envelope.cutoff_hz >= self.filter.low_hz:
            raise ValueError("envelope cutoff must be below the band-pass "
                             "low edge (the envelope is slower than the carrier)")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.5
    seed: int = 12345

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must be in (0, 1)")


def _rep_segments(labels: np.ndarray) -> list[tuple[GestureLabel, int, int]]:
    """Contiguous non-neutral label runs as (gesture, start, end) indices."""
    segs = []
    n = len(labels)
    i = 0
    while i < n:
        if labels[i] != 0:
            j = i
            while j < n and labels[j] == labels[i]:
                j += 1
            segs.append((GestureLabel(int(labels[i])), i, j))
            i = j
        else:
            i += 1
    return segs


def session_maps(rec: Recording, settings: PipelineSettings = PipelineSettings()
                 ) -> tuple[list[TmaMap], list[GestureLabel]]:
    """Segment a labeled recording into one activation map per repetition.

    Within each labeled hold, the window starts at the detected onset
    (threshold against the preceding rest); if nothing crosses, it falls
    back to the hold start. Windows are clamped to stay inside the
    recording.
    """
    fs = rec.sample_rate
    filtered = preprocess(rec.samples.astype(np.float64), fs, settings.filter,
                          zero_phase=settings.zero_phase)
    envs = envelope(filtered, fs, settings.envelope,
                    zero_phase=settings.zero_phase)
    win = int(round(settings.window_s * fs))
    maps: list[TmaMap] = []
    labels: list[GestureLabel] = []
    for gesture, start, end in _rep_segments(rec.labels):
        ctx_start = max(0, start - int(round(settings.onset.baseline_s * fs)))
        seg = envs[:, ctx_start:end]
        onsets = detect_onsets(seg, fs, settings.onset)
        rel = None
        for t in onsets:
            idx = ctx_start + int(round(t * fs))
            if idx >= start:
                rel = idx
                break
        start_idx = rel if rel is not None else start
        start_idx = min(start_idx, envs.shape[1] - win)
        start_idx = min(start_idx, end)  # stay anchored to this rep
        maps.append(tma_map(envs, fs, start_idx / fs, settings.window_s))
        labels.append(gesture)
    return maps, labels


@dataclass(frozen=True)
class EvaluationReport:
    """Per-gesture, per-subject accuracy table plus a confusion matrix."""

    subjects: tuple[str, ...]
    gestures: tuple[GestureLabel, ...]
    cells: dict  # (gesture, subject) -> (correct, total); absent if untested
    confusion: np.ndarray  # rows: true gesture 1..5; cols: predicted 0..5
    split_seed: int
    filtering: str = "zero-phase"

    def accuracy(self, gesture: GestureLabel, subject: str) -> float | None:
        cell = self.cells.get((gesture, subject))
        if cell is None or cell[1] == 0:
            return None
        return 100.0 * cell[0] / cell[1]

    def gesture_average(self, gesture: GestureLabel) -> float:
        vals = [self.accuracy(gesture, s) for s in self.subjects]
        vals = [v for v in vals if v is not None]
        if not vals:
            raise ValueError(f"no tested cells for {gesture.display_name}")
        return float(np.mean(vals))

    def overall_accuracy(self) -> float:
        correct = sum(c for c, _ in self.cells.values())
        total = sum(t for _, t in self.cells.values())
        if total == 0:
            raise ValueError("report has no tested instances")
        return 100.0 * correct / total

    def render_text(self) -> str:
        width = 7
        lines = ["Classification accuracy (%)"]
        head = f"{'Finger':<12}" + "".join(f"{s:>{width}}" for s in self.subjects)
        head += f"{'Avg':>{width}}"
        lines.append(head)
        for i, g in enumerate(self.gestures, start=1):
            row = f"{i}. {g.display_name:<9}"
            for s in self.subjects:
                acc = self.accuracy(g, s)
                row += f"{'--':>{width}}" if acc is None else f"{acc:>{width}.1f}"
            row += f"{self.gesture_average(g):>{width}.1f}"
            lines.append(row)
        lines.append(f"Overall average: {self.overall_accuracy():.1f}% "
                     f"({self.filtering} filtering, split seed {self.split_seed})")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["gesture," + ",".join(self.subjects) + ",avg"]
        for g in self.gestures:
            cells = []
            for s in self.subjects:
                acc = self.accuracy(g, s)
                cells.append("" if acc is None else f"{acc:.2f}")
            lines.append(f"{g.display_name}," + ",".join(cells)
                         + f",{self.gesture_average(g):.2f}")
        return "\n".join(lines) + "\n"


def evaluate(recordings: list[Recording], split: SplitSpec = SplitSpec(),
             settings: PipelineSettings = PipelineSettings()) -> EvaluationReport:
    """Per-subject train/test evaluation, stratified 50/50 over repetitions.

    Each subject's model is trained and tested on that subject only;
    deterministic for a fixed split seed.
    """
    subjects: list[str] = []
    cells: dict = {}
    confusion = np.zeros((6, 6), dtype=np.int64)
    gestures_seen: set[GestureLabel] = set()
    for subj_idx, rec in enumerate(recordings):
        subject = rec.header.subject_id or f"S{subj_idx + 1}"
        subjects.append(subject)
        maps, labels = session_maps(rec, settings)
        by_gesture: dict[GestureLabel, list[int]] = {}
        for i, lab in enumerate(labels):
            by_gesture.setdefault(lab, []).append(i)
        gestures_seen |= set(by_gesture)
        rng = np.random.default_rng([split.seed, subj_idx])
        train_idx: list[int] = []
        test_idx: list[int] = []
        for g in sorted(by_gesture, key=int):
            reps = by_gesture[g]
            if len(reps) < 2:
                raise ValueError(f"subject {subject}: gesture "
                                 f"{g.display_name} has {len(reps)} repetition(s), "
                                 "need at least 2 for a split")
            perm = rng.permutation(len(reps))
            n_train = max(1, int(round(split.train_fraction * len(reps))))
            n_train = min(n_train, len(reps) - 1)
            train_idx += [reps[k] for k in perm[:n_train]]
            test_idx += [reps[k] for k in perm[n_train:]]
        present = tuple(sorted(by_gesture, key=int))
        model = train([maps[i] for i in train_idx],
                      [labels[i] for i in train_idx], gestures=present,
                      sample_rate=rec.sample_rate, window_s=settings.window_s)
        for i in test_idx:
            predicted, _ = classify(model, maps[i])
            truth = labels[i]
            correct, total = cells.get((truth, subject), (0, 0))
            cells[(truth, subject)] = (correct + (predicted == truth), total + 1)
            confusion[int(truth), int(predicted)] += 1
    gesture_order = tuple(g for g in FIVE_GESTURES if g in gestures_seen)
    return EvaluationReport(subjects=tuple(subjects), gestures=gesture_order,
                            cells=cells, confusion=confusion,
                            split_seed=split.seed,
                            filtering="zero-phase" if settings.zero_phase else "causal")


# ---------------------------------------------------------------------------
# synthetic corpora

def make_corpus(n_subjects: int = 4, seed: int = 12345,
                protocol: ProtocolSpec = ProtocolSpec(),
                template: ActivationTemplate | None = None,
                noise: InterferenceModel = InterferenceModel()) -> list[Recording]:
    """Default virtual corpus: one session per subject, seeded per subject.

    Subjects get mildly perturbed copies of the activation template
    (per-channel strength factors within +/-15%).
    """
    template = template or ActivationTemplate.default(protocol.channels)
    recs = []
    for i in range(n_subjects):
        rng = np.random.default_rng([seed, 0x5B, i])
        factors = 1.0 + 0.15 * rng.uniform(-1.0, 1.0, size=protocol.channels)
        plateaus = {g: tuple(a * factors[c] for c, a in enumerate(amps))
                    for g, amps in template.plateaus.items()}
        tmpl_i = replace(template, plateaus=plateaus)
        recs.append(generate_session(protocol, tmpl_i, noise,
                                     seed=seed + 7919 * i,
                                     subject_id=chr(ord("A") + i)))
    return recs


def noise_sweep_accuracies(noise_scales, seeds, *,
                           protocol: ProtocolSpec = ProtocolSpec(),
                           template: ActivationTemplate | None = None,
                           base_noise: InterferenceModel = InterferenceModel(),
                           split: SplitSpec = SplitSpec(),
                           settings: PipelineSettings = PipelineSettings()
                           ) -> list[float]:
    """Mean overall accuracy at each white-noise scale, averaged over seeds.

    One single-subject session per (scale, seed); used for SNR robustness
    sweeps.
    """
    template = template or ActivationTemplate.default(protocol.channels)
    means = []
    for scale in noise_scales:
        noise = base_noise.with_noise_scale(scale)
        accs = []
        for s in seeds:
            rec = generate_session(protocol, template, noise, seed=s,
                                   subject_id=f"N{scale}")
            report = evaluate([rec], split=split, settings=settings)
            accs.append(report.overall_accuracy())
        means.append(float(np.mean(accs)))
    return means
