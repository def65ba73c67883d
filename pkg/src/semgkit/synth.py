"""Deterministic synthetic sEMG sessions and bench test tones.

The session generator follows the acquisition protocol (gesture blocks of
hold/rest repetitions) and produces labeled recordings. The raw myoelectric
waveform is modeled as band-limited Gaussian noise, amplitude-modulated by a
trapezoidal activation profile; mains interference is injected as a
common-mode terminal signal. Everything is a pure function of its inputs and
an integer seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import signal as sig

from semgkit.protocol import FIVE_GESTURES, GestureLabel, ProtocolSpec


class AliasingError(ValueError):
    """Requested tone frequency is not representable at the sample rate."""


@dataclass(frozen=True)
class ActivationTemplate:
    """Per-(gesture, channel) activation profile parameters.

    plateaus maps each gesture to its per-channel plateau amplitude in volts
    at the skin. Gestures absent from the map (and NEUTRAL always) are
    silent on all channels.
    """

    plateaus: dict[GestureLabel, tuple[float, ...]]
    rise_s: float = 0.5
    fall_s: float = 0.5
    jitter: float = 0.1  # fractional rep-to-rep amplitude spread

    def __post_init__(self):
        widths = {len(v) for v in self.plateaus.values()}
        if len(widths) > 1:
            raise ValueError(f"inconsistent channel counts in template: {widths}")
        if self.rise_s < 0 or self.fall_s < 0:
            raise ValueError("rise_s and fall_s must be >= 0")
        if not 0 <= self.jitter < 1:
            raise ValueError(f"jitter must be in [0, 1), got {self.jitter}")
        neutral = self.plateaus.get(GestureLabel.NEUTRAL)
        if neutral is not None and any(a != 0 for a in neutral):
            raise ValueError("NEUTRAL must be silent on all channels")

    @property
    def channels(self) -> int:
        return len(next(iter(self.plateaus.values()))) if self.plateaus else 0

    def plateau(self, gesture: GestureLabel, channel: int) -> float:
        if channel < 0 or channel >= self.channels:
            raise ValueError(f"channel {channel} out of range (template has "
                             f"{self.channels})")
        amps = self.plateaus.get(gesture)
        return 0.0 if amps is None else float(amps[channel])

    @classmethod
    def default(cls, channels: int = 4) -> "ActivationTemplate":
        """Distinct per-gesture channel patterns, strongest on one channel."""
        strong, weak = 8e-4, 2.5e-4
        base = {
            GestureLabel.THUMB: (strong, weak, 0.0, 0.0),
            GestureLabel.INDEX: (0.0, strong, weak, 0.0),
            GestureLabel.MIDDLE: (0.0, weak, strong, weak),
            GestureLabel.RING: (0.0, 0.0, weak, strong),
            GestureLabel.HAND_CLOSURE: (6e-4, 6e-4, 6e-4, 6e-4),
        }
        if channels != 4:
            # rotate the strong channel across however many channels exist
            base = {
                g: tuple(strong if c == (i % channels) else 0.0
                         for c in range(channels))
                for i, g in enumerate(FIVE_GESTURES)
            }
        return cls(plateaus=base)

    def scaled(self, k: float) -> "ActivationTemplate":
        return replace(self, plateaus={
            g: tuple(a * k for a in amps) for g, amps in self.plateaus.items()
        })


@dataclass(frozen=True)
class InterferenceModel:
    """Additive disturbances superimposed on a session.

    The mains component is a common-mode terminal signal; what survives into
    the recorded differential channels is set by cm_rejection_db (the
    front-end rejection the recording chain is assumed to provide, default
    59 dB). White noise, baseline wander and motion bursts enter
    differentially.
    """

    powerline_freq: float = 50.0
    powerline_cm_amplitude: float = 0.01     # volts, at the terminals
    cm_rejection_db: float = 59.0
    white_noise_density: float = 2.5e-6      # volts / sqrt(Hz)
    wander_amplitude: float = 2e-4           # volts RMS
    wander_corner_hz: float = 0.5
    motion_rate: float = 0.05                # bursts per second
    motion_amplitude: float = 1e-3           # volts, burst peak
    motion_duration_s: float = 0.3

    def __post_init__(self):
        for name in ("powerline_cm_amplitude", "white_noise_density",
                     "wander_amplitude", "motion_rate", "motion_amplitude",
                     "motion_duration_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.powerline_freq <= 0:
            raise ValueError("powerline_freq must be > 0")

    @classmethod
    def quiet(cls) -> "InterferenceModel":
        return cls(powerline_cm_amplitude=0.0, white_noise_density=0.0,
                   wander_amplitude=0.0, motion_rate=0.0, motion_amplitude=0.0)

    def with_noise_scale(self, k: float) -> "InterferenceModel":
        """Copy with the white-noise density scaled by k (SNR sweeps)."""
        return replace(self, white_noise_density=self.white_noise_density * k)


@dataclass(frozen=True)
class TerminalPair:
    """Sampled voltages at the two electrode terminals of one sensor."""

    e1: np.ndarray
    e2: np.ndarray
    sample_rate: float

    def __post_init__(self):
        e1 = np.asarray(self.e1, dtype=np.float64)
        e2 = np.asarray(self.e2, dtype=np.float64)
        if e1.shape != e2.shape or e1.ndim != 1:
            raise ValueError("e1 and e2 must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(e1)) and np.all(np.isfinite(e2))):
            raise ValueError("terminal series must be finite")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be > 0")
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)

    @property
    def differential(self) -> np.ndarray:
        return self.e1 - self.e2

    @property
    def common_mode(self) -> np.ndarray:
        return 0.5 * (self.e1 + self.e2)

    def __len__(self) -> int:
        return len(self.e1)


class ToneMode(Enum):
    DIFFERENTIAL = "differential"
    COMMON_MODE = "common-mode"


def activation_envelope(gesture: GestureLabel, channel: int, t,
                        tmpl: ActivationTemplate, hold_s: float):
    """Trapezoidal activation amplitude at time t (seconds from hold start).

    Rises linearly from 0 to the plateau over rise_s, holds, and falls back
    to 0 ending exactly at hold_s. Outside [0, hold_s] the value is 0.
    Accepts scalar or array t.
    """
    if tmpl.rise_s + tmpl.fall_s >= hold_s:
        raise ValueError(f"rise + fall ({tmpl.rise_s + tmpl.fall_s} s) must be "
                         f"shorter than the hold ({hold_s} s)")
    plateau = tmpl.plateau(gesture, channel)
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    env = np.zeros_like(t)
    if plateau != 0.0:
        rise, fall = tmpl.rise_s, tmpl.fall_s
        up = (t >= 0) & (t < rise)
        top = (t >= rise) & (t <= hold_s - fall)
        down = (t > hold_s - fall) & (t < hold_s)
        if rise > 0:
            env[up] = plateau * t[up] / rise
        env[top] = plateau
        if fall > 0:
            env[down] = plateau * (hold_s - t[down]) / fall
    return env if env.ndim else float(env)


def generate_tone(freq: float, amplitude: float, duration_s: float, fs: float,
                  mode: ToneMode) -> TerminalPair:
    """Sine-wave terminal drive for the characterization bench.

    DIFFERENTIAL splits the amplitude symmetrically (+a/2 on e1, -a/2 on
    e2); COMMON_MODE applies the full amplitude to both terminals.
    """
    if freq <= 0:
        raise ValueError(f"freq must be > 0, got {freq}")
    if freq >= fs / 2:
        raise AliasingError(f"tone at {freq} Hz is not representable at "
                            f"fs = {fs} Hz (Nyquist {fs / 2} Hz)")
    if duration_s <= 0:
        raise ValueError("duration_s must be > 0")
    n = int(round(duration_s * fs))
    t = np.arange(n) / fs
    s = np.sin(2 * np.pi * freq * t)
    if mode is ToneMode.DIFFERENTIAL:
        return TerminalPair(e1=0.5 * amplitude * s, e2=-0.5 * amplitude * s,
                            sample_rate=fs)
    return TerminalPair(e1=amplitude * s, e2=amplitude * s.copy(), sample_rate=fs)


# ---------------------------------------------------------------------------
# session generation

def _rng(seed: int, stream: int, *keys: int) -> np.random.Generator:
    """Independent deterministic substream for one signal component."""
    return np.random.default_rng([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                                  stream, *keys])


def _band_limited_carrier(n: int, fs: float, rng: np.random.Generator,
                          band=(20.0, 120.0)) -> np.ndarray:
    """Unit-RMS Gaussian carrier restricted to the sEMG band."""
    white = rng.standard_normal(n)
    hi = min(band[1], 0.48 * fs)
    sos = sig.butter(4, [band[0] / (fs / 2), hi / (fs / 2)],
                     btype="bandpass", output="sos")
    x = sig.sosfilt(sos, white)
    rms = np.sqrt(np.mean(x * x))
    return x / rms if rms > 0 else x


def _baseline_wander(n: int, fs: float, amp: float, corner: float,
                     rng: np.random.Generator) -> np.ndarray:
    if amp == 0:
        return np.zeros(n)
    sos = sig.butter(1, corner / (fs / 2), btype="lowpass", output="sos")
    x = sig.sosfilt(sos, rng.standard_normal(n))
    rms = np.sqrt(np.mean(x * x))
    return amp * x / rms if rms > 0 else x


def _motion_bursts(n: int, fs: float, noise: InterferenceModel,
                   rng: np.random.Generator) -> np.ndarray:
    out = np.zeros(n)
    if noise.motion_rate == 0 or noise.motion_amplitude == 0:
        return out
    duration = n / fs
    count = rng.poisson(noise.motion_rate * duration)
    starts = rng.uniform(0.0, duration, size=count)
    signs = rng.choice([-1.0, 1.0], size=count)
    tau_f = noise.motion_duration_s / 4.0
    tau_r = noise.motion_duration_s / 20.0
    m = int(5 * tau_f * fs)
    tb = np.arange(m) / fs
    pulse = np.exp(-tb / tau_f) - np.exp(-tb / tau_r)
    pulse /= pulse.max()
    for t0, sgn in zip(starts, signs):
        i0 = int(t0 * fs)
        seg = min(m, n - i0)
        out[i0:i0 + seg] += sgn * noise.motion_amplitude * pulse[:seg]
    return out


def _session_streams(protocol: ProtocolSpec, tmpl: ActivationTemplate,
                     noise: InterferenceModel, seed: int):
    """Differential per-channel signals, shared common-mode, label track."""
    if tmpl.channels and tmpl.channels < protocol.channels:
        raise ValueError(f"template covers {tmpl.channels} channels, protocol "
                         f"needs {protocol.channels}")
    if tmpl.rise_s + tmpl.fall_s >= protocol.hold_s:
        raise ValueError("template rise + fall must be shorter than the hold")

    fs = protocol.sample_rate
    n = protocol.session_samples
    n_ch = protocol.channels
    hold_n, rep_n = protocol.hold_samples, protocol.rep_samples

    labels = np.zeros(n, dtype=np.uint8)
    diff = np.zeros((n_ch, n), dtype=np.float64)

    # trapezoid sampled once; scaled per (gesture, rep, channel)
    t_hold = np.arange(hold_n) / fs
    unit = ActivationTemplate(
        plateaus={GestureLabel.HAND_CLOSURE: (1.0,)},
        rise_s=tmpl.rise_s, fall_s=tmpl.fall_s, jitter=0.0)
    shape = activation_envelope(GestureLabel.HAND_CLOSURE, 0, t_hold, unit,
                                protocol.hold_s)

    jit_rng = _rng(seed, 1)
    jitters = 1.0 + tmpl.jitter * jit_rng.uniform(
        -1.0, 1.0, size=(len(protocol.gestures), protocol.reps_per_gesture, n_ch))

    for ch in range(n_ch):
        carrier = _band_limited_carrier(n, fs, _rng(seed, 0, ch))
        envelope = np.zeros(n)
        pos = 0
        for gi, gesture in enumerate(protocol.gestures):
            plateau = tmpl.plateau(gesture, ch)
            for rep in range(protocol.reps_per_gesture):
                if plateau != 0.0:
                    amp = plateau * jitters[gi, rep, ch]
                    envelope[pos:pos + hold_n] = amp * shape
                if ch == 0:
                    labels[pos:pos + hold_n] = int(gesture)
                pos += rep_n
        diff[ch] = carrier * envelope
        if noise.white_noise_density > 0:
            diff[ch] += noise.white_noise_density * np.sqrt(fs / 2) * \
                _rng(seed, 3, ch).standard_normal(n)
        diff[ch] += _baseline_wander(n, fs, noise.wander_amplitude,
                                     noise.wander_corner_hz, _rng(seed, 4, ch))
        diff[ch] += _motion_bursts(n, fs, noise, _rng(seed, 5, ch))

    if noise.powerline_cm_amplitude > 0:
        t = np.arange(n) / fs
        cm = noise.powerline_cm_amplitude * np.sin(2 * np.pi * noise.powerline_freq * t)
    else:
        cm = np.zeros(n)
    return diff, cm, labels


def generate_session(protocol: ProtocolSpec, tmpl: ActivationTemplate,
                     noise: InterferenceModel, seed: int, *,
                     subject_id: str = "S1", placement_notes: str = ""):
    """Build a labeled Recording for one synthetic subject session.

    The recorded channels are the differential signals plus the common-mode
    mains residual that survives the assumed front-end rejection
    (noise.cm_rejection_db). Identical arguments give bit-identical output.
    """
    from semgkit.ingest import Recording, RecordingHeader

    diff, cm, labels = _session_streams(protocol, tmpl, noise, seed)
    residual = cm * 10.0 ** (-noise.cm_rejection_db / 20.0)
    samples = (diff + residual[None, :]).astype(np.float32)
    header = RecordingHeader(protocol=protocol, conversion=None,
                             subject_id=subject_id,
                             placement_notes=placement_notes, seed=seed)
    return Recording(header=header, samples=samples, labels=labels)


def generate_session_terminals(protocol: ProtocolSpec, tmpl: ActivationTemplate,
                               noise: InterferenceModel, seed: int,
                               channel: int) -> TerminalPair:
    """Skin-level terminal voltages for one sensor of the session.

    The mains component appears identically on both terminals (common mode);
    the myoelectric signal splits antisymmetrically. Consistent with
    generate_session for the same seed.
    """
    if channel < 0 or channel >= protocol.channels:
        raise ValueError(f"channel {channel} out of range")
    diff, cm, _ = _session_streams(protocol, tmpl, noise, seed)
    d = diff[channel]
    return TerminalPair(e1=cm + 0.5 * d, e2=cm - 0.5 * d,
                        sample_rate=protocol.sample_rate)
