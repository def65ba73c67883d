"""CMRR characterization bench.

Drives a device-under-test with differential and then common-mode tones,
estimates Welch power spectral densities at the drive frequency, and forms

    cmrr(w) = 10 * log10( PSD_d(w) / PSD_c(w) )

sweeping a 10-500 Hz grid and comparing the result against the analytic
front-end decomposition (filter mismatch, buffer gain mismatch, amplifier
floor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import signal as sig

from semgkit import afe
from semgkit.synth import TerminalPair, ToneMode, generate_tone


@dataclass(frozen=True)
class WelchParams:
    segment_s: float = 2.0
    overlap: float = 0.5
    window: str = "hann"

    def nperseg(self, fs: float) -> int:
        return int(round(self.segment_s * fs))


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided Welch PSD in V^2/Hz on a regular frequency grid."""

    freqs: np.ndarray
    density: np.ndarray
    fs: float
    params: WelchParams

    @property
    def df(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    def power_integral(self) -> float:
        """Total power: integral of the density over the grid.

        Equals the signal's mean-square value up to windowing effects.
        """
        return float(np.sum(self.density) * self.df)


def estimate_psd(x, fs: float, params: WelchParams = WelchParams()) -> PsdEstimate:
    """Welch-averaged modified periodogram, one-sided, density-normalized.

    No detrending: the integral of the density equals the mean-square power
    of the signal (within windowing error), including any DC.
    """
    x = np.asarray(x, dtype=np.float64)
    nperseg = params.nperseg(fs)
    if x.size < nperseg:
        raise ValueError(f"signal of {x.size} samples is shorter than one "
                         f"{nperseg}-sample segment")
    freqs, density = sig.welch(
        x, fs=fs, window=params.window, nperseg=nperseg,
        noverlap=int(params.overlap * nperseg), detrend=False,
        scaling="density", return_onesided=True)
    return PsdEstimate(freqs=freqs, density=density, fs=fs, params=params)


def psd_at(psd: PsdEstimate, freq: float, halfwidth: int = 3) -> float:
    """Density at freq: maximum within +/- halfwidth bins.

    The window tolerates leakage when the tone sits off the bin grid.
    """
    if freq < psd.freqs[0] or freq > psd.freqs[-1]:
        raise ValueError(f"{freq} Hz outside the PSD grid "
                         f"[{psd.freqs[0]}, {psd.freqs[-1]}] Hz")
    idx = int(np.argmin(np.abs(psd.freqs - freq)))
    lo = max(0, idx - halfwidth)
    hi = min(len(psd.freqs), idx + halfwidth + 1)
    return float(psd.density[lo:hi].max())


# ---------------------------------------------------------------------------
# bench configuration and result containers

class PointStatus(Enum):
    OK = ""
    CEILING = "ceiling"
    ERROR = "error"


class CurveSource(Enum):
    MEASURED = "measured"
    THEORY = "theory"


def default_grid(lo: float = 10.0, hi: float = 500.0, n: int = 25) -> tuple[float, ...]:
    return tuple(float(f) for f in np.logspace(math.log10(lo), math.log10(hi), n))


@dataclass(frozen=True)
class BenchConfig:
    freq_list: tuple[float, ...] = field(default_factory=default_grid)
    fs: float = 2000.0
    tone_amplitude: float = 1.0     # volts
    tone_duration_s: float = 10.0
    psd: WelchParams = WelchParams()
    peak_halfwidth_bins: int = 3
    settle_trim_s: float = 0.5      # dropped at both ends before the PSD
    ceiling_db: float = 160.0

    def __post_init__(self):
        if not self.freq_list:
            raise ValueError("freq_list must be nonempty")
        if self.tone_duration_s <= 0 or self.tone_amplitude <= 0:
            raise ValueError("tone amplitude and duration must be > 0")
        usable = self.tone_duration_s - 2 * self.settle_trim_s
        if usable * self.fs < 4 * self.psd.nperseg(self.fs):
            raise ValueError("tone too short: need at least 4 PSD segments "
                             "after settle trimming")


@dataclass(frozen=True)
class CmrrPoint:
    freq: float
    cmrr_db: float
    status: PointStatus = PointStatus.OK
    note: str = ""


@dataclass(frozen=True)
class CmrrCurve:
    points: tuple[CmrrPoint, ...]
    source: CurveSource

    def __post_init__(self):
        freqs = [p.freq for p in self.points]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("curve frequencies must be strictly increasing")

    @property
    def freqs(self) -> np.ndarray:
        return np.array([p.freq for p in self.points])

    @property
    def values_db(self) -> np.ndarray:
        return np.array([p.cmrr_db for p in self.points])

    def valid_points(self) -> list[CmrrPoint]:
        return [p for p in self.points if p.status is not PointStatus.ERROR]

    def mean_db(self) -> float:
        vals = [p.cmrr_db for p in self.valid_points()]
        if not vals:
            raise ValueError("no valid points in curve")
        return float(np.mean(vals))

    def has_errors(self) -> bool:
        return any(p.status is PointStatus.ERROR for p in self.points)

    def to_csv(self) -> str:
        lines = ["freq_hz,cmrr_db,source,flag"]
        for p in self.points:
            val = "" if math.isnan(p.cmrr_db) else f"{p.cmrr_db:.4f}"
            lines.append(f"{p.freq:.4f},{val},{self.source.value},{p.status.value}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# device-under-test adapters

class FrontEndAdapter:
    """Sensor model as a bench DUT; records Out1 - Out2.

    method 'exact' applies the continuous-time response in the frequency
    domain (no discretization warping; what the characterization runs).
    method 'bilinear' uses the discretized time-domain path.
    """

    def __init__(self, model: afe.FrontEndModel, method: str = "exact"):
        if method not in ("exact", "bilinear"):
            raise ValueError(f"unknown method {method!r}")
        self.model = model
        self.method = method

    def process(self, pair: TerminalPair) -> np.ndarray:
        if self.method == "exact":
            out = afe.apply_frontend_exact(self.model, pair)
        else:
            out = afe.apply_frontend(self.model, pair)
        return out.e1 - out.e2


class AmplifiedAdapter(FrontEndAdapter):
    """Sensor followed by a bio-potential amplifier with a CMRR floor.

    The amplifier records the sensor's differential output plus a leak of
    its common-mode output, applied in the frequency domain per the floor's
    leak response.
    """

    def __init__(self, model: afe.FrontEndModel, floor: afe.AmplifierFloor,
                 method: str = "exact"):
        super().__init__(model, method)
        self.floor = floor

    def process(self, pair: TerminalPair) -> np.ndarray:
        if self.method == "exact":
            out = afe.apply_frontend_exact(self.model, pair)
        else:
            out = afe.apply_frontend(self.model, pair)
        diff = out.e1 - out.e2
        cm = 0.5 * (out.e1 + out.e2)
        n = len(cm)
        freqs = np.fft.rfftfreq(n, d=1.0 / pair.sample_rate)
        spec = np.fft.rfft(cm) * self.floor.leak_gain(freqs)
        return diff + np.fft.irfft(spec, n)


class NoisyAdapter:
    """Wrap a DUT with additive white recording noise (seeded).

    Stateful: each process() call advances the noise stream. Clone one
    adapter per worker when parallelizing.
    """

    def __init__(self, inner, noise_density: float, seed: int):
        self.inner = inner
        self.noise_density = noise_density
        self.seed = seed
        self._calls = 0

    def process(self, pair: TerminalPair) -> np.ndarray:
        out = self.inner.process(pair)
        rng = np.random.default_rng([self.seed, 0x707E, self._calls])
        self._calls += 1
        sigma = self.noise_density * math.sqrt(pair.sample_rate / 2.0)
        return out + sigma * rng.standard_normal(len(out))


# ---------------------------------------------------------------------------
# measurement

def _trim(x: np.ndarray, fs: float, trim_s: float) -> np.ndarray:
    k = int(round(trim_s * fs))
    return x[k:len(x) - k] if k > 0 else x


def cmrr_from_outputs(out_d, out_c, fs: float, freq: float,
                      cfg: BenchConfig) -> CmrrPoint:
    """Eq-of-merit from two already-recorded output series.

    This is the entry point for characterizing recorded data rather than a
    model adapter.
    """
    psd_d = estimate_psd(out_d, fs, cfg.psd)
    psd_c = estimate_psd(out_c, fs, cfg.psd)
    pd = psd_at(psd_d, freq, cfg.peak_halfwidth_bins)
    pc = psd_at(psd_c, freq, cfg.peak_halfwidth_bins)
    if pd <= 0.0:
        return CmrrPoint(freq=freq, cmrr_db=float("nan"),
                         status=PointStatus.ERROR,
                         note="no differential response at the drive frequency")
    floor = pd * 10.0 ** (-cfg.ceiling_db / 10.0)
    if pc <= floor:
        return CmrrPoint(freq=freq, cmrr_db=cfg.ceiling_db,
                         status=PointStatus.CEILING,
                         note="common-mode fully rejected")
    return CmrrPoint(freq=freq, cmrr_db=10.0 * math.log10(pd / pc))


def measure_cmrr(dut, freq: float, cfg: BenchConfig = BenchConfig()) -> CmrrPoint:
    """Measure the DUT's CMRR at one frequency via the two-tone protocol."""
    if not 0.0 < freq < cfg.fs / 2.0:
        raise ValueError(f"drive frequency {freq} Hz outside (0, {cfg.fs / 2}) Hz")
    outs = {}
    for mode in (ToneMode.DIFFERENTIAL, ToneMode.COMMON_MODE):
        pair = generate_tone(freq, cfg.tone_amplitude, cfg.tone_duration_s,
                             cfg.fs, mode)
        outs[mode] = _trim(dut.process(pair), cfg.fs, cfg.settle_trim_s)
    return cmrr_from_outputs(outs[ToneMode.DIFFERENTIAL],
                             outs[ToneMode.COMMON_MODE], cfg.fs, freq, cfg)


def sweep(dut, cfg: BenchConfig = BenchConfig()) -> CmrrCurve:
    """Run measure_cmrr over the configured grid, ascending.

    Per-point failures (Nyquist violations, adapter errors) become
    ERROR-flagged points; the sweep itself never aborts.
    """
    points = []
    for freq in sorted(cfg.freq_list):
        if not 0.0 < freq < cfg.fs / 2.0:
            points.append(CmrrPoint(freq=freq, cmrr_db=float("nan"),
                                    status=PointStatus.ERROR,
                                    note=f"outside (0, {cfg.fs / 2:g}) Hz"))
            continue
        try:
            points.append(measure_cmrr(dut, freq, cfg))
        except Exception as exc:
            points.append(CmrrPoint(freq=freq, cmrr_db=float("nan"),
                                    status=PointStatus.ERROR, note=str(exc)))
    return CmrrCurve(points=tuple(points), source=CurveSource.MEASURED)


def theory_curve(model: afe.FrontEndModel, freqs) -> CmrrCurve:
    """Analytic model CMRR on a grid, as a curve object."""
    points = []
    for f in sorted(float(f) for f in freqs):
        val = afe.theoretical_cmrr(model, f)
        status = PointStatus.CEILING if val >= model.cmrr_ceiling_db else PointStatus.OK
        points.append(CmrrPoint(freq=f, cmrr_db=val, status=status))
    return CmrrCurve(points=tuple(points), source=CurveSource.THEORY)


# ---------------------------------------------------------------------------
# comparison against the analytic decomposition

@dataclass(frozen=True)
class ComparisonRow:
    freq: float
    measured_db: float
    composite_db: float
    components_db: dict[str, float]
    limiting: str
    delta_db: float


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]
    mean_measured_db: float
    max_abs_delta_db: float

    def limiting_at(self, freq: float) -> str:
        for row in self.rows:
            if abs(row.freq - freq) < 1e-9:
                return row.limiting
        raise KeyError(f"{freq} Hz not in the comparison grid")

    def render_text(self) -> str:
        comp_names = list(self.rows[0].components_db) if self.rows else []
        head = (["freq_hz", "measured", "composite"] + comp_names
                + ["limiting", "delta"])
        lines = ["  ".join(f"{h:>10}" for h in head)]
        for r in self.rows:
            cells = [f"{r.freq:10.2f}", f"{r.measured_db:10.2f}",
                     f"{r.composite_db:10.2f}"]
            cells += [f"{r.components_db[name]:10.2f}" for name in comp_names]
            cells += [f"{r.limiting:>10}", f"{r.delta_db:+10.2f}"]
            lines.append("  ".join(cells))
        lines.append("")
        lines.append(f"mean measured CMRR over {len(self.rows)} grid points: "
                     f"{self.mean_measured_db:.2f} dB")
        lines.append(f"max |measured - composite|: {self.max_abs_delta_db:.2f} dB")
        return "\n".join(lines) + "\n"


def compare_to_theory(measured: CmrrCurve, model: afe.FrontEndModel,
                      amplifier_floor: afe.AmplifierFloor | None = None
                      ) -> ComparisonReport:
    """Per-frequency deltas against the composite of per-stage CMRR curves.

    Components: the filter-limited model variant, the gain-mismatch-limited
    variant, and (when given) the amplifier floor. The limiting component at
    each point is the argmin.
    """
    pts = [p for p in measured.points if p.status is not PointStatus.ERROR]
    if not pts:
        raise ValueError("measured curve has no valid points to compare")
    freqs = np.array([p.freq for p in pts])
    comps: dict[str, np.ndarray] = {
        "filter": np.atleast_1d(afe.theoretical_cmrr(model.matched_gains(), freqs)),
        "gain": np.atleast_1d(afe.theoretical_cmrr(model.matched_filter(), freqs)),
    }
    if amplifier_floor is not None:
        comps["amplifier"] = np.atleast_1d(amplifier_floor.cmrr_db(freqs))
    composite = np.atleast_1d(afe.composite_cmrr(np.vstack(list(comps.values()))))
    names = list(comps)
    rows = []
    for i, p in enumerate(pts):
        per_point = {name: float(comps[name][i]) for name in names}
        limiting = min(per_point, key=per_point.get)
        rows.append(ComparisonRow(
            freq=p.freq, measured_db=p.cmrr_db, composite_db=float(composite[i]),
            components_db=per_point, limiting=limiting,
            delta_db=p.cmrr_db - float(composite[i])))
    deltas = np.array([r.delta_db for r in rows])
    return ComparisonReport(rows=tuple(rows),
                            mean_measured_db=float(np.mean([p.cmrr_db for p in pts])),
                            max_abs_delta_db=float(np.max(np.abs(deltas))))
