"""Parametric electrical model of the active bipolar sensor.

Signal chain per path: electrode-skin interface, TVS-protected unity-gain
input buffer, one side of the differential high-pass filter, output buffer.
The unity-gain buffers isolate the three RC node groups, so the nodal
solution of the two-path network factorizes into a per-path product of
first-order stages; mismatches between the paths convert common-mode input
into differential output, which is what bounds the CMRR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal as sig

from semgkit.synth import TerminalPair


class ConfigError(ValueError):
    """Model or run configuration is unusable."""


@dataclass(frozen=True)
class ElectrodeSkinInterface:
    """Dry-contact interface: series resistance with a parallel capacitance."""

    r_series: float = 1.0e6   # ohms; dry contacts run 100 kOhm to a few MOhm
    c_parallel: float = 0.0   # farads

    def __post_init__(self):
        if self.r_series <= 0:
            raise ValueError("r_series must be > 0")
        if self.c_parallel < 0:
            raise ValueError("c_parallel must be >= 0")

    def impedance(self, s):
        """Complex impedance r || c at s = j*2*pi*f."""
        return self.r_series / (1.0 + s * self.r_series * self.c_parallel)


@dataclass(frozen=True)
class BufferStage:
    gain: float = 1.0
    input_resistance: float = 1.0e13      # ohms
    input_capacitance: float = 4.0e-12    # farads
    bias_current: float = 2.0e-12         # amperes
    current_noise_density: float = 0.8e-15  # A / sqrt(Hz)

    def __post_init__(self):
        if not 0.99 <= self.gain <= 1.01:
            raise ValueError(f"buffer gain {self.gain} outside [0.99, 1.01]")
        if self.input_resistance <= 0:
            raise ValueError("input_resistance must be > 0")
        for name in ("input_capacitance", "bias_current", "current_noise_density"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def ideal(cls) -> "BufferStage":
        return cls(gain=1.0, input_resistance=math.inf, input_capacitance=0.0,
                   bias_current=0.0, current_noise_density=0.0)


@dataclass(frozen=True)
class TvsStage:
    """Transient protection, modeled as added line capacitance at the input."""

    line_capacitance: float = 0.7e-12

    def __post_init__(self):
        if self.line_capacitance < 0:
            raise ValueError("line_capacitance must be >= 0")


@dataclass(frozen=True)
class DiffHighPass:
    """Two-path series-C / bias-R high-pass with realized per-side values.

    The nominal capacitance realizes the requested differential cutoff
    against the bias resistance. rc_mismatch is the relative difference of
    the two RC products; by default it is split symmetrically so the
    differential cutoff stays at nominal. Path 1 takes the lower product.
    """

    cutoff: float = 15.0
    bias_resistance: float = 1.0e7
    rc_mismatch: float = 0.002
    component_tolerance: float = 0.01
    r1: float = field(default=0.0)
    c1: float = field(default=0.0)
    r2: float = field(default=0.0)
    c2: float = field(default=0.0)

    def __post_init__(self):
        if self.cutoff <= 0 or self.bias_resistance <= 0:
            raise ValueError("cutoff and bias_resistance must be > 0")
        if self.rc_mismatch < 0 or self.component_tolerance < 0:
            raise ValueError("mismatch and tolerance must be >= 0")
        c_nom = 1.0 / (2.0 * math.pi * self.bias_resistance * self.cutoff)
        if self.r1 == 0.0:
            k = self.rc_mismatch / 4.0
            object.__setattr__(self, "r1", self.bias_resistance * (1.0 - k))
            object.__setattr__(self, "c1", c_nom * (1.0 - k))
            object.__setattr__(self, "r2", self.bias_resistance * (1.0 + k))
            object.__setattr__(self, "c2", c_nom * (1.0 + k))
        fd = self.differential_cutoff
        tol = max(2.0 * self.component_tolerance, 1e-9)
        if abs(fd - self.cutoff) / self.cutoff > tol:
            raise ValueError(
                f"realized differential cutoff {fd:.3f} Hz deviates more than "
                f"{tol:.3%} from nominal {self.cutoff} Hz")

    @property
    def capacitance(self) -> float:
        """Nominal series capacitance for the requested cutoff."""
        return 1.0 / (2.0 * math.pi * self.bias_resistance * self.cutoff)

    @property
    def differential_cutoff(self) -> float:
        """Pole of the averaged path response (geometric mean of the sides)."""
        f1 = 1.0 / (2.0 * math.pi * self.r1 * self.c1)
        f2 = 1.0 / (2.0 * math.pi * self.r2 * self.c2)
        return math.sqrt(f1 * f2)

    @classmethod
    def ideal(cls, cutoff: float = 15.0, bias_resistance: float = 1.0e7) -> "DiffHighPass":
        return cls(cutoff=cutoff, bias_resistance=bias_resistance, rc_mismatch=0.0)

    @classmethod
    def sampled(cls, cutoff: float = 15.0, bias_resistance: float = 1.0e7,
                tolerance: float = 0.01, seed: int = 0,
                worst_case: bool = False) -> "DiffHighPass":
        """Draw per-side part values from a tolerance band.

        Side RC products are recentred so their geometric mean realizes the
        nominal cutoff (what trimming achieves in practice); the drawn
        mismatch between the sides is preserved. worst_case puts every part
        at an extreme of the band.
        """
        if worst_case:
            d1, d2, d3, d4 = tolerance, tolerance, -tolerance, -tolerance
        else:
            rng = np.random.default_rng([seed, 0xD1FF])
            d1, d2, d3, d4 = rng.uniform(-tolerance, tolerance, size=4)
        c_nom = 1.0 / (2.0 * math.pi * bias_resistance * cutoff)
        r1 = bias_resistance * (1 + d1)
        c1 = c_nom * (1 + d2)
        r2 = bias_resistance * (1 + d3)
        c2 = c_nom * (1 + d4)
        center = math.sqrt((r1 * c1) * (r2 * c2))
        scale = (bias_resistance * c_nom) / center
        mismatch = abs(r2 * c2 - r1 * c1) / center
        return cls(cutoff=cutoff, bias_resistance=bias_resistance,
                   rc_mismatch=mismatch, component_tolerance=tolerance,
                   r1=r1 * scale, c1=c1, r2=r2 * scale, c2=c2)


@dataclass(frozen=True)
class AmplifierFloor:
    """CMRR limit of the downstream bio-potential amplifier.

    Flat at floor_db up to the corner, then first-order roll-off:
    cmrr(f) = floor_db - 10*log10(1 + (f/corner)^2).
    """

    floor_db: float = 72.0
    corner_hz: float = 50.0

    def __post_init__(self):
        if self.floor_db <= 0 or self.corner_hz <= 0:
            raise ValueError("floor_db and corner_hz must be > 0")

    def cmrr_db(self, freq):
        f = np.asarray(freq, dtype=np.float64)
        out = self.floor_db - 10.0 * np.log10(1.0 + (f / self.corner_hz) ** 2)
        return out if out.ndim else float(out)

    def leak_gain(self, freq):
        """Complex common-mode to recorded-output leak, consistent with cmrr_db."""
        f = np.asarray(freq, dtype=np.float64)
        l0 = 10.0 ** (-self.floor_db / 20.0)
        out = l0 * (1.0 + 1j * f / self.corner_hz)
        return out if out.ndim else complex(out)


@dataclass(frozen=True)
class TransferResponse:
    freq: float
    gain: complex

    @property
    def magnitude(self) -> float:
        return abs(self.gain)

    @property
    def phase_rad(self) -> float:
        return math.atan2(self.gain.imag, self.gain.real)


@dataclass(frozen=True)
class FrontEndModel:
    """Complete two-path sensor model. Immutable; all operations are pure."""

    electrodes: tuple[ElectrodeSkinInterface, ElectrodeSkinInterface] = (
        ElectrodeSkinInterface(), ElectrodeSkinInterface())
    input_buffers: tuple[BufferStage, BufferStage] = (
        BufferStage(gain=0.99995), BufferStage(gain=1.00005))
    tvs: TvsStage = TvsStage()
    filter: DiffHighPass = DiffHighPass()
    output_buffers: tuple[BufferStage, BufferStage] = (
        BufferStage(), BufferStage())
    cmrr_ceiling_db: float = 160.0

    @classmethod
    def default(cls) -> "FrontEndModel":
        """Calibrated defaults; see the CMRR calibration notes in the README."""
        return cls()

    @classmethod
    def ideal(cls) -> "FrontEndModel":
        """Perfectly matched, unloaded model: textbook first-order response."""
        ideal_el = ElectrodeSkinInterface(r_series=1.0, c_parallel=0.0)
        return cls(electrodes=(ideal_el, ideal_el),
                   input_buffers=(BufferStage.ideal(), BufferStage.ideal()),
                   tvs=TvsStage(line_capacitance=0.0),
                   filter=DiffHighPass.ideal(),
                   output_buffers=(BufferStage.ideal(), BufferStage.ideal()))

    def matched_gains(self) -> "FrontEndModel":
        """Copy with buffer gain mismatch removed (filter-limited variant)."""
        gin = 0.5 * (self.input_buffers[0].gain + self.input_buffers[1].gain)
        gout = 0.5 * (self.output_buffers[0].gain + self.output_buffers[1].gain)
        return replace(
            self,
            input_buffers=(replace(self.input_buffers[0], gain=gin),
                           replace(self.input_buffers[1], gain=gin)),
            output_buffers=(replace(self.output_buffers[0], gain=gout),
                            replace(self.output_buffers[1], gain=gout)))

    def matched_filter(self) -> "FrontEndModel":
        """Copy with filter mismatch removed (gain-mismatch-limited variant)."""
        return replace(self, filter=replace(
            self.filter, rc_mismatch=0.0,
            r1=self.filter.bias_resistance, c1=self.filter.capacitance,
            r2=self.filter.bias_resistance, c2=self.filter.capacitance))

    # -- frequency-domain -------------------------------------------------

    def _filter_stage(self, side: int):
        """(series C, node R, node shunt C) for one filter side with its load."""
        flt = self.filter
        out_buf = self.output_buffers[side]
        r_side = flt.r1 if side == 0 else flt.r2
        c_side = flt.c1 if side == 0 else flt.c2
        r_in = out_buf.input_resistance
        r_node = r_side if math.isinf(r_in) else 1.0 / (1.0 / r_side + 1.0 / r_in)
        return c_side, r_node, out_buf.input_capacitance

    def path_gain(self, freq, side: int):
        """Complex gain of one path at freq (scalar or array), input to Out."""
        s = 2j * np.pi * np.asarray(freq, dtype=np.float64)
        el = self.electrodes[side]
        in_buf = self.input_buffers[side]
        c_shunt = in_buf.input_capacitance + self.tvs.line_capacitance
        g_in = 0.0 if math.isinf(in_buf.input_resistance) else 1.0 / in_buf.input_resistance
        y_in = g_in + s * c_shunt
        divider = 1.0 / (1.0 + el.impedance(s) * y_in)
        c_ser, r_node, c_load = self._filter_stage(side)
        hp = (s * c_ser * r_node) / (1.0 + s * r_node * (c_ser + c_load))
        return divider * in_buf.gain * hp * self.output_buffers[side].gain

    def transfer_pair(self, freq):
        """(differential gain, common-mode gain) at freq; array-friendly."""
        h1 = self.path_gain(freq, 0)
        h2 = self.path_gain(freq, 1)
        return 0.5 * (h1 + h2), h1 - h2


def differential_transfer(model: FrontEndModel, freq: float) -> TransferResponse:
    """Gain from differential input (e1 - e2) to differential output."""
    if freq <= 0:
        raise ValueError("freq must be > 0")
    hd, _ = model.transfer_pair(freq)
    return TransferResponse(freq=freq, gain=complex(hd))


def common_mode_transfer(model: FrontEndModel, freq: float) -> TransferResponse:
    """Gain from common-mode input (e1 = e2) to differential output.

    Exactly zero when the two paths match.
    """
    if freq <= 0:
        raise ValueError("freq must be > 0")
    _, hc = model.transfer_pair(freq)
    return TransferResponse(freq=freq, gain=complex(hc))


def theoretical_cmrr(model: FrontEndModel, freq):
    """20*log10(|Hd| / |Hc|) in dB, clipped at the model's ceiling.

    Accepts scalar or array freq.
    """
    f = np.asarray(freq, dtype=np.float64)
    if np.any(f <= 0):
        raise ValueError("freq must be > 0")
    hd, hc = model.transfer_pair(f)
    mag_d, mag_c = np.abs(hd), np.abs(hc)
    ceiling = model.cmrr_ceiling_db
    limit = mag_d * 10.0 ** (-ceiling / 20.0)
    with np.errstate(divide="ignore"):
        out = np.where(mag_c <= limit, ceiling,
                       20.0 * np.log10(mag_d / np.maximum(mag_c, 1e-300)))
    return out if out.ndim else float(out)


def composite_cmrr(components_db) -> float:
    """Combine per-stage CMRRs by adding common-mode leakage powers.

    Accepts a sequence of dB values (or of equal-length arrays for a grid);
    the result never exceeds the smallest component.
    """
    comp = np.asarray(components_db, dtype=np.float64)
    if comp.size == 0:
        raise ValueError("need at least one component CMRR")
    out = -10.0 * np.log10(np.sum(10.0 ** (-comp / 10.0), axis=0))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# time-domain application

def bias_offsets(model: FrontEndModel) -> dict:
    """Static offsets from bias currents (Ohm's law per stage).

    'input' offsets appear at the input-buffer nodes and are removed by the
    high-pass; 'output' offsets appear at the filter nodes and persist at
    Out1/Out2.
    """
    inputs = []
    outputs = []
    for side in (0, 1):
        el = model.electrodes[side]
        in_buf = model.input_buffers[side]
        r_src = el.r_series if math.isinf(in_buf.input_resistance) else \
            1.0 / (1.0 / el.r_series + 1.0 / in_buf.input_resistance)
        inputs.append(in_buf.bias_current * r_src)
        _, r_node, _ = model._filter_stage(side)
        outputs.append(model.output_buffers[side].bias_current * r_node)
    return {"input": tuple(inputs), "output": tuple(outputs)}


def _bilinear_path_sos(model: FrontEndModel, side: int, fs: float) -> np.ndarray:
    """Discretize one path (divider stage x filter stage) with prewarping
    at the filter cutoff."""
    el = model.electrodes[side]
    in_buf = model.input_buffers[side]
    ct = in_buf.input_capacitance + model.tvs.line_capacitance
    g_in = 0.0 if math.isinf(in_buf.input_resistance) else 1.0 / in_buf.input_resistance
    r, c = el.r_series, el.c_parallel
    # divider: (1 + s r c) / ((1 + r/Rin) + s r (c + ct))
    b_div = [r * c, 1.0]
    a_div = [r * (c + ct), 1.0 + r * g_in]
    c_ser, r_node, c_load = model._filter_stage(side)
    b_hp = [c_ser * r_node, 0.0]
    a_hp = [r_node * (c_ser + c_load), 1.0]
    b = np.polymul(b_div, b_hp)
    a = np.polymul(a_div, a_hp)
    w0 = 2.0 * math.pi * model.filter.cutoff
    fs_warp = w0 / (2.0 * math.tan(w0 / (2.0 * fs)))
    bz, az = sig.bilinear(b, a, fs=fs_warp)
    return sig.tf2sos(bz, az)


def apply_frontend(model: FrontEndModel, pair: TerminalPair,
                   noise_seed: int | None = None) -> TerminalPair:
    """Run terminal voltages through the sensor in the time domain.

    Each path is the bilinear discretization (prewarped at the filter
    cutoff) of its realized transfer, plus the static bias offsets. With
    noise_seed set, input-buffer current noise shaped by the electrode
    impedance is synthesized and added.
    """
    fs = pair.sample_rate
    if fs < 4.0 * model.filter.cutoff:
        raise ConfigError(f"fs = {fs} Hz too low for the {model.filter.cutoff} "
                          "Hz high-pass (need fs >= 4x cutoff)")
    offsets = bias_offsets(model)
    outs = []
    for side, e in enumerate((pair.e1, pair.e2)):
        sos = _bilinear_path_sos(model, side, fs)
        x = e + offsets["input"][side]
        if noise_seed is not None:
            x = x + _input_current_noise(model, side, len(e), fs, noise_seed)
        g = model.input_buffers[side].gain * model.output_buffers[side].gain
        y = g * sig.sosfilt(sos, x)
        y += offsets["output"][side] * model.output_buffers[side].gain
        outs.append(y)
    return TerminalPair(e1=outs[0], e2=outs[1], sample_rate=fs)


def apply_frontend_exact(model: FrontEndModel, pair: TerminalPair) -> TerminalPair:
    """Apply the exact continuous-time response in the frequency domain.

    Free of bilinear warping, so the steady-state response matches the
    analytic transfer at every bin; the characterization bench uses this
    route. Circular-convolution artifacts are confined to roughly one
    impulse-response length at each end of the series.
    """
    fs = pair.sample_rate
    n = len(pair)
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    offsets = bias_offsets(model)
    outs = []
    for side, e in enumerate((pair.e1, pair.e2)):
        h = model.path_gain(freqs[1:], side)
        spec = np.fft.rfft(e)
        spec[0] = 0.0  # high-pass: no DC through the signal path
        spec[1:] *= h
        y = np.fft.irfft(spec, n)
        y += offsets["output"][side] * model.output_buffers[side].gain
        outs.append(y)
    return TerminalPair(e1=outs[0], e2=outs[1], sample_rate=fs)


def _input_current_noise(model: FrontEndModel, side: int, n: int, fs: float,
                         seed: int) -> np.ndarray:
    """Buffer current noise times the electrode source impedance."""
    in_buf = model.input_buffers[side]
    density = in_buf.current_noise_density
    if density == 0.0:
        return np.zeros(n)
    rng = np.random.default_rng([seed, 0xB0FF, side])
    i_n = density * math.sqrt(fs / 2.0) * rng.standard_normal(n)
    el = model.electrodes[side]
    if el.c_parallel == 0.0:
        return i_n * el.r_series
    # one-pole shaping: Z(s) = r / (1 + s r c)
    bz, az = sig.bilinear([el.r_series], [el.r_series * el.c_parallel, 1.0], fs=fs)
    return sig.lfilter(bz, az, i_n)


# ---------------------------------------------------------------------------
# plain-text model configuration (key = value, SI units)

_CONFIG_KEYS = {
    "electrode_r1": ("electrodes", 0, "r_series"),
    "electrode_r2": ("electrodes", 1, "r_series"),
    "electrode_c1": ("electrodes", 0, "c_parallel"),
    "electrode_c2": ("electrodes", 1, "c_parallel"),
    "buffer_gain_q1": ("input_buffers", 0, "gain"),
    "buffer_gain_q2": ("input_buffers", 1, "gain"),
    "buffer_gain_q3": ("output_buffers", 0, "gain"),
    "buffer_gain_q4": ("output_buffers", 1, "gain"),
    "buffer_input_resistance": ("buffers", None, "input_resistance"),
    "buffer_input_capacitance": ("buffers", None, "input_capacitance"),
    "buffer_bias_current": ("buffers", None, "bias_current"),
    "buffer_current_noise_density": ("buffers", None, "current_noise_density"),
    "tvs_line_capacitance": ("tvs", None, "line_capacitance"),
    "filter_cutoff": ("filter", None, "cutoff"),
    "filter_bias_resistance": ("filter", None, "bias_resistance"),
    "filter_rc_mismatch": ("filter", None, "rc_mismatch"),
    "filter_component_tolerance": ("filter", None, "component_tolerance"),
    "amplifier_cmrr_floor_db": ("amplifier", None, "floor_db"),
    "amplifier_corner_hz": ("amplifier", None, "corner_hz"),
    "cmrr_ceiling_db": ("model", None, "cmrr_ceiling_db"),
}


def parse_config_text(text: str) -> dict[str, float]:
    """Parse 'key = value' lines; '#' starts a comment. Unknown keys raise."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = float(val.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: "
                              f"{val.strip()!r}") from exc
    return values


def load_config(path) -> tuple[FrontEndModel, AmplifierFloor]:
    """Build (FrontEndModel, AmplifierFloor) from a key=value file.

    Omitted keys keep the calibrated defaults.
    """
    with open(path, "r", encoding="utf-8") as f:
        values = parse_config_text(f.read())
    return build_from_config(values)


def build_from_config(values: dict[str, float]) -> tuple[FrontEndModel, AmplifierFloor]:
    base = FrontEndModel.default()

    def pick(key, fallback):
        return values.get(key, fallback)

    buf_common = dict(
        input_resistance=pick("buffer_input_resistance",
                              base.input_buffers[0].input_resistance),
        input_capacitance=pick("buffer_input_capacitance",
                               base.input_buffers[0].input_capacitance),
        bias_current=pick("buffer_bias_current", base.input_buffers[0].bias_current),
        current_noise_density=pick("buffer_current_noise_density",
                                   base.input_buffers[0].current_noise_density),
    )
    electrodes = tuple(
        ElectrodeSkinInterface(
            r_series=pick(f"electrode_r{i + 1}", base.electrodes[i].r_series),
            c_parallel=pick(f"electrode_c{i + 1}", base.electrodes[i].c_parallel))
        for i in (0, 1))
    input_buffers = tuple(
        BufferStage(gain=pick(f"buffer_gain_q{i + 1}", base.input_buffers[i].gain),
                    **buf_common)
        for i in (0, 1))
    output_buffers = tuple(
        BufferStage(gain=pick(f"buffer_gain_q{i + 3}", base.output_buffers[i].gain),
                    **buf_common)
        for i in (0, 1))
    flt = DiffHighPass(
        cutoff=pick("filter_cutoff", base.filter.cutoff),
        bias_resistance=pick("filter_bias_resistance", base.filter.bias_resistance),
        rc_mismatch=pick("filter_rc_mismatch", base.filter.rc_mismatch),
        component_tolerance=pick("filter_component_tolerance",
                                 base.filter.component_tolerance))
    model = FrontEndModel(
        electrodes=electrodes, input_buffers=input_buffers,
        tvs=TvsStage(line_capacitance=pick("tvs_line_capacitance",
                                           base.tvs.line_capacitance)),
        filter=flt, output_buffers=output_buffers,
        cmrr_ceiling_db=pick("cmrr_ceiling_db", base.cmrr_ceiling_db))
    floor = AmplifierFloor(floor_db=pick("amplifier_cmrr_floor_db", 72.0),
                           corner_hz=pick("amplifier_corner_hz", 50.0))
    return model, floor


def default_config_text() -> str:
    """Render the calibrated defaults as a config file template."""
    model, floor = FrontEndModel.default(), AmplifierFloor()
    lines = [
        "# Active sensor model parameters (SI units).",
        f"electrode_r1 = {model.electrodes[0].r_series}",
        f"electrode_r2 = {model.electrodes[1].r_series}",
        f"electrode_c1 = {model.electrodes[0].c_parallel}",
        f"electrode_c2 = {model.electrodes[1].c_parallel}",
        f"buffer_gain_q1 = {model.input_buffers[0].gain}",
        f"buffer_gain_q2 = {model.input_buffers[1].gain}",
        f"buffer_gain_q3 = {model.output_buffers[0].gain}",
        f"buffer_gain_q4 = {model.output_buffers[1].gain}",
        f"buffer_input_resistance = {model.input_buffers[0].input_resistance}",
        f"buffer_input_capacitance = {model.input_buffers[0].input_capacitance}",
        f"buffer_bias_current = {model.input_buffers[0].bias_current}",
        f"buffer_current_noise_density = {model.input_buffers[0].current_noise_density}",
        f"tvs_line_capacitance = {model.tvs.line_capacitance}",
        f"filter_cutoff = {model.filter.cutoff}",
        f"filter_bias_resistance = {model.filter.bias_resistance}",
        f"filter_rc_mismatch = {model.filter.rc_mismatch}",
        f"filter_component_tolerance = {model.filter.component_tolerance}",
        f"amplifier_cmrr_floor_db = {floor.floor_db}",
        f"amplifier_corner_hz = {floor.corner_hz}",
        f"cmrr_ceiling_db = {model.cmrr_ceiling_db}",
    ]
    return "\n".join(lines) + "\n"
