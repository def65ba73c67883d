#!/usr/bin/env python3
"""Throughput comparison: compiled kernels vs the NumPy fallback.

Times the two hot paths (biquad-cascade streaming and wire-frame scanning)
on both backends, then the full real-time chain end to end. Run:

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np
from scipy import signal as sig

from semgkit._kernels import _fallback

try:
    from semgkit._kernels import _core
except ImportError:
    _core = None

from semgkit import pipeline
from semgkit.ingest import ConversionSpec, encode_frames, volts_to_counts
from semgkit.pipeline import PipelineSettings
from semgkit.protocol import ProtocolSpec
from semgkit.realtime import RealTimeClassifier
from semgkit.synth import ActivationTemplate, InterferenceModel, generate_session

BACKENDS = [("python", _fallback)] + ([("c", _core)] if _core else [])


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_sos(repeat):
    rng = np.random.default_rng(0)
    fs = 250.0
    sos = np.ascontiguousarray(
        sig.butter(4, [15 / (fs / 2), 120 / (fs / 2)], btype="bandpass",
                   output="sos"))
    n = 250_000
    x = rng.standard_normal(n)
    chunk = 64  # realistic streaming granularity
    print(f"\nsos_stream: {sos.shape[0]} sections, {n} samples, "
          f"{chunk}-sample chunks")
    for name, impl in BACKENDS:
        zi = np.zeros((sos.shape[0], 2))

        def run():
            for i in range(0, n, chunk):
                impl.sos_stream(sos, x[i:i + chunk], zi)

        dt = timeit(run, repeat)
        print(f"  {name:>7}: {dt * 1e3:8.1f} ms  "
              f"({n / dt / 1e6:6.2f} Msamples/s)")


def bench_scan(repeat):
    rng = np.random.default_rng(1)
    n = 100_000
    counts = rng.integers(-(1 << 23), 1 << 23, size=(n, 4))
    clean = encode_frames(np.arange(n) % 256, counts)
    dirty = bytearray(clean)
    for pos in rng.integers(0, len(dirty), size=2000):
        dirty[pos] ^= 0xFF
    dirty = bytes(dirty)
    for label, buf in (("clean", clean), ("2000 corruptions", dirty)):
        print(f"\nscan_frames: {n} frames ({len(buf) / 1e6:.1f} MB), {label}")
        for name, impl in BACKENDS:
            dt = timeit(lambda: impl.scan_frames(buf, False), repeat)
            print(f"  {name:>7}: {dt * 1e3:8.1f} ms  "
                  f"({len(buf) / dt / 1e6:6.1f} MB/s)")


def bench_realtime(repeat):
    import semgkit._kernels as kernels

    protocol = ProtocolSpec(reps_per_gesture=2)
    template = ActivationTemplate.default(4)
    noise = InterferenceModel()
    settings = PipelineSettings(zero_phase=False)
    rec = generate_session(protocol, template, noise, seed=7)
    maps, labels = pipeline.session_maps(rec, settings)
    model = pipeline.train(maps, labels, sample_rate=protocol.sample_rate,
                           window_s=settings.window_s)
    conv = ConversionSpec()
    n = int(60 * protocol.sample_rate)
    stream = encode_frames(
        np.arange(n) % 256,
        volts_to_counts(rec.samples.astype(np.float64).T[:n], conv))
    chunk = 16 * 25
    print(f"\nreal-time chain: 60 s of 4-channel stream at 250 Hz, "
          f"backend in use: {kernels.BACKEND}")
    for name, impl in BACKENDS:
        kernels.sos_stream = impl.sos_stream
        kernels.scan_frames = impl.scan_frames
        try:
            def run():
                rtc = RealTimeClassifier(model, conversion=conv,
                                         settings=settings)
                for i in range(0, len(stream), chunk):
                    rtc.feed(stream[i:i + chunk])

            dt = timeit(run, repeat)
            print(f"  {name:>7}: {dt * 1e3:8.1f} ms  ({60.0 / dt:7.0f}x real time)")
        finally:
            kernels.sos_stream = kernels._impl.sos_stream
            kernels.scan_frames = kernels._impl.scan_frames


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repetitions, best-of (default 3)")
    args = parser.parse_args()
    if _core is None:
        print("note: compiled kernels not built; benchmarking the fallback only")
    bench_sos(args.repeat)
    bench_scan(args.repeat)
    bench_realtime(args.repeat)


if __name__ == "__main__":
    main()
