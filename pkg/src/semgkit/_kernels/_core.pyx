# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled streaming kernels: biquad cascade and wire-frame scanner.

Behavior is defined by semgkit._kernels._fallback; this module only makes
the per-sample and per-byte loops cheap.
"""

import numpy as np


def sos_stream(const double[:, ::1] sos, const double[::1] x, double[:, ::1] zi):
    """Filter one chunk through a biquad cascade, updating zi in place."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t ns = sos.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] y = out
    cdef Py_ssize_t i, s
    cdef double v, w
    for i in range(n):
        v = x[i]
        for s in range(ns):
            w = sos[s, 0] * v + zi[s, 0]
            zi[s, 0] = sos[s, 1] * v - sos[s, 4] * w + zi[s, 1]
            zi[s, 1] = sos[s, 2] * v - sos[s, 5] * w
            v = w
        y[i] = v
    return out


def scan_frames(const unsigned char[::1] buf, bint in_resync):
    """Scan a byte buffer for valid 16-byte frames (see fallback docstring)."""
    cdef Py_ssize_t n = buf.shape[0]
    cdef Py_ssize_t cap = n // 16 + 1
    counts = np.empty((cap, 4), dtype=np.int32)
    seqs = np.empty(cap, dtype=np.uint8)
    cdef int[:, ::1] cv = counts
    cdef unsigned char[::1] sv = seqs
    cdef Py_ssize_t pos = 0, w = 0
    cdef long ok = 0, corrupt = 0, resyncs = 0
    cdef unsigned char acc
    cdef Py_ssize_t j
    cdef int val
    while pos + 16 <= n:
        if buf[pos] != 0xA0:
            if not in_resync:
                resyncs += 1
                in_resync = True
            pos += 1
            continue
        acc = 0
        for j in range(14):
            acc ^= buf[pos + j]
        if acc == buf[pos + 14] and buf[pos + 15] == 0xC0:
            sv[w] = buf[pos + 1]
            for j in range(4):
                val = ((<int> buf[pos + 2 + 3 * j]) << 16) \
                    | ((<int> buf[pos + 3 + 3 * j]) << 8) \
                    | (<int> buf[pos + 4 + 3 * j])
                if val & 0x800000:
                    val -= 0x1000000
                cv[w, j] = val
            w += 1
            ok += 1
            pos += 16
            in_resync = False
        else:
            corrupt += 1
            if not in_resync:
                resyncs += 1
                in_resync = True
            pos += 1
    return counts[:w], seqs[:w], pos, ok, corrupt, resyncs, bool(in_resync)
