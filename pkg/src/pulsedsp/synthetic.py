"""Deterministic test-signal generators: sinusoids and a synthetic ECG.

The ECG is a sum of Gaussian bumps (P, Q, R, S, T per beat) on an isoelectric
baseline, in millivolts.  It is not a physiological model; it exists so the
baseline-wander demo and its tests run without any external recording.  Beat
period jitter comes from a seeded generator, so identical arguments always
produce identical samples.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Signal

__all__ = ["sinusoid", "synthetic_ecg"]

# (center offset s, width s, amplitude mV) per beat component.
_ECG_WAVES = (
    (-0.200, 0.025, 0.15),   # P
    (-0.030, 0.010, -0.10),  # Q
    (0.000, 0.012, 1.00),    # R
    (0.030, 0.010, -0.15),   # S
    (0.220, 0.045, 0.30),    # T
)


def sinusoid(
    duration: float,
    *,
    amplitude: float = 1.0,
    frequency: float = 1.0,
    phase: float = 0.0,
    start: float = 0.0,
    sample_interval: float = 1e-3,
) -> Signal:
    """``amplitude * sin(2*pi*frequency*t + phase)`` sampled over ``duration``."""
    n = int(round(duration / sample_interval)) + 1
    t = start + sample_interval * np.arange(n)
    samples = amplitude * np.sin(2.0 * math.pi * frequency * t + phase)
    return Signal(start_time=start, sample_interval=sample_interval, samples=samples)


def synthetic_ecg(
    duration: float,
    *,
    sample_interval: float = 1.0 / 360.0,
    heart_rate: float = 75.0,
    rr_jitter: float = 0.03,
    seed: int = 0,
    start: float = 0.0,
) -> Signal:
    """Synthetic ECG-like waveform in millivolts.

    Beats repeat at ``heart_rate`` beats per minute with a seeded fractional
    jitter on each RR interval; every beat contributes the five Gaussian
    bumps of a stylized PQRST complex.
    """
    n = int(round(duration / sample_interval)) + 1
    t = start + sample_interval * np.arange(n)
    samples = np.zeros(n)

    rng = np.random.default_rng(seed)
    period = 60.0 / heart_rate
    beat = start + 0.5 * period
    while beat < start + duration + period:
        for offset, width, amplitude in _ECG_WAVES:
            center = beat + offset
            local = np.abs(t - center) < 6 * width
            samples[local] += amplitude * np.exp(
                -0.5 * ((t[local] - center) / width) ** 2
            )
        beat += period * (1.0 + rr_jitter * float(rng.standard_normal()))
    return Signal(start_time=start, sample_interval=sample_interval, samples=samples)
