"""Value types for pulse trains and sampled signals, plus the basic train
operations: the leak factor, the identity (reference) train, instantaneous
amplitude decoding, and polarity negation.

A biphasic pulse train carries amplitude information purely in the timing of
its events; each event only contributes a polarity of +1 or -1.  Between two
consecutive pulses the leaky area under the source signal equals the
converter threshold ``theta``, which makes the inter-pulse interval the
fundamental quantum all operators in this package work with.

All types are immutable after construction (arrays are frozen), so values can
be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import NumericDomainError, PreconditionError

__all__ = [
    "IfcParams",
    "PulseEvent",
    "PulseTrain",
    "Signal",
    "StepFunction",
    "leak_factor",
    "reference_train",
    "instantaneous_amplitude",
    "negate",
]


@dataclass(frozen=True)
class IfcParams:
    """One conversion regime of the integrate-and-fire converter.

    Parameters
    ----------
    theta : float
        Threshold, in units of signal amplitude times seconds (area).
        Must be positive.
    alpha : float
        Leak rate of the integrator in 1/seconds.  ``alpha = 0`` is the
        ideal (non-leaky) integrator.  Must be non-negative.
    """

    theta: float
    alpha: float = 0.0

    def __post_init__(self):
        if not self.theta > 0:
            raise PreconditionError(f"theta must be > 0, got {self.theta}")
        if self.alpha < 0:
            raise PreconditionError(f"alpha must be >= 0, got {self.alpha}")


class PulseEvent(NamedTuple):
    """A single timed pulse with polarity +1 or -1."""

    time: float
    polarity: int


def _frozen_array(values, dtype):
    # Own a copy so freezing never mutates caller-held array flags.
    arr = np.atleast_1d(np.array(values, dtype=dtype))
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PulseTrain:
    """An ordered sequence of signed pulse events under one parameter set.

    ``origin`` is the time of the virtual zeroth pulse: the first inter-pulse
    interval is measured from it, and the integrator is taken to start from
    zero state there.  Event times must be strictly increasing and strictly
    greater than the origin.

    The event data is stored as two parallel read-only arrays (``times`` and
    ``polarities``); the ``events`` property offers tuple access.
    """

    params: IfcParams
    origin: float
    times: np.ndarray
    polarities: np.ndarray

    def __post_init__(self):
        times = _frozen_array(self.times, np.float64)
        pols = _frozen_array(self.polarities, np.int64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "polarities", pols)
        if times.shape != pols.shape:
            raise PreconditionError("times and polarities must have equal length")
        if times.size:
            if np.any(np.diff(times) <= 0):
                raise PreconditionError("event times must be strictly increasing")
            if not times[0] > self.origin:
                raise PreconditionError("first event time must exceed the origin")
        if pols.size and not np.all(np.abs(pols) == 1):
            raise PreconditionError("polarities must be exactly +1 or -1")

    @classmethod
    def from_events(cls, params, origin, events) -> "PulseTrain":
        """Build a train from an iterable of ``(time, polarity)`` pairs."""
        events = list(events)
        times = np.array([e[0] for e in events], dtype=np.float64)
        pols = np.array([e[1] for e in events], dtype=np.int64)
        return cls(params, origin, times, pols)

    @classmethod
    def empty(cls, params, origin=0.0) -> "PulseTrain":
        return cls(params, origin, np.empty(0, np.float64), np.empty(0, np.int64))

    @property
    def events(self) -> list[PulseEvent]:
        return [PulseEvent(float(t), int(p)) for t, p in zip(self.times, self.polarities)]

    @property
    def end(self) -> float:
        """Time of the last pulse, or the origin for an empty train."""
        return float(self.times[-1]) if self.times.size else self.origin

    def __len__(self) -> int:
        return int(self.times.size)

    def __iter__(self) -> Iterator[PulseEvent]:
        return iter(self.events)


@dataclass(frozen=True)
class Signal:
    """A uniformly sampled real-valued waveform.

    Used as encoder input, as oracle ground truth, and as reconstruction
    output.  ``samples[i]`` is the amplitude at ``start_time + i *
    sample_interval``.
    """

    start_time: float
    sample_interval: float
    samples: np.ndarray

    def __post_init__(self):
        samples = _frozen_array(self.samples, np.float64)
        object.__setattr__(self, "samples", samples)
        if not self.sample_interval > 0:
            raise PreconditionError("sample_interval must be > 0")
        if samples.size == 0:
            raise PreconditionError("samples must be non-empty")

    @property
    def times(self) -> np.ndarray:
        return self.start_time + self.sample_interval * np.arange(self.samples.size)

    @property
    def end_time(self) -> float:
        return self.start_time + self.sample_interval * (self.samples.size - 1)

    @property
    def duration(self) -> float:
        return self.sample_interval * (self.samples.size - 1)

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True)
class StepFunction:
    """Right-closed step series: ``values[i]`` holds on ``(edges[i], edges[i+1]]``.

    Iterating yields ``((t_lo, t_hi), amplitude, polarity)`` per interval.
    """

    edges: np.ndarray
    values: np.ndarray
    polarities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", _frozen_array(self.edges, np.float64))
        object.__setattr__(self, "values", _frozen_array(self.values, np.float64))
        object.__setattr__(self, "polarities", _frozen_array(self.polarities, np.int64))

    def __len__(self) -> int:
        return int(self.values.size)

    def __iter__(self):
        for i in range(len(self)):
            yield (
                (float(self.edges[i]), float(self.edges[i + 1])),
                float(self.values[i]),
                int(self.polarities[i]),
            )

    def sample(self, times, fill=0.0):
        """Sample the step function at ``times``.

        A time exactly at an interval's right edge takes that interval's
        value (intervals are closed on the right).  Times outside the support
        get ``fill``.  Returns ``(values, in_support_mask)``.
        """
        times = np.asarray(times, dtype=np.float64)
        idx = np.searchsorted(self.edges, times, side="left") - 1
        inside = (idx >= 0) & (idx < len(self)) & (times > self.edges[0])
        out = np.full(times.shape, fill, dtype=np.float64)
        out[inside] = self.values[idx[inside]]
        return out, inside


def leak_factor(alpha, m):
    """Kernel-integral factor ``1 - exp(-alpha * m)``.

    This factor appears in every pulse-domain formula: the leaky area of a
    constant ``c`` accumulated over an interval of length ``m`` is
    ``c * leak_factor(alpha, m) / alpha``.  For ``alpha = 0`` the function
    returns 0; callers handle the non-leaky case with dedicated closed forms
    (areas become ``c * m``) rather than a 0/0 limit.

    Accepts scalars or arrays; ``m`` must be non-negative.
    """
    m_arr = np.asarray(m)
    if np.any(m_arr < 0):
        raise PreconditionError("leak_factor requires m >= 0")
    out = -np.expm1(-alpha * m_arr)
    return float(out) if np.isscalar(m) else out


def reference_period(params: IfcParams) -> float:
    """Inter-pulse interval of the train encoding the constant 1."""
    theta, alpha = params.theta, params.alpha
    if alpha == 0.0:
        return theta
    if theta * alpha >= 1.0:
        raise NumericDomainError(
            f"theta*alpha = {theta * alpha} >= 1: a constant 1 can never "
            "accumulate area theta under this leak"
        )
    return -math.log1p(-theta * alpha) / alpha


def reference_train(params: IfcParams, t_start: float, t_end: float) -> PulseTrain:
    """Identity (reference) pulse train: the encoding of the constant 1.

    The train is periodic with positive polarity; its period solves
    ``theta = leak_factor(alpha, period) / alpha`` (``period = theta`` when
    ``alpha = 0``).  Events cover ``(t_start, t_end]`` and the origin is
    ``t_start``.

    Raises
    ------
    NumericDomainError
        If ``theta * alpha >= 1`` (leak ceiling).
    PreconditionError
        If ``t_end <= t_start``.
    """
    if not t_end > t_start:
        raise PreconditionError("t_end must exceed t_start")
    period = reference_period(params)
    # Tolerate one part in 1e12 so commensurate spans keep their last pulse.
    count = int(math.floor((t_end - t_start) / period + 1e-12))
    times = t_start + period * np.arange(1, count + 1)
    pols = np.ones(count, dtype=np.int64)
    return PulseTrain(params, t_start, times, pols)


def instantaneous_amplitude(train: PulseTrain) -> StepFunction:
    """Per-interval amplitude estimate decoded from inter-pulse timing.

    For each interval ``(t_k, t_k+1)`` (the first one starts at the origin)
    the magnitude is ``theta / dt`` for ``alpha = 0`` and
    ``theta * alpha / (1 - exp(-alpha * dt))`` otherwise, signed by the
    polarity of the pulse that closes the interval.

    Raises
    ------
    PreconditionError
        If the train has no events.
    """
    if len(train) == 0:
        raise PreconditionError("train must have at least one event")
    theta, alpha = train.params.theta, train.params.alpha
    edges = np.concatenate(([train.origin], train.times))
    widths = np.diff(edges)
    if alpha == 0.0:
        mags = theta / widths
    else:
        mags = theta * alpha / (-np.expm1(-alpha * widths))
    values = mags * train.polarities
    return StepFunction(edges, values, train.polarities)


def negate(train: PulseTrain) -> PulseTrain:
    """Flip every polarity, keeping timings identical (an exact involution)."""
    return PulseTrain(train.params, train.origin, train.times, -train.polarities)
