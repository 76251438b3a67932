"""Convolution of two pulse trains by event-aligned shift scheduling.

The second operand's timeline is reversed and slid across the first in
shifts: each shift advances the reversed train by exactly the distance that
aligns its next pulse with some pulse of the first operand, so the offset
sequence is the sorted set of pairwise time sums.  At every shift the overlap
of the two supports is tiled with computation windows (between consecutive
event times of both operands and the reference train), each window
contributes a signed area increment, and whole units of accumulated area are
emitted as output pulses on the shift axis.

The emission time of a pulse is the area-weighted combination of the
per-window nominal output intervals, added to the last emitted time plus the
carried excess time, and excess area/time propagate across shifts exactly as
in the arithmetic operators.  Output pulse times therefore live on the shift
axis, whose origin is the sum of the operand origins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .arithmetic import CarryState
from .core import IfcParams, PulseTrain
from .errors import NumericDomainError, PreconditionError

__all__ = ["schedule_shifts", "convolve", "convolve_approx", "shift_carry_states"]


def schedule_shifts(x: PulseTrain, y: PulseTrain) -> np.ndarray:
    """Ordered shift intervals ``(lambda_1, lambda_2)`` covering the support.

    Offsets are the sorted, deduplicated pairwise sums of event times (every
    alignment of a reversed-y pulse with an x pulse), preceded by the sum of
    the origins where the overlap of the supports begins.  Returned as an
    array of shape ``(n_shifts, 2)``.
    """
    if len(x) == 0 or len(y) == 0:
        raise PreconditionError("convolution requires two non-empty trains")
    offsets = np.unique(np.add.outer(x.times, y.times).ravel())
    start = x.origin + y.origin
    offsets = offsets[offsets > start]
    offsets = np.concatenate(([start], offsets))
    return np.column_stack((offsets[:-1], offsets[1:]))


@dataclass(frozen=True)
class _Geometry:
    """Static lookup tables shared by every shift."""

    x_edges: np.ndarray      # origin + pulse times
    x_pols: np.ndarray
    x_g: np.ndarray          # leak factor of each x interval (alpha > 0)
    rev_edges: np.ndarray    # reversed-y interval edges, ascending
    rev_pols: np.ndarray     # area polarity of each reversed interval
    rev_g: np.ndarray
    r_edges: np.ndarray
    r_g: np.ndarray


def _geometry(x, y, reference, alpha):
    x_edges = np.concatenate(([x.origin], x.times))
    rev_edges = np.concatenate((-y.times[::-1], [-y.origin]))
    rev_pols = y.polarities[::-1]
    r_edges = np.concatenate(([reference.origin], reference.times))

    def g_of(edges):
        if alpha == 0.0:
            return np.diff(edges)
        return -np.expm1(-alpha * np.diff(edges))

    return _Geometry(
        x_edges=x_edges,
        x_pols=x.polarities,
        x_g=g_of(x_edges),
        rev_edges=rev_edges,
        rev_pols=rev_pols,
        rev_g=g_of(rev_edges),
        r_edges=r_edges,
        r_g=g_of(r_edges),
    )


def _inside(values, lo, hi):
    """Slice of a sorted array strictly inside (lo, hi)."""
    return values[np.searchsorted(values, lo, side="right"): np.searchsorted(values, hi, side="left")]


def _interval_of(edges, t):
    """Index of the interval of ``edges`` containing each time in ``t``."""
    return np.searchsorted(edges, t, side="right") - 1


def _shift_windows(geo, lam_2, t_lo, t_hi):
    """Window edges tiling (t_lo, t_hi) at the arrived shift position."""
    pulses_x = _inside(geo.x_edges[1:], t_lo, t_hi)
    pulses_y = _inside(geo.rev_edges[:-1] + lam_2, t_lo, t_hi)
    pulses_r = _inside(geo.r_edges[1:], t_lo, t_hi)
    return np.unique(np.concatenate(([t_lo, t_hi], pulses_x, pulses_y, pulses_r)))


def _window_areas(geo, params, lam_1, lam_2, t_a, t_b):
    """Signed area increments (units of theta) for every window of one shift.

    Also returns the per-window bracket data needed for the nominal output
    intervals.  Windows whose reversed-y image falls outside the y support
    contribute zero.
    """
    alpha = params.alpha
    width = t_b - t_a
    d_lam = lam_2 - lam_1

    ix = _interval_of(geo.x_edges, t_a)
    iy = _interval_of(geo.rev_edges + lam_2, t_a)
    ir = _interval_of(geo.r_edges, t_a)
    if np.any(ir < 0) or np.any(ir >= geo.r_g.size):
        raise PreconditionError("reference train does not cover the overlap")
    ok_x = (ix >= 0) & (ix < geo.x_g.size)
    ok_y = (iy >= 0) & (iy < geo.rev_g.size)
    ok = ok_x & ok_y
    ixc = np.clip(ix, 0, geo.x_g.size - 1)
    iyc = np.clip(iy, 0, geo.rev_g.size - 1)

    pol = geo.x_pols[ixc] * geo.rev_pols[iyc]
    gx = geo.x_g[ixc]
    gy = geo.rev_g[iyc]
    gr = geo.r_g[ir]

    if alpha == 0.0:
        etas = pol * width * gr * d_lam / (gx * gy)
    else:
        g_w = -np.expm1(-alpha * width)
        g_dl = -math.expm1(-alpha * d_lam)
        x_next = geo.x_edges[ixc + 1]
        y_next = geo.rev_edges[iyc + 1] + lam_2
        r_next = geo.r_edges[ir + 1]
        # Factorized form of the four-term leak combination; the remaining
        # exponent is the net recency of the operand brackets relative to
        # the reference bracket.
        recency = np.exp(-alpha * ((x_next - t_b) + (y_next - d_lam - t_b) - (r_next - t_b)))
        etas = pol * gr * g_w * g_dl * recency / (alpha * gx * gy)
    etas = np.where(ok, etas, 0.0)
    return etas, (gx, gy, gr, ok)


def _nominal_intervals(alpha, overlap, brackets):
    """Per-window nominal output interval from the bracket leak factors.

    With zero leak (or for the simplified variant, whose geometry tables
    hold raw widths) the interval is the bracket product over the
    overlap-scaled reference width; otherwise the leak factor is inverted,
    leaving ``nan`` where the logarithm argument is non-positive.
    """
    gx, gy, gr, ok = brackets
    with np.errstate(divide="ignore", invalid="ignore"):
        base = gx * gy / (overlap * gr)
        if alpha == 0.0:
            t_c = base
        else:
            arg = 1.0 - base
            t_c = np.where(arg > 0, -np.log(np.maximum(arg, 1e-300)) / alpha, np.nan)
    t_c = np.where(ok, t_c, 0.0)
    return t_c


def _convolve(x, y, reference, *, approx, trace=None):
    for other in (y, reference):
        if other.params != x.params:
            raise PreconditionError(
                f"operand parameters differ: {x.params} vs {other.params}"
            )
    params = x.params
    shifts = schedule_shifts(x, y)
    geo = _geometry(x, y, reference, 0.0 if approx else params.alpha)

    origin = x.origin + y.origin
    times: list[float] = []
    pols: list[int] = []
    carry = 0.0
    excess_time = 0.0
    last = origin

    for s, (lam_1, lam_2) in enumerate(shifts):
        t_lo = max(x.origin, lam_2 - y.end)
        t_hi = min(x.end, lam_2 - y.origin)
        if t_hi - t_lo > 0:
            edges = _shift_windows(geo, lam_2, t_lo, t_hi)
            t_a, t_b = edges[:-1], edges[1:]
            if approx:
                etas, brackets = _window_areas_approx(geo, lam_1, lam_2, t_a, t_b)
            else:
                etas, brackets = _window_areas(geo, params, lam_1, lam_2, t_a, t_b)
            overlap = t_hi - t_lo
            t_c = None
            total = float(np.sum(etas))
            while abs(total + carry) >= 1.0:
                csum = carry + np.cumsum(etas)
                crossed = np.abs(csum) >= 1.0
                if not np.any(crossed):
                    break  # defensive: float disagreement between sum orders
                j = int(np.argmax(crossed))
                sign_j = 1 if etas[j] > 0 else -1
                sigma = sign_j - (csum[j] - etas[j])
                if t_c is None:
                    t_c = _nominal_intervals(
                        0.0 if approx else params.alpha, overlap, brackets
                    )
                used = np.flatnonzero(etas[: j + 1] != 0.0)
                if np.any(np.isnan(t_c[used])) or math.isnan(t_c[j]):
                    bad = int(used[np.isnan(t_c[used])][0]) if used.size else j
                    raise NumericDomainError(
                        f"nominal interval undefined at shift {s}, window {bad}: "
                        "bracket leak factors exceed the overlap-scaled reference"
                    )
                t_k = float(etas[:j] @ t_c[:j] + sigma * t_c[j]) + last + excess_time
                if t_k <= last:
                    t_k = float(np.nextafter(last, math.inf))
                times.append(t_k)
                pols.append(1 if sigma > 0 else -1)
                etas = etas.copy()
                etas[:j] = 0.0
                etas[j] -= sigma
                carry = 0.0
                excess_time = 0.0
                last = t_k
                total = float(np.sum(etas))
            carry = total + carry
        excess_time = lam_2 - last
        if trace is not None:
            trace.append(CarryState(carry, excess_time, last))

    return PulseTrain(
        params, origin, np.asarray(times, np.float64), np.asarray(pols, np.int64)
    )


def _window_areas_approx(geo, lam_1, lam_2, t_a, t_b):
    """Simplified increments: raw interval ratios, no leak factors.

    The geometry tables are built with ``alpha = 0`` so the "leak factor" of
    an interval is its width; the area formula is then identical to the
    zero-leak exact one.
    """
    width = t_b - t_a
    d_lam = lam_2 - lam_1
    ix = _interval_of(geo.x_edges, t_a)
    iy = _interval_of(geo.rev_edges + lam_2, t_a)
    ir = _interval_of(geo.r_edges, t_a)
    if np.any(ir < 0) or np.any(ir >= geo.r_g.size):
        raise PreconditionError("reference train does not cover the overlap")
    ok = (ix >= 0) & (ix < geo.x_g.size) & (iy >= 0) & (iy < geo.rev_g.size)
    ixc = np.clip(ix, 0, geo.x_g.size - 1)
    iyc = np.clip(iy, 0, geo.rev_g.size - 1)
    pol = geo.x_pols[ixc] * geo.rev_pols[iyc]
    dx = geo.x_g[ixc]
    dy = geo.rev_g[iyc]
    dr = geo.r_g[ir]
    etas = np.where(ok, pol * width * dr * d_lam / (dx * dy), 0.0)
    return etas, (dx, dy, dr, ok)


def convolve(x: PulseTrain, y: PulseTrain, reference: PulseTrain) -> PulseTrain:
    """Convolution of two pulse trains, normalized by the identity train.

    ``reference`` must share the operand parameters and cover the first
    operand's full support (one extra period of margin guarantees coverage
    of every overlap window).  The output train's origin is the sum of the
    operand origins and its support is the sum of the operand supports.
    """
    return _convolve(x, y, reference, approx=False)


def convolve_approx(x: PulseTrain, y: PulseTrain, reference: PulseTrain) -> PulseTrain:
    """Simplified convolution on raw inter-pulse intervals (no logarithms)."""
    return _convolve(x, y, reference, approx=True)


def shift_carry_states(
    x: PulseTrain,
    y: PulseTrain,
    reference: PulseTrain,
    *,
    approx: bool = False,
) -> tuple[PulseTrain, list[CarryState]]:
    """Run a convolution and return the carry state at every shift boundary."""
    trace: list[CarryState] = []
    train = _convolve(x, y, reference, approx=approx, trace=trace)
    return train, trace
