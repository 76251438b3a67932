"""Online addition, subtraction, and multiplication of pulse trains.

Operators march over computation windows: the intervals between consecutive
elements of the merged, deduplicated set of origins and event times of every
participating train.  Within one window each operand contributes a partial
area (a fraction of the threshold ``theta``, computed by
:func:`partial_area`), the contributions combine into a signed window area,
and whole units of accumulated area are emitted as output pulses.

Fractional area left over at a window boundary is carried as excess area, and
the time elapsed since the last emitted pulse is carried as excess time, so
no area is ever lost between emissions.  Two engine variants exist: the exact
one evaluates emission times through the leak factor (with logarithms), while
the simplified one works directly on raw inter-pulse intervals and therefore
needs no logarithms at all.  At zero leak both variants coincide.

When an operand has no bracketing next pulse for a window (it has gone
silent, or it is an empty train), its contribution is zero: a signal below
the noise floor may legitimately never pulse.  Remaining excess area at end
of stream is discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .core import IfcParams, PulseTrain, negate
from .errors import NumericDomainError, PreconditionError

__all__ = [
    "Bracket",
    "Window",
    "CarryState",
    "iter_windows",
    "partial_area",
    "add",
    "subtract",
    "multiply",
    "add_approx",
    "multiply_approx",
    "carry_states",
    "constancy_error_bound",
    "constancy_error_bounds",
]


class Bracket(NamedTuple):
    """Inter-pulse interval ``(t_prev, t_next)`` with the closing polarity."""

    t_prev: float
    t_next: float
    polarity: int

    @property
    def width(self) -> float:
        return self.t_next - self.t_prev


@dataclass(frozen=True)
class Window:
    """One computation window with the operand intervals that bracket it."""

    t_a: float
    t_b: float
    x: Optional[Bracket]
    y: Optional[Bracket]
    r: Optional[Bracket] = None


@dataclass(frozen=True)
class CarryState:
    """Carryover at a window boundary.

    ``excess_area`` is the fractional area (units of theta) still waiting to
    be emitted; ``excess_time`` is the time from the last emitted pulse to
    the window end.
    """

    excess_area: float
    excess_time: float
    last_emitted: float


def _brackets_for(train: PulseTrain, t_a: np.ndarray, t_b: np.ndarray):
    """Vectorized bracket lookup; returns (index, valid) per window."""
    edges = np.concatenate(([train.origin], train.times))
    idx = np.searchsorted(edges, t_a, side="right") - 1
    valid = (idx >= 0) & (idx < len(train))
    # Window points include every event time, so a valid index always
    # brackets the full window; clip keeps the gather in bounds.
    idx = np.clip(idx, 0, max(len(train) - 1, 0))
    return edges, idx, valid


def iter_windows(
    x: PulseTrain,
    y: PulseTrain,
    reference: Optional[PulseTrain] = None,
    *,
    require_brackets: bool = True,
) -> Iterator[Window]:
    """Yield computation windows over the merged event times.

    Windows are the intervals between consecutive elements of the merged,
    deduplicated set of train origins and event times (reference included
    when given).  With ``require_brackets`` the iteration stops at the first
    window where either operand lacks a bracketing next pulse (end of
    stream); without it, such windows are yielded with the missing bracket
    set to ``None`` so operators can apply the zero-contribution rule.
    """
    trains = [t for t in (x, y, reference) if t is not None]
    pieces = [np.asarray([t.origin]) for t in trains] + [t.times for t in trains]
    pts = np.unique(np.concatenate(pieces))
    if pts.size < 2:
        return
    t_a, t_b = pts[:-1], pts[1:]
    lookups = [_brackets_for(t, t_a, t_b) for t in trains]
    for i in range(t_a.size):
        brackets = []
        for train, (edges, idx, valid) in zip(trains, lookups):
            if valid[i]:
                j = int(idx[i])
                brackets.append(Bracket(edges[j], edges[j + 1], train.polarities[j]))
            else:
                brackets.append(None)
        if reference is None:
            brackets.append(None)
        bx, by, br = brackets
        if require_brackets and (bx is None or by is None):
            return
        yield Window(float(t_a[i]), float(t_b[i]), bx, by, br)


def partial_area(bracket: Bracket, t_a: float, t_b: float, params: IfcParams) -> float:
    """Fraction of the bracket's threshold area that falls in ``(t_a, t_b)``.

    With a constant signal over the bracket this fraction is exact:
    the leaky area restricted to the window divided by the whole-interval
    area theta.  At zero leak it reduces to the width ratio
    ``(t_b - t_a) / (t_next - t_prev)``.

    Raises
    ------
    PreconditionError
        If ``(t_a, t_b)`` is not contained in the bracket.
    """
    if not (bracket.t_prev <= t_a < t_b <= bracket.t_next):
        raise PreconditionError(
            f"window ({t_a}, {t_b}) not contained in bracket "
            f"({bracket.t_prev}, {bracket.t_next})"
        )
    alpha = params.alpha
    if alpha == 0.0:
        return (t_b - t_a) / bracket.width
    # Factorized form: exp(-a(t_next-t_b)) * g(t_b-t_a) / g(width); free of
    # the catastrophic cancellation of differencing two leak factors.
    num = math.exp(-alpha * (bracket.t_next - t_b)) * (-math.expm1(-alpha * (t_b - t_a)))
    return num / (-math.expm1(-alpha * bracket.width))


def _signed_fraction(bracket, t_a, t_b, params):
    """Polarity-signed partial area; 0 for a missing bracket or empty window."""
    if bracket is None or not t_a < t_b:
        return 0.0
    return bracket.polarity * partial_area(bracket, t_a, t_b, params)


def _window_area(window, t_a, kind, params):
    """Signed area (units of theta) of ``(t_a, window.t_b)`` for one operator."""
    t_b = window.t_b
    if kind == "add":
        return _signed_fraction(window.x, t_a, t_b, params) + _signed_fraction(
            window.y, t_a, t_b, params
        )
    # multiply
    if window.x is None or window.y is None or not t_a < t_b:
        return 0.0
    if window.r is None:
        raise PreconditionError(
            f"reference train does not cover window ({t_a}, {t_b})"
        )
    xi_x = partial_area(window.x, t_a, t_b, params)
    xi_y = partial_area(window.y, t_a, t_b, params)
    xi_r = partial_area(window.r, t_a, t_b, params)
    return window.x.polarity * window.y.polarity * xi_x * xi_y / xi_r


def _window_area_approx(window, t_a, kind, params):
    """Simplified window area from raw interval ratios (no leak factors)."""
    t_b = window.t_b
    if not t_a < t_b:
        return 0.0
    w = t_b - t_a
    if kind == "add":
        area = 0.0
        if window.x is not None:
            area += window.x.polarity * w / window.x.width
        if window.y is not None:
            area += window.y.polarity * w / window.y.width
        return area
    if window.x is None or window.y is None:
        return 0.0
    if window.r is None:
        raise PreconditionError(
            f"reference train does not cover window ({t_a}, {t_b})"
        )
    return (
        window.x.polarity
        * window.y.polarity
        * w
        * window.r.width
        / (window.x.width * window.y.width)
    )


def _exact_emission_offset(window, kind, params, sign, need):
    """Time past the last carry point needed to collect ``need`` units of area.

    Evaluates the g-value of the nominal output inter-pulse interval from the
    bracketing intervals, scales it by the still-needed fraction, and inverts
    the leak factor.  Raises :class:`NumericDomainError` when the logarithm
    argument leaves its domain, which indicates carry corruption.
    """
    alpha = params.alpha
    bx, by = window.x, window.y
    if kind == "add":
        if bx is not None and by is not None:
            if alpha == 0.0:
                denom = by.polarity * bx.width + bx.polarity * by.width
                nominal = sign * bx.width * by.width / denom if denom else math.inf
                if not nominal > 0:
                    raise NumericDomainError(
                        f"non-positive output interval in window "
                        f"({window.t_a}, {window.t_b})"
                    )
                return nominal * need
            gx = -math.expm1(-alpha * bx.width)
            gy = -math.expm1(-alpha * by.width)
            denom = bx.polarity * gx + by.polarity * gy
            scale = sign * bx.polarity * by.polarity
            g_value = scale * gx * gy / denom if denom else 0.0
        else:
            bracket = bx if bx is not None else by
            if alpha == 0.0:
                return bracket.width * need
            g_value = -math.expm1(-alpha * bracket.width)
    else:  # multiply
        if alpha == 0.0:
            return bx.width * by.width / window.r.width * need
        gx = -math.expm1(-alpha * bx.width)
        gy = -math.expm1(-alpha * by.width)
        gr = -math.expm1(-alpha * window.r.width)
        g_value = gx * gy / gr
    scaled = g_value * need
    if not 0.0 < scaled < 1.0:
        raise NumericDomainError(
            f"logarithm argument 1 - {scaled:.6g} out of domain in window "
            f"({window.t_a}, {window.t_b}); carry corruption"
        )
    return -math.log1p(-scaled) / alpha


def _check_operands(x, y, reference=None):
    for other in (y, reference):
        if other is not None and other.params != x.params:
            raise PreconditionError(
                f"operand parameters differ: {x.params} vs {other.params}"
            )


def _combine(x, y, kind, *, approx, reference=None, trace=None):
    _check_operands(x, y, reference)
    params = x.params
    origin = min(x.origin, y.origin) if reference is None else min(
        x.origin, y.origin, reference.origin
    )
    times: list[float] = []
    pols: list[int] = []
    carry = 0.0
    excess_time = 0.0
    last = origin
    area_fn = _window_area_approx if approx else _window_area

    for window in iter_windows(x, y, reference, require_brackets=False):
        area = area_fn(window, window.t_a, kind, params)
        nominal = None
        while abs(area + carry) >= 1.0:
            sign = 1 if area > 0 else -1
            if abs(area + carry) == 1.0:
                t_k = window.t_b  # measure-zero boundary case; deterministic
            else:
                need = abs(sign - carry)
                if approx:
                    if nominal is None:
                        nominal = (window.t_b - window.t_a) / abs(area)
                    t_k = last + excess_time + nominal * need
                else:
                    t_k = last + excess_time + _exact_emission_offset(
                        window, kind, params, sign, need
                    )
                if t_k > window.t_b:
                    t_k = window.t_b
            if t_k <= last:
                # Float-level collision; keep output times strictly increasing.
                t_k = float(np.nextafter(last, math.inf))
            times.append(t_k)
            pols.append(sign)
            if approx:
                area = area - (sign - carry)
            else:
                area = area_fn(window, t_k, kind, params) if t_k < window.t_b else 0.0
            carry = 0.0
            excess_time = 0.0
            last = t_k
        carry = area + carry
        excess_time = window.t_b - last
        if trace is not None:
            trace.append(CarryState(carry, excess_time, last))

    return PulseTrain(
        params, origin, np.asarray(times, np.float64), np.asarray(pols, np.int64)
    )


def add(x: PulseTrain, y: PulseTrain) -> PulseTrain:
    """Sum of two pulse trains, computed window by window with carryover.

    Both operands must share identical converter parameters.  Emission times
    come from the exact leak-factor form of the output interval; the window
    area is re-evaluated from the emission instant after each output pulse.
    """
    return _combine(x, y, "add", approx=False)


def subtract(x: PulseTrain, y: PulseTrain) -> PulseTrain:
    """``add(x, negate(y))``."""
    return add(x, negate(y))


def multiply(x: PulseTrain, y: PulseTrain, reference: PulseTrain) -> PulseTrain:
    """Product of two pulse trains, normalized by the identity train.

    ``reference`` must share the operand parameters and cover every window
    where both operands are active; generating it with
    :func:`pulsedsp.core.reference_train` over the common span plus one
    period of margin guarantees coverage.
    """
    return _combine(x, y, "mul", approx=False, reference=reference)


def add_approx(x: PulseTrain, y: PulseTrain) -> PulseTrain:
    """Simplified addition working directly on raw inter-pulse intervals.

    No logarithms are involved, which is what makes the variant attractive
    for hardware; at zero leak it agrees with :func:`add` to float noise.
    """
    return _combine(x, y, "add", approx=True)


def multiply_approx(x: PulseTrain, y: PulseTrain, reference: PulseTrain) -> PulseTrain:
    """Simplified multiplication on raw inter-pulse intervals."""
    return _combine(x, y, "mul", approx=True, reference=reference)


def carry_states(
    x: PulseTrain,
    y: PulseTrain,
    *,
    kind: str = "add",
    reference: Optional[PulseTrain] = None,
    approx: bool = False,
) -> tuple[PulseTrain, list[CarryState]]:
    """Run an operator and also return the carry state at every window boundary."""
    if kind not in ("add", "mul"):
        raise PreconditionError(f"unknown operator kind {kind!r}")
    trace: list[CarryState] = []
    train = _combine(x, y, kind, approx=approx, reference=reference, trace=trace)
    return train, trace


def constancy_error_bound(
    t_a: float,
    t_b: float,
    params: IfcParams,
    *,
    next_pulse: float,
    deviation: tuple[float, float],
) -> tuple[float, float]:
    """Bounds on the single-train window area error |delta|.

    ``deviation`` holds the (min, max) of ``|x(z) - c_x|`` over the window,
    where ``c_x`` is the constant amplitude implied by the bracketing
    interval.  The mean value theorem then pins the area error between the
    window length times the extreme deviations, attenuated by the leak over
    the distance to the bracketing next pulse.
    """
    lo_dev, hi_dev = deviation
    if lo_dev > hi_dev or lo_dev < 0:
        raise PreconditionError("deviation must satisfy 0 <= min <= max")
    if not t_a < t_b:
        raise PreconditionError("window must have positive width")
    alpha = params.alpha
    width = t_b - t_a
    lower = width * lo_dev * math.exp(-alpha * (next_pulse - t_a))
    upper = width * hi_dev * math.exp(-alpha * (next_pulse - t_b))
    return lower, upper


def constancy_error_bounds(
    kind: str,
    t_a: float,
    t_b: float,
    params: IfcParams,
    *,
    x_next: float,
    y_next: float,
    x_deviation: tuple[float, float],
    y_deviation: tuple[float, float],
    k1: Optional[float] = None,
    k2: Optional[float] = None,
    k3: Optional[float] = None,
    shift: Optional[tuple[float, float]] = None,
) -> tuple[float, float]:
    """Bounds on the combined window area error for one operator kind.

    Parameters
    ----------
    kind : {"add", "multiply", "convolve"}
        Which propagation rule to apply.
    t_a, t_b : float
        Computation window.
    x_next, y_next : float
        Bracketing next-pulse times of the operands.
    x_deviation, y_deviation : (float, float)
        (min, max) of the absolute deviation of the true signal from its
        constant model over the window; for ``convolve`` the y extrema are
        taken over the shifted range ``[shift[0] - t_b, shift[1] - t_a]``.
    k1, k2, k3 : float, optional
        Window areas (units of theta) of x, y, and the reference; required
        for ``multiply`` and ``convolve``.
    shift : (float, float), optional
        Shift interval; required for ``convolve``.

    Returns
    -------
    (lower, upper)
        Implied bounds on the absolute combined error.
    """
    for dev in (x_deviation, y_deviation):
        if dev[0] > dev[1] or dev[0] < 0:
            raise PreconditionError("deviations must satisfy 0 <= min <= max")
    if not t_a < t_b:
        raise PreconditionError("window must have positive width")
    alpha = params.alpha
    width = t_b - t_a

    def attenuated_sq(dev, next_pulse, at):
        return dev * dev * math.exp(-2.0 * alpha * (next_pulse - at))

    if kind == "add":
        lower = width * math.sqrt(
            attenuated_sq(x_deviation[0], x_next, t_a)
            + attenuated_sq(y_deviation[0], y_next, t_a)
        )
        upper = width * math.sqrt(
            attenuated_sq(x_deviation[1], x_next, t_b)
            + attenuated_sq(y_deviation[1], y_next, t_b)
        )
        return lower, upper

    if kind not in ("multiply", "convolve"):
        raise PreconditionError(f"unknown bound kind {kind!r}")
    if k1 is None or k2 is None or k3 is None:
        raise PreconditionError(f"{kind} bounds require k1, k2, k3")
    if kind == "convolve":
        if shift is None:
            raise PreconditionError("convolve bounds require the shift interval")
        lam_1, lam_2 = shift
        scale = width * (lam_2 - lam_1) / abs(k3)
        y_lo_at, y_hi_at = lam_1 - t_b, lam_2 - t_a
    else:
        scale = width / abs(k3)
        y_lo_at, y_hi_at = t_a, t_b
    lower = scale * math.sqrt(
        k2 * k2 * attenuated_sq(x_deviation[0], x_next, t_a)
        + k1 * k1 * attenuated_sq(y_deviation[0], y_next, y_lo_at)
    )
    upper = scale * math.sqrt(
        k2 * k2 * attenuated_sq(x_deviation[1], x_next, t_b)
        + k1 * k1 * attenuated_sq(y_deviation[1], y_next, y_hi_at)
    )
    return lower, upper
