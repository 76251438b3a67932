"""Text file formats for pulse trains and sampled signals.

Train file::

    theta=<decimal> alpha=<decimal> origin=<decimal>
    <time_seconds_with_9_decimals>,<+1|-1>
    ...

Signal file::

    t0=<decimal> dt=<decimal>
    <amplitude>
    ...

Both formats are canonical: a file written by this module parses back to an
equal value, and re-writing a parsed file reproduces it byte for byte.
Event times are quantized to 9 decimal places (1 ns) on write; header floats
and signal amplitudes use the shortest exact decimal representation.
"""

from __future__ import annotations

from .core import IfcParams, PulseTrain, Signal
from .errors import FormatError, PreconditionError

__all__ = ["write_train", "read_train", "write_signal", "read_signal"]


def _parse_header(line, keys, path):
    parts = line.split()
    if len(parts) != len(keys):
        raise FormatError(f"{path}: expected header fields {keys}, got {line!r}")
    values = {}
    for part, key in zip(parts, keys):
        name, sep, raw = part.partition("=")
        if name != key or not sep:
            raise FormatError(f"{path}: expected '{key}=<decimal>', got {part!r}")
        try:
            values[key] = float(raw)
        except ValueError as exc:
            raise FormatError(f"{path}: bad decimal for {key}: {raw!r}") from exc
    return values


def write_train(train: PulseTrain, path) -> None:
    """Write a pulse train in the canonical text format."""
    lines = [f"theta={train.params.theta!r} alpha={train.params.alpha!r} origin={train.origin!r}"]
    for t, p in zip(train.times, train.polarities):
        lines.append(f"{t:.9f},{'+1' if p > 0 else '-1'}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_train(path) -> PulseTrain:
    """Read a pulse train written by :func:`write_train`.

    Raises :class:`FormatError` on any malformed line.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    header = _parse_header(lines[0], ("theta", "alpha", "origin"), path)
    times, pols = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        time_str, sep, pol_str = line.partition(",")
        if not sep or pol_str not in ("+1", "-1"):
            raise FormatError(f"{path}:{lineno}: expected '<time>,<+1|-1>', got {line!r}")
        try:
            times.append(float(time_str))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: bad time {time_str!r}") from exc
        pols.append(1 if pol_str == "+1" else -1)
    try:
        params = IfcParams(theta=header["theta"], alpha=header["alpha"])
        return PulseTrain.from_events(params, header["origin"], zip(times, pols))
    except PreconditionError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_signal(signal: Signal, path) -> None:
    """Write a sampled signal in the canonical text format."""
    lines = [f"t0={signal.start_time!r} dt={signal.sample_interval!r}"]
    lines.extend(repr(float(v)) for v in signal.samples)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_signal(path) -> Signal:
    """Read a sampled signal written by :func:`write_signal`."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    header = _parse_header(lines[0], ("t0", "dt"), path)
    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            samples.append(float(line))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: bad amplitude {line!r}") from exc
    if not samples:
        raise FormatError(f"{path}: signal has no samples")
    try:
        return Signal(start_time=header["t0"], sample_interval=header["dt"], samples=samples)
    except PreconditionError as exc:
        raise FormatError(f"{path}: {exc}") from exc
