"""Command line front end.

Subcommands: encode, arith, conv, reconstruct, metrics, sweep, ecg-demo.
All flags are long-form.  Exit codes: 0 success, 2 input-format error,
3 numeric-domain error, 4 precondition violation.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import arithmetic, convolution
from .core import IfcParams, reference_period, reference_train
from .encoder import encode
from .errors import FormatError, NumericDomainError, PreconditionError
from .experiments import ExperimentConfig, run_comparison, run_ecg_demo, run_synthetic
from .io import read_signal, read_train, write_signal, write_train
from .metrics import region_report
from .reconstruction import BasisSpec, reconstruct
from .synthetic import synthetic_ecg


def _cmd_encode(args):
    signal = read_signal(args.infile)
    params = IfcParams(theta=args.theta, alpha=args.alpha)
    train = encode(signal, params, args.step)
    write_train(train, args.out)


def _cmd_arith(args):
    x = read_train(args.x)
    y = read_train(args.y)
    if args.op == "add":
        out = arithmetic.add_approx(x, y) if args.approx else arithmetic.add(x, y)
    elif args.op == "sub":
        from .core import negate

        y = negate(y)
        out = arithmetic.add_approx(x, y) if args.approx else arithmetic.add(x, y)
    else:
        start = min(x.origin, y.origin)
        end = max(x.end, y.end) + 2.0 * reference_period(x.params)
        ref = reference_train(x.params, start, end)
        fn = arithmetic.multiply_approx if args.approx else arithmetic.multiply
        out = fn(x, y, ref)
    write_train(out, args.out)


def _cmd_conv(args):
    x = read_train(args.x)
    y = read_train(args.y)
    end = x.end + 2.0 * reference_period(x.params)
    ref = reference_train(x.params, x.origin, end)
    fn = convolution.convolve_approx if args.approx else convolution.convolve
    write_train(fn(x, y, ref), args.out)


def _cmd_reconstruct(args):
    train = read_train(args.infile)
    window = (
        args.window_start if args.window_start is not None else train.origin,
        args.window_end if args.window_end is not None else train.end,
    )
    basis = BasisSpec(args.basis, args.m, window)
    write_signal(reconstruct(train, basis, args.dt), args.out)


def _cmd_metrics(args):
    hat = read_train(args.hat)
    ref = read_train(args.ref)
    window = (max(hat.origin, ref.origin), min(hat.end, ref.end))
    report = region_report(hat, ref, window, args.grid)
    with open(args.out, "w") as fh:
        fh.write("\n".join(report.lines()) + "\n")


def _cmd_sweep(args):
    config = ExperimentConfig(
        thetas=tuple(args.theta),
        alphas=tuple(args.alpha),
        duration=args.duration,
        sample_interval=args.sample_interval,
        step=args.step,
        grid=args.grid,
        seed=args.seed,
        operations=tuple(args.ops),
        variants=tuple(args.variants),
        outdir=args.out,
    )
    if args.mode == "synthetic":
        run_synthetic(config)
    else:
        run_comparison(config)


def _cmd_ecg_demo(args):
    if args.ecg is not None:
        ecg = read_signal(args.ecg)
    else:
        ecg = synthetic_ecg(args.synthetic_duration, seed=args.seed)
    run_ecg_demo(
        ecg,
        args.out,
        theta=args.theta,
        alpha=args.alpha,
        wander_amplitude=args.wander_amplitude,
        wander_frequency=args.wander_frequency,
        grid=args.grid,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsedsp",
        description="Pulse-domain signal processing: encode signals into "
        "integrate-and-fire pulse trains and operate on them directly.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="convert a signal file into a pulse train")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("arith", help="add, subtract, or multiply two trains")
    p.add_argument("--op", choices=("add", "sub", "mul"), required=True)
    p.add_argument("--approx", action="store_true")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_arith)

    p = sub.add_parser("conv", help="convolve two trains")
    p.add_argument("--approx", action="store_true")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_conv)

    p = sub.add_parser("reconstruct", help="least-squares signal reconstruction")
    p.add_argument("--basis", choices=("fourier", "bspline"), default="fourier")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--window-start", type=float, default=None)
    p.add_argument("--window-end", type=float, default=None)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("metrics", help="quartile-region comparison of two trains")
    p.add_argument("--hat", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--grid", type=float, default=1e-3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("sweep", help="synthetic operator sweep or comparison study")
    p.add_argument("--mode", choices=("synthetic", "comparison"), default="synthetic")
    p.add_argument("--theta", type=float, nargs="+", default=[0.01])
    p.add_argument("--alpha", type=float, nargs="+", default=[0.0])
    p.add_argument("--duration", type=float, default=5.0)
    p.add_argument("--sample-interval", type=float, default=1e-3)
    p.add_argument("--step", type=float, default=1e-4)
    p.add_argument("--grid", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ops", nargs="+", default=["add", "mul", "conv"],
                   choices=("add", "mul", "conv"))
    p.add_argument("--variants", nargs="+", default=["exact", "approx"],
                   choices=("exact", "approx"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("ecg-demo", help="baseline-wander subtraction demo")
    p.add_argument("--ecg", default=None, help="signal file; omit to synthesize")
    p.add_argument("--synthetic-duration", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--wander-amplitude", type=float, default=0.3)
    p.add_argument("--wander-frequency", type=float, default=0.2)
    p.add_argument("--grid", type=float, default=1e-3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ecg_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
