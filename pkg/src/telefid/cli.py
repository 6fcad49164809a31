"""Command-line front end: ``telefid fidelity|simulate|thresholds|sweep|validate``.

Exit codes: 0 success, 1 validation failure, 2 input error, 3 self-check discrepancy.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import analysis, protocol
from .channels import ChannelError, XStateParams, channel_from_spec
from .qkernel import StateError, bloch_quadrature
from .validation import run_all

EXIT_OK, EXIT_VALIDATION, EXIT_INPUT, EXIT_DISCREPANCY = 0, 1, 2, 3
CSV_COLUMNS = ("param", "F_X", "F_p_ref", "classical_limit", "F_X_numeric", "regime")
SWEEP_PARAMS = ("gamma", "rho14", "c_meas_x")


class InputError(Exception):
    pass


# --- argument helpers --------------------------------------------------------


def _add_channel_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("channel")
    m = g.add_mutually_exclusive_group()
    m.add_argument("--werner-gamma", type=float, metavar="G")
    m.add_argument("--pure-alpha", type=float, metavar="A")
    m.add_argument("--xstate", type=float, nargs=6,
                   metavar=("R11", "R22", "R33", "R44", "R14", "R23"))
    m.add_argument("--channel-json", metavar="PATH",
                   help='file holding {"kind": "pure"|"xstate"|"werner", ...}')


def _add_basis_args(p: argparse.ArgumentParser) -> None:
    m = p.add_argument_group("measurement basis").add_mutually_exclusive_group()
    m.add_argument("--basis-xy", type=float, nargs=2, metavar=("X", "Y"))
    m.add_argument("--basis-concurrence", type=float, metavar="C",
                   help="solve 2xy = C with x <= y (default 1, the Bell basis)")


def _add_reference_args(p: argparse.ArgumentParser, basis_default: float | None = None) -> None:
    g = p.add_argument_group("pure-channel reference")
    g.add_argument("--ref-channel-concurrence", type=float, default=1.0, metavar="C",
                   help="concurrence of the reference pure channel (default 1)")
    g.add_argument("--ref-basis-concurrence", type=float, default=basis_default, metavar="C",
                   help="measurement concurrence of the reference lab")


def _channel_spec(args) -> dict:
    if args.werner_gamma is not None:
        return {"kind": "werner", "gamma": args.werner_gamma}
    if args.pure_alpha is not None:
        return {"kind": "pure", "alpha": args.pure_alpha}
    if args.xstate is not None:
        keys = ("rho11", "rho22", "rho33", "rho44", "rho14", "rho23")
        return {"kind": "xstate", **dict(zip(keys, args.xstate))}
    if args.channel_json is not None:
        try:
            with open(args.channel_json, encoding="utf-8") as fh:
                spec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read channel file: {exc}") from None
        if not isinstance(spec, dict):
            raise InputError("channel file must hold a JSON object")
        return spec
    raise InputError("no channel given (use --werner-gamma, --pure-alpha, --xstate or --channel-json)")


def _channel(args) -> tuple[dict, np.ndarray, XStateParams]:
    spec = _channel_spec(args)
    rho, params = channel_from_spec(spec)
    return spec, rho, params


def _basis(args) -> protocol.MeasurementBasis:
    if getattr(args, "basis_xy", None) is not None:
        return protocol.build_basis(*args.basis_xy)
    c = args.basis_concurrence if args.basis_concurrence is not None else 1.0
    return protocol.basis_from_concurrence(c)


def _closed_form(spec: dict, params: XStateParams, basis: protocol.MeasurementBasis) -> float:
    if spec.get("kind") == "pure":
        c_chan = 2.0 * params.rho23
        return analysis.fp_closed(basis.concurrence, c_chan)
    return analysis.fx_closed(basis.concurrence, params)


def _verdict(f: float) -> str:
    status = analysis.classify_margin(f - analysis.CLASSICAL_LIMIT)
    return {"above": "quantum", "below": "classical"}.get(status, status)


def _emit(obj: dict, out=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    (out or sys.stdout).write(text)


# --- commands ----------------------------------------------------------------


def cmd_fidelity(args) -> int:
    spec, _, params = _channel(args)
    basis = _basis(args)
    f = _closed_form(spec, params, basis)
    _emit({
        "channel": spec,
        "basis": {"x": basis.x, "y": basis.y},
        "F": f,
        "channel_concurrence": params.concurrence,
        "basis_concurrence": basis.concurrence,
        "verdict": _verdict(f),
    })
    return EXIT_OK


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise InputError(f"grid must look like 64x64, got {text!r}") from None
    return a, b


def cmd_simulate(args) -> int:
    spec, rho, params = _channel(args)
    basis = _basis(args)
    closed = _closed_form(spec, params, basis)
    record = {"channel": spec, "basis": {"x": basis.x, "y": basis.y}, "mode": args.mode,
              "F_closed": closed}
    if args.mode == "mc":
        est, se = protocol.average_fidelity_mc(rho, basis, args.n, seed=args.seed)
        threshold = max(5.0 * se, 1e-12)
        record.update(F_numeric=est, std_error=se, n_samples=args.n, seed=args.seed)
    else:
        n_theta, n_phi = _parse_grid(args.grid)
        est = protocol.average_fidelity_quadrature(rho, basis, bloch_quadrature(n_theta, n_phi))
        threshold = 1e-8
        record.update(F_numeric=est, grid=[n_theta, n_phi])
    discrepancy = abs(est - closed)
    record.update(discrepancy=discrepancy, check_threshold=threshold,
                  check_passed=discrepancy <= threshold)
    _emit(record)
    return EXIT_OK if discrepancy <= threshold else EXIT_DISCREPANCY


def cmd_thresholds(args) -> int:
    _, _, params = _channel(args)
    basis = _basis(args)
    c_x = basis.concurrence
    c_ref, c_chan = args.ref_basis_concurrence, args.ref_channel_concurrence
    if c_ref is None:
        raise InputError("--ref-basis-concurrence is required")
    feature = analysis.quantum_feature_check(params, c_x)
    if abs(c_ref - c_x) <= 1e-12:
        situation, report = "B2", analysis.situation_b2_report(c_x, c_chan, params)
    else:
        situation, report = "B1", analysis.situation_b1_report(c_ref, c_chan, c_x, params)
    _emit({
        "quantum": feature.classical_limit_exceeded,
        "improvement": report.improvement,
        "situation": situation,
        "F_X": analysis.fx_closed(c_x, params),
        "F_p": analysis.fp_closed(c_ref, c_chan),
        "quantum_feature": feature.to_dict(),
        "report": report.to_dict(),
    })
    return EXIT_OK


@dataclass
class SweepSpec:
    param: str
    lo: float
    hi: float
    steps: int
    channel: dict = field(default_factory=dict)
    c_meas_x: float = 1.0
    ref_channel_concurrence: float = 1.0
    ref_basis_concurrence: float = 1.0
    numeric: bool = True

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise InputError(f"unknown sweep parameter {self.param!r}; choose from {SWEEP_PARAMS}")
        if not self.lo < self.hi:
            raise InputError(f"sweep range needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.steps < 2:
            raise InputError(f"sweep needs at least 2 steps, got {self.steps}")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


FIG1 = dict(param="gamma", lo=0.0, hi=1.0, steps=101, channel={"kind": "werner"},
            c_meas_x=0.9, ref_channel_concurrence=1.0, ref_basis_concurrence=0.6)


def _row_channel(spec: SweepSpec, value: float) -> tuple[dict, float]:
    chan, c_x = dict(spec.channel), spec.c_meas_x
    if spec.param == "gamma":
        chan = {"kind": "werner", "gamma": float(value)}
    elif spec.param == "rho14":
        if chan.get("kind") != "xstate":
            raise InputError("rho14 sweeps need an xstate channel")
        chan["rho14"] = float(value)
    else:
        c_x = float(value)
    return chan, c_x


def sweep_rows(spec: SweepSpec) -> list[tuple]:
    fp = analysis.fp_closed(spec.ref_basis_concurrence, spec.ref_channel_concurrence)
    rows = []
    for v in spec.values():
        chan, c_x = _row_channel(spec, v)
        rho, params = channel_from_spec(chan)
        fx = analysis.fx_closed(c_x, params)
        numeric = (protocol.average_fidelity_quadrature(rho, protocol.basis_from_concurrence(c_x))
                   if spec.numeric else math.nan)
        rows.append((float(v), fx, fp, analysis.CLASSICAL_LIMIT, numeric,
                     analysis.regime_label(fx, fp)))
    return rows


def format_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".telefid-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sweep_spec(args) -> SweepSpec:
    if args.preset == "fig1":
        return SweepSpec(**FIG1)
    if args.param is None or args.lo is None or args.hi is None:
        raise InputError("custom sweeps need --param, --lo and --hi (or --preset fig1)")
    channel = _channel_spec(args) if args.param != "gamma" else {"kind": "werner"}
    c_x = args.basis_concurrence if args.basis_concurrence is not None else 1.0
    c_ref = args.ref_basis_concurrence if args.ref_basis_concurrence is not None else c_x
    return SweepSpec(args.param, args.lo, args.hi, args.steps, channel, c_x,
                     args.ref_channel_concurrence, c_ref)


def cmd_sweep(args) -> int:
    spec = _sweep_spec(args)
    if args.no_numeric:
        spec.numeric = False
    text = format_csv(sweep_rows(spec))
    if args.format == "json":
        rows = list(csv.DictReader(io.StringIO(text)))
        text = json.dumps(rows, indent=2) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_all(args.depth, seed=args.seed)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name:<14} cases={r.cases:<6} max_error={r.max_error:.3e}")
        if not r.passed:
            print("failing case: " + json.dumps(r.failure, sort_keys=True))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="telefid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fidelity", help="closed-form average fidelity")
    _add_channel_args(p)
    _add_basis_args(p)
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("simulate", help="numeric average fidelity checked against the closed form")
    _add_channel_args(p)
    _add_basis_args(p)
    p.add_argument("--mode", choices=("mc", "quadrature"), default="quadrature")
    p.add_argument("--n", type=int, default=10**6, help="Monte Carlo samples")
    p.add_argument("--grid", default="64x64", help="quadrature nodes, THETAxPHI")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("thresholds", help="regime report against the threshold inequalities")
    _add_channel_args(p)
    _add_basis_args(p)
    _add_reference_args(p)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    p.add_argument("--preset", choices=("fig1",))
    p.add_argument("--param", choices=SWEEP_PARAMS)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-numeric", action="store_true", help="skip the quadrature column")
    _add_channel_args(p)
    _add_basis_args(p)
    _add_reference_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the randomized self-check suites")
    p.add_argument("depth", nargs="?", choices=("quick", "full"), default="quick")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ChannelError, StateError, protocol.BasisError, analysis.AnalysisError) as exc:
        print(f"telefid: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
