"""Command-line interface: ``switchsim verify|scan|optimize|choi``.

JSON goes to stdout, CSV to files. Exit codes: 0 success, 1 verification
failure, 2 usage error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import closed_forms as cf
from .channels import (
    KrausChannel,
    bit_flip,
    choi,
    choi_trace_residual,
    identity_channel,
    matrix_to_pairs,
    pauli_channel,
    phase_flip,
    validate_cptp,
)
from .linalg import KET_PLUS, tensor
from .optimize import DEFAULT_RESTARTS, DEFAULT_TOL, compare_product_vs_entangled, haar_control_values, optimize_control
from .protocol import success_probability, verify_input_independence
from .sampling import haar_state
from .switch import SwitchChannel, nested_switch, quantum_switch

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
NEGATIVE_CAP = 0.25
NEGATIVE_SLACK = 1e-6


class UsageError(Exception):
    pass


def parse_number(text: str) -> Fraction:
    """Decimal or simple fraction (``"0.25"``, ``"1/3"``) as an exact Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}") from None


def emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


# ---------------------------------------------------------------- parameters

def pauli_params(args) -> cf.PauliParams:
    given = {k: getattr(args, k) for k in ("p0", "p1", "p2") if getattr(args, k) is not None}
    if len(given) < 2:
        raise UsageError("the pauli example needs at least two of --p0, --p1, --p2")
    missing = [k for k in ("p0", "p1", "p2") if k not in given]
    if missing:
        given[missing[0]] = 1 - sum(given.values())
    try:
        p = cf.PauliParams(given["p0"], given["p1"], given["p2"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not p.interior:
        raise UsageError("pauli probabilities must lie strictly between 0 and 1")
    return p


def flip_params(args) -> cf.FlipParams:
    if args.r is None or args.s is None:
        raise UsageError("this example needs --r and --s")
    try:
        fp = cf.FlipParams(args.r, args.s)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not fp.interior:
        raise UsageError("r and s must lie strictly between 0 and 1")
    return fp


def example_params(args):
    return pauli_params(args) if args.example == "pauli" else flip_params(args)


def params_dict(params) -> dict:
    return {k: float(v) for k, v in vars(params).items()}


def negative_switch() -> SwitchChannel:
    half = Fraction(1, 2)
    _, higher = cf.switches_for("bitphase", cf.FlipParams(half, half))
    return higher


def parse_channel(spec: str) -> KrausChannel:
    """``identity``, ``pauli:P0,P1,P2``, ``bitflip:R``, ``phaseflip:S`` or a channel JSON file."""
    name, _, rest = spec.partition(":")
    try:
        if name == "identity" and not rest:
            return identity_channel(2)
        if name == "pauli":
            values = [float(parse_number(x)) for x in rest.split(",")]
            if len(values) != 3:
                raise UsageError("pauli channel needs three probabilities")
            return pauli_channel(*values)
        if name == "bitflip":
            return bit_flip(float(parse_number(rest)))
        if name == "phaseflip":
            return phase_flip(float(parse_number(rest)))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad channel spec {spec!r}: {exc}") from None
    path = Path(spec)
    if path.suffix == ".json":
        try:
            data = json.loads(path.read_text())
            return KrausChannel.from_dict(data)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load channel from {spec}: {exc}") from None
    raise UsageError(f"unrecognised channel spec {spec!r}")


# ---------------------------------------------------------------- subcommands

def cmd_verify(args) -> int:
    if args.example == "negative":
        return _verify_negative(args)
    params = example_params(args)
    ex = args.example
    table = cf.verify_example_table(ex, params)
    baseline, higher = cf.closed_form_probs(ex, params)
    bf_base, bf_high = cf.brute_force_probs(ex, params)
    _, hsw = cf.switches_for(ex, params)
    rng = np.random.default_rng(args.seed)
    samples = [haar_state(2, rng) for _ in range(20)]
    indep = verify_input_independence(hsw, tensor(KET_PLUS, KET_PLUS), None, samples)
    residuals = {
        "table_prob": table.max_prob_err,
        "table_state": table.max_state_err,
        "table_control": table.max_control_err,
        "constituent_switch": table.max_switch_err,
        "baseline": abs(bf_base - float(baseline)),
        "higher": abs(bf_high - float(higher)),
        "input_independence": indep,
    }
    passed = all(v < cf.TABLE_TOL for v in residuals.values())
    emit({
        "example": ex,
        "params": params_dict(params),
        "baseline_prob": float(baseline),
        "higher_prob": float(higher),
        "q23": float(higher),
        "advantage": float(higher - baseline),
        "brute_force": {"baseline_prob": bf_base, "higher_prob": bf_high},
        "table_probabilities": table.probabilities,
        "residuals": residuals,
        "passed": passed,
    })
    return EXIT_OK if passed else EXIT_FAIL


def _verify_negative(args) -> int:
    sw = negative_switch()
    at_plus = success_probability(sw, tensor(KET_PLUS, KET_PLUS))
    haar = haar_control_values(sw, args.haar_samples, args.seed)
    opt = optimize_control(sw, restarts=args.restarts, seed=args.seed)
    best = max(float(haar.max(initial=0.0)), opt.best_value)
    passed = best <= NEGATIVE_CAP + NEGATIVE_SLACK and abs(at_plus - NEGATIVE_CAP) < 1e-9
    emit({
        "example": "negative",
        "params": {"r": 0.5, "s": 0.5},
        "value_at_plus_plus": at_plus,
        "haar_samples": args.haar_samples,
        "haar_max": float(haar.max(initial=0.0)),
        "optimizer": opt.to_dict(),
        "best_value": best,
        "cap": NEGATIVE_CAP,
        "passed": passed,
    })
    return EXIT_OK if passed else EXIT_FAIL


def cmd_scan(args) -> int:
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    check_every = args.check_every or None
    samples = cf.scan_region(args.example, args.grid, check_every=check_every)
    if args.out is not None:
        try:
            cf.write_region_csv(samples, args.out)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    checked = [s for s in samples if s.checked]
    max_err = max((s.check_error for s in checked), default=0.0)
    disagreements = sum(s.bf_advantage_flag != s.advantage_flag for s in checked)
    n_adv = sum(s.advantage_flag for s in samples)
    ok = max_err < cf.CHECK_TOL and disagreements == 0
    emit({
        "example": args.example,
        "grid": args.grid,
        "points": len(samples),
        "advantage_points": n_adv,
        "advantage_fraction": n_adv / len(samples),
        "checked_points": len(checked),
        "max_check_error": max_err,
        "flag_disagreements": disagreements,
        "out": args.out,
    })
    return EXIT_OK if ok else EXIT_FAIL


def _optimize_target(args) -> tuple[SwitchChannel, dict]:
    if args.channel is not None:
        if args.example is not None:
            raise UsageError("give either --example or --channel, not both")
        e = parse_channel(args.channel)
        f = parse_channel(args.channel2) if args.channel2 else e
        try:
            sw = nested_switch(args.depth, e, f)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return sw, {"channel": args.channel, "channel2": args.channel2 or args.channel, "depth": args.depth}
    if args.example is None:
        raise UsageError("give --example or --channel")
    if args.example == "negative":
        return negative_switch(), {"example": "negative"}
    params = example_params(args)
    plain, higher = cf.switches_for(args.example, params)
    if args.level == "plain":
        if len(plain) != 1:
            raise UsageError("the bbgg example has two constituent switches; use --level higher")
        return plain[0], {"example": args.example, "level": "plain", "params": params_dict(params)}
    return higher, {"example": args.example, "level": "higher", "params": params_dict(params)}


def cmd_optimize(args) -> int:
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    sw, meta = _optimize_target(args)
    out = dict(meta)
    out["order_qubits"] = sw.order_qubits
    if sw.order_qubits == 2:
        cmp = compare_product_vs_entangled(sw, restarts=args.restarts, seed=args.seed, tol=args.tol)
        result = cmp["any"]
        out["best_product_value"] = cmp["best_product"]
        out["best_product_amplitudes"] = matrix_to_pairs(cmp["product"].best_control[None, :])
    else:
        result = optimize_control(sw, restarts=args.restarts, tol=args.tol, seed=args.seed)
    out.update(result.to_dict())
    emit(out)
    return EXIT_OK


def cmd_choi(args) -> int:
    e = parse_channel(args.channel)
    meta = {}
    if args.channel2 is not None or args.depth is not None:
        f = parse_channel(args.channel2) if args.channel2 else e
        try:
            sw = nested_switch(args.depth or 1, e, f)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        ch = sw.channel
        meta = {"order_qubits": sw.order_qubits, "provenance": sw.provenance}
    else:
        ch = e
    j = choi(ch)
    w = np.linalg.eigvalsh(j)
    out = {
        "label": ch.label,
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus_count": len(ch),
        **meta,
        "cptp_residual": validate_cptp(ch).max_completeness_residual,
        "min_eigenvalue": float(w[0]),
        "psd": bool(w[0] >= -1e-9),
        "trace_condition_residual": choi_trace_residual(j, ch.dim_in, ch.dim_out),
        "rank": int(np.sum(w > 1e-9 * max(w[-1], 1e-300))),
    }
    if not args.no_matrix:
        out["choi"] = [matrix_to_pairs(row[None, :]) for row in j]
    emit(out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_params(p: argparse.ArgumentParser) -> None:
    for name in ("p0", "p1", "p2"):
        p.add_argument(f"--{name}", type=parse_number, help="Pauli probability (decimal or fraction)")
    p.add_argument("--r", type=parse_number, help="bit-flip probability")
    p.add_argument("--s", type=parse_number, help="phase-flip probability")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="switchsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check closed forms against brute-force simulation")
    p.add_argument("--example", required=True, choices=["pauli", "bitphase", "bbgg", "negative"])
    _add_params(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--haar-samples", type=int, default=1000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="advantage region over a parameter grid (CSV)")
    p.add_argument("--example", required=True, choices=["pauli", "bitphase", "bbgg"])
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--check-every", type=int, default=10, help="brute-force every Nth point; 0 disables")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("optimize", help="maximise the heralding probability over control states")
    p.add_argument("--example", choices=["pauli", "bitphase", "bbgg", "negative"])
    _add_params(p)
    p.add_argument("--channel", help="channel spec, e.g. bitflip:1/2 or pauli:0.5,0.3,0.2")
    p.add_argument("--channel2", help="second channel spec (defaults to --channel)")
    p.add_argument("--depth", type=int, default=1, help="nesting depth for --channel switches")
    p.add_argument("--level", choices=["plain", "higher"], default="higher")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("choi", help="print the Choi matrix of a channel or switch")
    p.add_argument("channel")
    p.add_argument("channel2", nargs="?")
    p.add_argument("--depth", type=int)
    p.add_argument("--no-matrix", action="store_true")
    p.set_defaults(func=cmd_choi)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
