"""Command-line entry point: ``cohpurify <command> [options]``.

Commands: predict, simulate, sweep, compare, network-info.

Exit codes: 0 success, 1 comparison failed, 2 usage error,
3 numerical or insufficient-acceptance error.

``--config FILE`` reads flat ``key = value`` lines (keys are flag names
without the leading dashes); explicit flags override the file. The default
worker count comes from ``COHPURIFY_WORKERS``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict
from typing import Optional, Sequence

import numpy as np

from . import analytics as an
from .detectors import (
    DETECTOR_GRAMMAR, NumericalIntegrationError, SingularParameterError, format_detector, parse_detector,
)
from .engine import (
    ClassicalPmpConfig, InsufficientAcceptanceError, SimulationConfig, copy_symmetry_check,
    simulate_classical_pmp, simulate_purification, simulate_tailored,
)
from .optics import build_cascade, schedule_labels, two_copy_network, unitarity_error
from .phase_space import NoiseKind, PreparationSpec
from .reports import DEFAULT_RANGE, SCENARIOS, SweepSpec, compare, sweep

SCHEMA_VERSION = 1
WORKERS_ENV = "COHPURIFY_WORKERS"
EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Locale-independent, 12 significant digits."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


# --- argument types --------------------------------------------------------

def _detector_arg(text: str):
    try:
        return parse_detector(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers like 1,3 but got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _range_arg(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step (e.g. 0:5:0.1) but got {text!r}") from None
    if not step > 0 or start > stop:
        raise argparse.ArgumentTypeError(f"need step > 0 and start <= stop in {text!r}")
    return start, stop, step


def _quantity_list(text: str) -> list[str]:
    qs = [q.strip() for q in text.split(",") if q.strip()]
    bad = [q for q in qs if q not in an.QUANTITIES]
    if bad or not qs:
        raise argparse.ArgumentTypeError(f"unknown quantities {bad}; choose from {','.join(an.QUANTITIES)}")
    return qs


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed in [0, 2^64), got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2^64), got {text!r}")
    return v


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cohpurify", description=__doc__.split("\n")[0])
    parser.add_argument("--config", help="flat key = value file mirroring the command's flags")
    sub = parser.add_subparsers(dest="command", required=True)

    def output_opts(p, default_format="json"):
        p.add_argument("--format", choices=("json", "csv"), default=default_format)
        p.add_argument("--output", "-o", help="write here instead of standard output")

    def mc_opts(p, samples=1_000_000):
        p.add_argument("--samples", type=_positive_int, default=samples)
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--workers", type=_positive_int, default=_default_workers())

    p = sub.add_parser("predict", help="closed-form predictions (no randomness)")
    p.add_argument("--n1", type=float)
    p.add_argument("--n2", type=float)
    p.add_argument("--n", type=_float_list, help="comma-separated N_i for M >= 2 copies (ideal APDs)")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--signal-photons", type=float, default=None,
                   help="also report capacity for this mean signal photon number")
    output_opts(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of N' and S")
    p.add_argument("--protocol", choices=("purify", "tailored", "pmp"), default="purify")
    p.add_argument("--copies", type=_positive_int, default=None)
    p.add_argument("--noise", choices=("isotropic", "phase"), default="isotropic")
    p.add_argument("--n", type=_float_list, required=True, help="comma-separated N_i, one per copy")
    p.add_argument("--detector", type=_detector_arg, default=parse_detector("apd:eta=1,pd=0"),
                   help=f"grammar: {DETECTOR_GRAMMAR}")
    p.add_argument("--target", type=_float_list, default=[0.0, 0.0], help="target amplitude as re,im")
    p.add_argument("--delta", type=float, default=0.01, help="agreement threshold for --protocol pmp")
    p.add_argument("--pmp-method", choices=("conditional", "rejection"), default="conditional")
    p.add_argument("--symmetry-check", action="store_true",
                   help="also compare the two attenuator output ports (two copies only)")
    mc_opts(p)
    output_opts(p)

    p = sub.add_parser("sweep", help="tabulate quantities over an (N1, N2) grid")
    rng = ":".join(fmt(v) for v in DEFAULT_RANGE)
    p.add_argument("--n1-range", type=_range_arg, default=DEFAULT_RANGE, help=f"start:stop:step (default {rng})")
    p.add_argument("--n2-range", type=_range_arg, default=DEFAULT_RANGE, help=f"start:stop:step (default {rng})")
    p.add_argument("--quantities", type=_quantity_list, default=["n_apd", "s_apd"])
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--mode", choices=("analytic", "mc"), default="analytic")
    p.add_argument("--signal-photons", type=float, default=1.0, help="signal photons for the capacity column")
    p.add_argument("--delta", type=float, default=0.01, help="PMP threshold in mc mode")
    mc_opts(p, samples=100_000)
    output_opts(p, default_format="csv")

    p = sub.add_parser("compare", help="Monte Carlo vs closed-form z-scores")
    p.add_argument("--scenarios", default="all", help=f"'all' or comma-separated from {','.join(SCENARIOS)}")
    mc_opts(p, samples=200_000)
    output_opts(p)

    p = sub.add_parser("network-info", help="print the mixing cascade")
    p.add_argument("--copies", type=_positive_int, required=True)
    output_opts(p)
    return parser


def _read_config(path: str) -> list[str]:
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"--config {path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if value.lower() in ("true", "yes"):
                tokens.append(flag)
            elif value.lower() not in ("false", "no"):
                tokens += [flag, value]
    return tokens


def _splice_config(argv: list[str]) -> list[str]:
    """Move ``--config FILE`` contents right after the subcommand so explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config requires a file path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    commands = {"predict", "simulate", "sweep", "compare", "network-info"}
    pos = next((k for k, tok in enumerate(rest) if tok in commands), None)
    if pos is None:
        raise UsageError("--config given without a command")
    try:
        extra = _read_config(path)
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path!r}: {exc}") from None
    return rest[:pos + 1] + extra + rest[pos + 1:]


# --- output ----------------------------------------------------------------

def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(command: str, inputs: dict, results) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "inputs": inputs, "results": results}
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=True) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def _flat_csv(results: dict) -> str:
    return _csv(["key", "value"], [[k, v] for k, v in results.items()])


# --- commands --------------------------------------------------------------

def cmd_predict(args) -> int:
    if args.n is not None:
        if args.n1 is not None or args.n2 is not None:
            raise UsageError("--n cannot be combined with --n1/--n2")
        if len(args.n) < 2:
            raise UsageError("--n needs at least two values (M >= 2)")
        results = an.predict_multi(args.n)
        inputs = {"n": args.n}
    else:
        if args.n1 is None or args.n2 is None:
            raise UsageError("predict needs --n1 and --n2 (or --n for M copies)")
        results = an.predict((args.n1, args.n2), args.eta)
        inputs = {"n1": args.n1, "n2": args.n2, "eta": args.eta}
    if args.signal_photons is not None:
        results["capacity"] = an.capacity(args.signal_photons, results["n_apd"])
        inputs["signal_photons"] = args.signal_photons
    text = _json("predict", inputs, results) if args.format == "json" else _flat_csv(results)
    _emit(text, args.output)
    return EXIT_OK


def _result_dict(res) -> dict:
    d = asdict(res)
    out = {}
    for key in ("n_prime", "n_x", "n_p", "success"):
        out[key] = d[key]["value"]
        out[f"{key}_se"] = d[key]["stderr"]
    out["samples_used"] = d["samples_used"]
    out["effective_sample_size"] = d["effective_sample_size"]
    out["relative_success"] = d["relative_success"]
    out["max_abs_signal_x"] = d["max_abs_signal_x"]
    return out


def cmd_simulate(args) -> int:
    ns = args.n
    copies = args.copies if args.copies is not None else len(ns)
    if copies != len(ns):
        raise UsageError(f"--copies {copies} does not match {len(ns)} values in --n")
    if len(args.target) != 2:
        raise UsageError("--target expects re,im")
    inputs = {"protocol": args.protocol, "copies": copies, "noise": args.noise, "n": ns,
              "samples": args.samples, "seed": args.seed}
    symmetry = None
    if args.protocol == "pmp":
        if copies != 2 or args.noise != "isotropic":
            raise UsageError("--protocol pmp needs exactly two --n values and --noise isotropic")
        inputs.update(delta=args.delta, pmp_method=args.pmp_method)
        res = simulate_classical_pmp(ClassicalPmpConfig(tuple(ns), args.delta, args.samples, args.seed,
                                                        args.workers, args.pmp_method))
    elif args.protocol == "tailored":
        if copies != 2 or args.noise != "isotropic":
            raise UsageError("--protocol tailored needs exactly two --n values and --noise isotropic")
        t, t0 = an.tailored_settings(tuple(ns))
        inputs.update(T=t, T0=t0)
        res = simulate_tailored(tuple(ns), args.samples, args.seed, args.workers)
    else:
        prep = PreparationSpec.from_photons(NoiseKind.parse(args.noise), ns, complex(*args.target))
        inputs.update(detector=format_detector(args.detector), target=args.target)
        cfg = SimulationConfig(prep, args.detector, build_cascade(copies), args.samples, args.seed, args.workers)
        res = simulate_purification(cfg)
        if args.symmetry_check:
            rep = copy_symmetry_check(cfg)
            symmetry = {"status": rep.status, "max_deviation": rep.max_deviation,
                        "samples": rep.samples, "reason": rep.reason}
    results = _result_dict(res)
    if symmetry is not None:
        results["copy_symmetry"] = symmetry
    if args.format == "json":
        text = _json("simulate", inputs, results)
    else:
        flat = {k: v for k, v in results.items() if not isinstance(v, dict)}
        if symmetry is not None:
            flat.update({f"copy_symmetry_{k}": v for k, v in symmetry.items()})
        text = _flat_csv(flat)
    _emit(text, args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec(args.n1_range, args.n2_range, args.quantities, args.eta, args.mode,
                     args.signal_photons, args.samples, args.seed, args.workers, args.delta)
    header, rows = sweep(spec)
    if args.format == "csv":
        text = _csv(header, rows)
    else:
        inputs = {"n1_range": list(spec.n1_range), "n2_range": list(spec.n2_range),
                  "quantities": list(spec.quantities), "eta": spec.eta, "mode": spec.mode}
        if spec.mode == "mc":
            inputs.update(samples=spec.samples, seed=spec.seed)
        text = _json("sweep", inputs, [dict(zip(header, row)) for row in rows])
    _emit(text, args.output)
    return EXIT_OK


def cmd_compare(args) -> int:
    names = None if args.scenarios == "all" else [s.strip() for s in args.scenarios.split(",") if s.strip()]
    if names is not None:
        unknown = [s for s in names if s not in SCENARIOS]
        if unknown:
            raise UsageError(f"--scenarios: unknown {unknown}; choose from {','.join(SCENARIOS)}")
    report = compare(names, args.samples, args.seed, args.workers)
    if args.format == "json":
        results = {"passed": report.passed, "max_abs_z": report.max_abs_z(),
                   "errors": report.errors, "cases": [asdict(c) for c in report.cases]}
        text = _json("compare", {"scenarios": names or list(SCENARIOS), "samples": args.samples,
                                 "seed": args.seed}, results)
    else:
        header = ["scenario", "case", "quantity", "analytic", "mc", "stderr", "z", "passed"]
        rows = [[c.scenario, c.case, c.quantity, c.analytic, c.mc, c.stderr, c.z, fmt(c.passed)]
                for c in report.cases]
        rows += [["error", e, "", math.nan, math.nan, math.nan, math.nan, "false"] for e in report.errors]
        text = _csv(header, rows)
    _emit(text, args.output)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_network_info(args) -> int:
    net = build_cascade(args.copies)
    labels = schedule_labels(net)
    if args.format == "json":
        results = {
            "copies": net.copies,
            "schedule": labels,
            "t0": net.t0,
            "matrix_re": net.matrix.real.tolist(),
            "matrix_im": net.matrix.imag.tolist(),
            "unitarity_error": unitarity_error(net.matrix),
        }
        text = _json("network-info", {"copies": args.copies}, results)
    else:
        header = [f"col{j}" for j in range(net.copies)]
        text = "# " + ", ".join(labels) + "\n" + _csv(header, net.matrix.real.tolist())
    _emit(text, args.output)
    return EXIT_OK


COMMANDS = {
    "predict": cmd_predict,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "network-info": cmd_network_info,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _splice_config(argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"cohpurify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, SingularParameterError) as exc:
        print(f"cohpurify {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InsufficientAcceptanceError, NumericalIntegrationError, ArithmeticError) as exc:
        print(f"cohpurify {args.command}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
