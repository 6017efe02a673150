"""Command-line front end.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
failure.  Data go to stdout (or ``--out``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from contextlib import contextmanager

from . import full, internal, rates, spectrum
from .errors import EitCoolError, NumericalError
from .presets import PRESET_NAMES, preset
from .scenario import Scenario, dump_scenario, load_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def resolve_scenario(source: str) -> Scenario:
    """Preset name, or path to a JSON scenario file."""
    if source in PRESET_NAMES:
        return preset(source)
    return load_scenario(source)


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@contextmanager
def _sink(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _emit(args, csv_text: str, summary: dict, json_payload: dict):
    if args.format == "json":
        with _sink(args.out) as fh:
            fh.write(_json(json_payload))
    else:
        with _sink(args.out) as fh:
            fh.write(csv_text)
        if args.summary:
            with _sink(args.summary) as fh:
                fh.write(_json(summary))


def primary_detuning(s: Scenario) -> float:
    return s.lowers[s.coupling_positions[0]].drive.detuning


# -- subcommands -------------------------------------------------------------

def cmd_spectrum(args):
    s = resolve_scenario(args.scenario)
    base = primary_detuning(s)
    nu = s.trap.frequency
    dmin = -2 * nu if args.dmin is None else args.dmin
    dmax = 2 * nu if args.dmax is None else args.dmax
    trace = internal.absorption_sweep(s, base + dmin, base + dmax, args.points)
    feats = internal.find_spectrum_features(trace).to_dict() if len(trace) >= 3 else {}
    summary = {
        "reference_detuning": base,
        "features": feats,
        "features_relative": {
            k: [x - base for x in v] for k, v in feats.items() if isinstance(v, list)
        },
    }
    payload = {
        "delta3": [float(x) for x in trace.delta3],
        "absorption": [float(y) for y in trace.absorption],
        **summary,
    }
    _emit(args, trace.to_csv(), summary, payload)


def cmd_conditions(args):
    s = resolve_scenario(args.scenario)
    delta2, delta3, nu = rates.scenario_optimal_conditions(s)
    out = {
        "delta1": primary_detuning(s),
        "delta2": delta2,
        "delta3": delta3,
        "nu": nu,
        "trap_frequency": s.trap.frequency,
        "trap_residual": rates.trap_matched_residual(s),
    }
    with _sink(args.out) as fh:
        fh.write(_json(out))


def _rates_payload(r: rates.RateCoefficients):
    w = r.a_minus - r.a_plus
    return {
        "a_plus": r.a_plus,
        "a_minus": r.a_minus,
        "w": w,
        "n_ss": r.a_plus / w if w > 0 else None,
    }


def cmd_rates(args):
    s = resolve_scenario(args.scenario)
    try:
        _, _, nu_opt = rates.scenario_optimal_conditions(s)
        residual = rates.trap_matched_residual(s)
    except EitCoolError:
        nu_opt = residual = None
    if args.numeric:
        num = spectrum.numeric_rates(s)
        try:
            ana = rates.rate_coefficients(s)
        except EitCoolError:
            ana = None
        out = _rates_payload(num)
        out["method"] = "regression"
        if ana is not None:
            scale = max(ana.a_minus, ana.a_plus)
            gap = max(abs(num.a_plus - ana.a_plus), abs(num.a_minus - ana.a_minus))
            out["residual_regression_vs_analytic"] = gap / scale if scale > 0 else gap
        else:
            out["residual_regression_vs_analytic"] = None
    else:
        out = _rates_payload(rates.rate_coefficients(s))
    out["nu_optimal"] = nu_opt
    out["trap_residual"] = residual
    with _sink(args.out) as fh:
        fh.write(_json({k: _num(v) if k != "method" else v for k, v in out.items()}))


def _analytic_summary(s: Scenario):
    try:
        r = rates.rate_coefficients(s)
    except EitCoolError:
        return None, None
    w = r.a_minus - r.a_plus
    return w, (r.a_plus / w if w > 0 else None)


def cmd_cool(args):
    s = resolve_scenario(args.scenario)
    if args.fock_cutoff is not None:
        s = s.with_trap(fock_cutoff=args.fock_cutoff)
    t_max = args.t_max if args.t_max is not None else 1e5 / s.cooling.decay.rate
    analytic_w, analytic_n = _analytic_summary(s)

    if args.method == "full":
        L = full.build_full_liouvillian(s, angular_nodes_count=args.angular_nodes, max_dim=args.max_dim)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RuntimeWarning)
            rho0 = full.initial_state(s, L)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        trace = full.evolve(L, rho0, t_max, args.samples, args.substeps, args.spacing)
        _, n_ss = full.steady_state_full(L)
        t, mean_n = trace.t, trace.mean_n
        csv_text = trace.to_csv()
        extra = {"pop_e": [float(x) for x in trace.pop_e], "trace_error": [float(x) for x in trace.trace_error]}
    else:
        r = rates.rate_coefficients(s)
        n_max = s.trap.fock_cutoff - 1
        p0 = rates.MotionalDistribution.thermal(s.initial_mean_n, n_max)
        steps = full.sample_steps(args.substeps, args.samples, args.spacing)
        t = steps * (t_max / args.substeps)
        mean_n = rates.rate_equation_trace(r, p0, t)
        w = r.a_minus - r.a_plus
        n_ss = r.a_plus / w if w > 0 else math.nan
        trace = full.CoolingTrace(
            t, mean_n, [math.nan] * len(t), [0.0] * len(t), [0.0] * len(t), [0.0] * len(t), t_max / args.substeps
        )
        csv_text = trace.to_csv()
        extra = {}

    try:
        fitted = full.fit_cooling_rate(trace, n_ss)
    except NumericalError as exc:
        print(f"warning: {exc}", file=sys.stderr)
        fitted = None
    summary = {
        "method": args.method,
        "n_ss": _num(n_ss),
        "fitted_rate": _num(fitted),
        "analytic_w": _num(analytic_w),
        "analytic_n_ss": _num(analytic_n),
        "t_max": t_max,
    }
    payload = {"t": [float(x) for x in t], "mean_n": [float(x) for x in mean_n], **extra, "summary": summary}
    _emit(args, csv_text, summary, payload)


def cmd_preset(args):
    if args.list or not args.name:
        sys.stdout.write("\n".join(PRESET_NAMES) + "\n")
        return
    with _sink(args.out) as fh:
        fh.write(dump_scenario(preset(args.name)) + "\n")


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eitcool", description="EIT ground-state cooling simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=True):
        sp.add_argument("--scenario", required=True, help="preset name or path to a JSON scenario")
        sp.add_argument("--out", help="output file (default stdout)")
        if formats:
            sp.add_argument("--format", choices=("csv", "json"), default="csv")
            sp.add_argument("--summary", help="write the JSON summary here (csv format)")

    sp = sub.add_parser("spectrum", help="cooling-laser absorption spectrum")
    common(sp)
    sp.add_argument("--dmin", type=float, help="lower bound, offset from the primary detuning")
    sp.add_argument("--dmax", type=float, help="upper bound, offset from the primary detuning")
    sp.add_argument("--points", type=int, default=401)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("conditions", help="optimal detunings and trap frequency")
    common(sp, formats=False)
    sp.set_defaults(func=cmd_conditions)

    sp = sub.add_parser("rates", help="heating/cooling rate coefficients")
    common(sp, formats=False)
    sp.add_argument("--numeric", action="store_true", help="use the fluctuation spectrum")
    sp.set_defaults(func=cmd_rates)

    sp = sub.add_parser("cool", help="cooling dynamics")
    common(sp)
    sp.add_argument("--method", choices=("full", "rate"), default="full")
    sp.add_argument("--t-max", type=float, help="default 1e5 / cooling decay rate")
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--substeps", type=int, default=2000)
    sp.add_argument("--spacing", choices=("log", "linear"), default="log")
    sp.add_argument("--angular-nodes", type=int, default=full.DEFAULT_ANGULAR_NODES)
    sp.add_argument("--fock-cutoff", type=int)
    sp.add_argument("--max-dim", type=int, default=full.DEFAULT_MAX_DIM)
    sp.set_defaults(func=cmd_cool)

    sp = sub.add_parser("preset", help="list or print presets")
    sp.add_argument("name", nargs="?")
    sp.add_argument("--list", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (EitCoolError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
