"""Command-line interface.

Every command writes a JSON object (or, for ``simulate``, CSV) to stdout or
``--output`` and diagnostics to stderr. Exit codes: 0 success, 1 other
error, 2 malformed specification, 3 divergent K_g, 4 degenerate sample,
5 sample budget exceeded, 6 unstable finite differences, 7 no p-value below
the slope threshold.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .densities import from_json
from .errors import BudgetError, SpecError, TailCorrectError
from .kg import METHODS, KgResult, TestSpec, compute_kg
from .kg.bounds import error_bounds
from .statistics import StatisticValue, compute_statistic, pvalues
from .simulation import (SimConfig, builtin_scenarios, estimate_kg_slope, get_scenario,
                         read_pvalues, run_simulation, write_pvalues)

SCHEMA = "tailcorrect/1"
DEFAULT_MAX_SAMPLES = 10**8


def _load_density(text: str):
    if text is None:
        raise SpecError("--density is required")
    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    return from_json(text)


def _test_spec(args) -> TestSpec:
    if args.test is None:
        raise SpecError("--test is required")
    if args.test in ("ost", "one-sample-t"):
        return TestSpec(args.test, n=args.n)
    return TestSpec(args.test, n1=args.n1, n2=args.n2)


def _provenance(payload: dict, seed=None) -> dict:
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()
    return {"spec_sha256": digest, "seed": seed, "version": __version__}


def _spec_payload(args, g=None, spec=None) -> dict:
    out = {"command": args.command}
    if g is not None:
        out["density"] = g.to_json()
    if spec is not None:
        out["test"] = spec.to_json()
    return out


def _emit(obj: dict, args) -> None:
    text = json.dumps(obj, indent=2, default=_json_default) + "\n"
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


# ------------------------------------------------------------------ commands


def cmd_kg(args) -> int:
    g = _load_density(args.density)
    spec = _test_spec(args)
    res = compute_kg(g, spec, args.method, mc_samples=args.mc_samples, seed=args.seed, tol=args.tol)
    payload = _spec_payload(args, g, spec)
    _emit({"schema": SCHEMA, **res.to_json(), "test": spec.to_json(),
           "provenance": _provenance(payload, args.seed)}, args)
    return 0


def _read_samples(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].replace(",", " ").split()
            if line:
                rows.append([float(v) for v in line])
    return rows


def cmd_pval(args) -> int:
    spec = _test_spec(args)
    if (args.t_star is None) == (args.data is None):
        raise SpecError("give exactly one of --t-star and --data")
    if args.t_star is not None:
        if spec.kind == "welch" and args.welch_df is None:
            raise SpecError("a Welch t* needs --welch-df (or pass --data)")
        stat = StatisticValue(float(args.t_star), spec, args.welch_df)
    else:
        rows = _read_samples(args.data)
        values = [v for r in rows for v in r]
        stat = compute_statistic(spec, values)

    g = None
    if args.kg is not None:
        kg = KgResult(args.kg, "user", 0.0)
    elif args.density is not None:
        g = _load_density(args.density)
        kg = compute_kg(g, spec, mc_samples=args.mc_samples, seed=args.seed)
    else:
        raise SpecError("give --kg or --density to correct the p-value")
    pair = pvalues(stat, kg)
    if pair.outside_regime:
        print("note: corrected p-value exceeds 1; t* is outside the tail approximation regime",
              file=sys.stderr)
    payload = _spec_payload(args, g, spec)
    payload["t_star"] = stat.t_star
    _emit({"schema": SCHEMA, **stat.to_json(), "kg": kg.value, **pair.to_json(),
           "tail": "upper", "provenance": _provenance(payload, args.seed)}, args)
    return 0


def _sim_config(args) -> SimConfig:
    if args.scenario:
        cfg = get_scenario(args.scenario)
    else:
        cfg = SimConfig(_test_spec(args), _load_density(args.density))
    return cfg.with_overrides(zoom=args.zoom, n_samples=args.samples, seed=args.seed,
                              grid_points=args.grid_points)


def cmd_simulate(args) -> int:
    cfg = _sim_config(args)
    draws = cfg.n_samples * cfg.spec.n
    if draws > args.max_samples and not args.force:
        raise BudgetError(f"{cfg.n_samples} samples x {cfg.spec.n} values = {draws:.3g} draws "
                          f"exceeds --max-samples {args.max_samples:.3g}; pass --force to run anyway")
    kg = KgResult(args.kg, "user", 0.0) if args.kg is not None else \
        compute_kg(cfg.density, cfg.spec, mc_samples=args.mc_samples, seed=args.seed)
    keep = args.keep_below if args.pvalues_out else None
    series = run_simulation(cfg, kg, threads=args.threads, keep_pvalues_below=keep)
    if args.pvalues_out:
        write_pvalues(args.pvalues_out, series.kept_pvalues, series.n_samples)

    side = series.sidecar(cfg)
    side.update({"schema": SCHEMA, "kg_method": kg.method, "kg_abs_error": kg.abs_error,
                 "provenance": _provenance({"command": "simulate", **cfg.to_json()}, cfg.seed)})
    if args.format == "json":
        body = {**side, "grid": series.grid, "ecdf_raw": series.ecdf_raw,
                "ecdf_corrected": series.ecdf_corrected}
        if series.ecdf_welch is not None:
            body["ecdf_welch"] = series.ecdf_welch
        _emit(body, args)
        return 0
    csv = series.to_csv()
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(csv)
        with open(args.sidecar or args.output + ".json", "w") as fh:
            json.dump(side, fh, indent=2, default=_json_default)
    else:
        sys.stdout.write(csv)
        if args.sidecar:
            with open(args.sidecar, "w") as fh:
                json.dump(side, fh, indent=2, default=_json_default)
    return 0


def cmd_bounds(args) -> int:
    if args.u is None:
        raise SpecError("--u is required")
    g = _load_density(args.density)
    spec = _test_spec(args)
    kw = {"seed": args.seed, "mc_samples": args.mc_samples} if spec.kind == "f" else {}
    eb = error_bounds(spec, g, args.u, **kw)
    _emit({"schema": SCHEMA, **eb.to_json(), "test": spec.to_json(),
           "provenance": _provenance(_spec_payload(args, g, spec), args.seed)}, args)
    return 0


def cmd_estimate(args) -> int:
    p, n_total = read_pvalues(args.pvalues)
    if args.n_total is not None:
        n_total = args.n_total
    est = estimate_kg_slope(p, args.tau, n_total=n_total)
    if est.inconsistent:
        print(f"warning: estimate at tau={est.tau:g} disagrees with tau/5; "
              "tau is probably too large", file=sys.stderr)
    with open(args.pvalues, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    _emit({"schema": SCHEMA, **est.to_json(),
           "provenance": {"input_sha256": digest, "seed": None, "version": __version__}}, args)
    return 0


def cmd_scenarios(args) -> int:
    rows = [cfg.to_json() for cfg in builtin_scenarios()]
    _emit({"schema": SCHEMA, "scenarios": rows,
           "provenance": {"spec_sha256": None, "seed": None, "version": __version__}}, args)
    return 0


# -------------------------------------------------------------------- parser


def _add_test_flags(p):
    p.add_argument("--test", help="ost | tst | welch | f")
    p.add_argument("--n", type=int, help="sample size (one-sample test)")
    p.add_argument("--n1", type=int, help="first sample size")
    p.add_argument("--n2", type=int, help="second sample size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailcorrect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kg", help="compute the tail constant K_g")
    _add_test_flags(p)
    p.add_argument("--density", help="density spec: JSON text or path to a JSON file")
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--tol", type=float, help="relative quadrature tolerance")
    p.add_argument("--mc-samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_kg)

    p = sub.add_parser("pval", help="raw and corrected upper-tail p-values")
    _add_test_flags(p)
    p.add_argument("--t-star", type=float)
    p.add_argument("--welch-df", type=float)
    p.add_argument("--data", help="file with the sample (two-sample tests: one line per sample)")
    p.add_argument("--kg", type=float, help="use this K_g instead of computing it")
    p.add_argument("--density")
    p.add_argument("--mc-samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_pval)

    p = sub.add_parser("simulate", help="eCDFs of raw and corrected p-values")
    _add_test_flags(p)
    p.add_argument("--scenario", help="name from the 'scenarios' command")
    p.add_argument("--density")
    p.add_argument("--zoom", type=int)
    p.add_argument("--samples", type=int, help="N (default 10000 x zoom)")
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--kg", type=float)
    p.add_argument("--mc-samples", type=int, default=10**6)
    p.add_argument("--max-samples", type=float, default=DEFAULT_MAX_SAMPLES,
                   help="refuse runs drawing more scalar values than this")
    p.add_argument("--force", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.add_argument("--sidecar", help="JSON sidecar path (default <output>.json)")
    p.add_argument("--pvalues-out", help="also write raw p-values below --keep-below here")
    p.add_argument("--keep-below", type=float, default=1e-2)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="finite-u error bound and relative-error constant")
    _add_test_flags(p)
    p.add_argument("--density")
    p.add_argument("--u", type=float)
    p.add_argument("--mc-samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("estimate", help="estimate K_g from simulated raw p-values")
    p.add_argument("--pvalues", required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--n-total", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("scenarios", help="list built-in simulation scenarios")
    p.add_argument("--output")
    p.set_defaults(func=cmd_scenarios)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TailCorrectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return SpecError.exit_code


if __name__ == "__main__":
    sys.exit(main())
