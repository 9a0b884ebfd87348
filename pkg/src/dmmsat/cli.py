"""Command-line entry point: ``dmmsat {generate,solve,verify,bench,fit}``.

Exit codes: 0 success / threshold reached, 1 threshold not reached (or
unsatisfied clauses in ``verify``), 2 input error, 3 I/O error, 4 numerical
failure, 5 insufficient data for a fit.

Parameters resolve as defaults < ``--config`` file < flags; ``--print-config``
writes the resolved parameters as a loadable ``key=value`` file to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

from . import bench, config, dimacs, dmm, localsearch
from .errors import InfeasibleBalance, InsufficientData, LengthMismatch, NonFiniteState, ParseError
from .instance import count_unsat, expand_instance, generate_balanced_xorsat

EXIT_OK, EXIT_NOT_REACHED, EXIT_INPUT, EXIT_IO, EXIT_NUMERIC, EXIT_NODATA = 0, 1, 2, 3, 4, 5

_FIELD_TYPES = {"xl_max": float, "max_flips": int}

# solve: shared keys, then every DmmParams field, then SLS-only fields
_SOLVE_SHARED = {"solver": "dmm", "seed": 0, "threshold_fraction": 0.015, "time_budget": None}
_SLS_ONLY = ("noise", "max_flips", "max_restarts")


def _err(msg):
    print(f"dmmsat: {msg}", file=sys.stderr)


def _field_kind(name, default):
    if name in _FIELD_TYPES:
        return _FIELD_TYPES[name]
    if name == "time_budget":
        return float
    return type(default)


def _solve_defaults():
    d = dict(_SOLVE_SHARED)
    d.update(asdict(dmm.DmmParams()))
    sls = asdict(localsearch.SlsParams())
    d.update({k: sls[k] for k in _SLS_ONLY})
    return d


def _merge(defaults, file_values, flag_values):
    out = dict(defaults)
    for key, text in file_values.items():
        if key not in defaults:
            raise ValueError(f"unknown config key {key!r}")
        out[key] = config.coerce(key, text, defaults[key], _field_kind(key, defaults[key]))
    for key, value in flag_values.items():
        if value is not None:
            out[key] = value
    return out


def _add_param_flags(p, defaults):
    for key, default in defaults.items():
        kind = _field_kind(key, default)
        flag = "--" + key.replace("_", "-")
        if kind is bool:
            p.add_argument(flag, dest=key, default=None, type=lambda s, k=key: config.coerce(k, s, False, bool),
                           metavar="BOOL")
        else:
            p.add_argument(flag, dest=key, default=None, type=kind, metavar=kind.__name__.upper())


def cmd_generate(args):
    try:
        xor = generate_balanced_xorsat(args.n, args.rho, args.seed)
    except (InfeasibleBalance, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    f = expand_instance(xor)
    stem = f"d{args.n}_s{args.seed}"
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        note = [f"delta-Max-E3SAT n={xor.n_vars} rho_xor={args.rho} seed={args.seed} m_xor={xor.n_clauses}"]
        (out / f"{stem}.xcnf").write_text(dimacs.emit_xcnf(xor, note))
        dimacs.write_cnf(out / f"{stem}.cnf", f, note)
        dimacs.write_metadata(out / f"{stem}.json", xor)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    print(f"wrote {out / stem}.{{xcnf,cnf,json}}: n={f.n_vars} m={f.n_clauses} rho={f.density:.6g}")
    return EXIT_OK


def _load_cnf(path):
    try:
        return dimacs.read_cnf(path), None
    except ParseError as exc:
        _err(f"{path}: {exc}")
        return None, EXIT_INPUT
    except ValueError as exc:
        _err(f"{path}: {exc}")
        return None, EXIT_INPUT
    except OSError as exc:
        _err(str(exc))
        return None, EXIT_IO


def cmd_solve(args):
    defaults = _solve_defaults()
    try:
        file_values = config.read_kv(args.config) if args.config else {}
        cfg = _merge(defaults, file_values, {k: getattr(args, k) for k in defaults})
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT
    if cfg["solver"] not in bench.SOLVERS:
        _err(f"unknown solver {cfg['solver']!r}")
        return EXIT_INPUT
    if args.print_config:
        sys.stdout.write(config.format_kv(cfg))
        if args.cnf is None:
            return EXIT_OK
    if args.cnf is None:
        _err("solve needs a CNF file")
        return EXIT_INPUT
    f, code = _load_cnf(args.cnf)
    if f is None:
        return code
    try:
        if cfg["solver"] == "dmm":
            p = dmm.DmmParams(**{k: cfg[k] for k in dmm.DmmParams.field_names()})
            r = dmm.solve_dmm(f, p, cfg["threshold_fraction"], cfg["seed"], time_budget=cfg["time_budget"])
        else:
            p = localsearch.SlsParams(seed=cfg["seed"], threshold_fraction=cfg["threshold_fraction"],
                                      **{k: cfg[k] for k in _SLS_ONLY})
            r = localsearch.solve_sls(f, p, time_budget=cfg["time_budget"])
    except NonFiniteState as exc:
        _err(str(exc))
        return EXIT_NUMERIC
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT
    d = r.to_dict()
    if not args.trajectory:
        d.pop("trajectory")
    print(json.dumps(d))
    try:
        if args.json:
            Path(args.json).write_text(r.to_json(include_assignment=True) + "\n")
        if args.assignment:
            Path(args.assignment).write_text(r.v_lines() + "\n")
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    return EXIT_OK if r.reached_threshold else EXIT_NOT_REACHED


def cmd_verify(args):
    f, code = _load_cnf(args.cnf)
    if f is None:
        return code
    try:
        bits = dimacs.parse_assignment(Path(args.assignment).read_text(), f.n_vars)
        u = count_unsat(f, bits)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except (ParseError, LengthMismatch) as exc:
        _err(f"{args.assignment}: {exc}")
        return EXIT_INPUT
    print(u)
    return EXIT_OK if u == 0 else EXIT_NOT_REACHED


def _sweep_defaults():
    spec = bench.SweepSpec()
    d = {f.name: getattr(spec, f.name) for f in fields(spec) if f.name not in ("dmm", "sls")}
    d.update({f"dmm.{k}": v for k, v in asdict(spec.dmm).items()})
    d.update({f"sls.{k}": v for k, v in asdict(spec.sls).items() if k in _SLS_ONLY})
    return d


def sweep_spec_from_kv(values: dict) -> bench.SweepSpec:
    """Build a :class:`~dmmsat.bench.SweepSpec` from raw ``key=value`` strings."""
    defaults = _sweep_defaults()
    cfg = _merge(defaults, {}, {})
    for key, text in values.items():
        if key not in defaults:
            raise ValueError(f"unknown config key {key!r}")
        short = key.split(".", 1)[-1]
        cfg[key] = config.coerce(key, text, defaults[key], _field_kind(short, defaults[key]))
    return _spec_from_cfg(cfg)


def _spec_from_cfg(cfg):
    top = {k: v for k, v in cfg.items() if "." not in k}
    top["solvers"] = tuple(top["solvers"])
    top["n_values"] = tuple(int(n) for n in top["n_values"])
    for s in top["solvers"]:
        if s not in bench.SOLVERS:
            raise ValueError(f"unknown solver {s!r}")
    dmm_p = dmm.DmmParams(**{k[4:]: v for k, v in cfg.items() if k.startswith("dmm.")})
    sls_p = localsearch.SlsParams(**{k[4:]: v for k, v in cfg.items() if k.startswith("sls.")})
    return bench.SweepSpec(dmm=dmm_p, sls=sls_p, **top)


def sweep_spec_to_kv(spec: bench.SweepSpec) -> str:
    d = {f.name: getattr(spec, f.name) for f in fields(spec) if f.name not in ("dmm", "sls")}
    d.update({f"dmm.{k}": v for k, v in asdict(spec.dmm).items()})
    d.update({f"sls.{k}": v for k, v in asdict(spec.sls).items() if k in _SLS_ONLY})
    return config.format_kv(d)


def cmd_bench(args):
    try:
        values = config.read_kv(args.spec) if args.spec else {}
        spec = sweep_spec_from_kv(values)
        if args.workers is not None:
            spec.workers = args.workers
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT
    if args.print_config:
        sys.stdout.write(sweep_spec_to_kv(spec))
        if args.out is None:
            return EXIT_OK
    if args.out is None:
        _err("bench needs an output CSV (-o)")
        return EXIT_INPUT

    def progress(rec):
        t = "-" if rec.time_to_threshold is None else f"{rec.time_to_threshold:.4g}s"
        print(f"{rec.solver:<4} n={rec.n:<7} seed={rec.seed:<20} {rec.status:<17} t={t:<10} best={rec.best_unsat}",
              flush=True)

    try:
        records = bench.run_sweep(spec, args.out, progress=None if args.quiet else progress)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    print(f"{len(records)} records in {args.out}")
    return EXIT_OK


def cmd_fit(args):
    try:
        records = bench.read_csv(Path(args.csv))
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        _err(f"{args.csv}: {exc}")
        return EXIT_INPUT
    models = ("power_law", "exponential") if args.model == "both" else (args.model,)
    solvers = sorted({r.solver for r in records}) if args.solver is None else [args.solver]
    out = []
    try:
        for solver in solvers:
            for model in models:
                ft = bench.fit_scaling(records, model, solver)
                out.append({"solver": solver, **ft.to_dict()})
    except InsufficientData as exc:
        _err(f"InsufficientData: {exc}")
        return EXIT_NODATA
    if args.json:
        print(json.dumps(out))
    else:
        print(f"{'solver':<6} {'model':<12} {'slope':>12} {'intercept':>12} {'r2':>8} {'points':>6}")
        for d in out:
            print(f"{d['solver']:<6} {d['model']:<12} {d['slope']:>12.6g} {d['intercept']:>12.6g} "
                  f"{d['r_squared']:>8.4f} {d['n_points']:>6}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="dmmsat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a balanced delta-Max-E3SAT instance")
    g.add_argument("-n", type=int, required=True, help="number of variables")
    g.add_argument("--rho", type=float, default=1.25, help="XOR clause density (default 1.25)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run a solver on a DIMACS CNF file")
    s.add_argument("cnf", nargs="?")
    s.add_argument("--config", help="key=value parameter file")
    s.add_argument("--print-config", action="store_true", help="print the resolved parameters")
    s.add_argument("--json", help="write the full result (with assignment) as JSON")
    s.add_argument("--assignment", help="write the best assignment as 'v' lines")
    s.add_argument("--trajectory", action="store_true", help="include the trajectory in stdout")
    _add_param_flags(s, _solve_defaults())
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="count clauses an assignment leaves unsatisfied")
    v.add_argument("cnf")
    v.add_argument("assignment")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run a time-to-threshold sweep")
    b.add_argument("spec", nargs="?", help="key=value sweep specification")
    b.add_argument("-o", "--out", help="output CSV (appended to; finished cells are skipped)")
    b.add_argument("--workers", type=int)
    b.add_argument("--print-config", action="store_true")
    b.add_argument("--quiet", action="store_true")
    b.set_defaults(func=cmd_bench)

    ft = sub.add_parser("fit", help="fit scaling models to a sweep CSV")
    ft.add_argument("csv")
    ft.add_argument("--model", choices=("power_law", "exponential", "both"), default="both")
    ft.add_argument("--solver", choices=bench.SOLVERS)
    ft.add_argument("--json", action="store_true")
    ft.set_defaults(func=cmd_fit)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
