"""Command-line front end: ``choicewalk {gen,run,experiment,sweep}``.

Exit codes: 0 ok, 2 usage, 3 graph generation failure, 4 step cap exceeded,
5 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import secrets
import sys
from fractions import Fraction

from .errors import CapExceededError, ChoiceWalkError, GenerationError, GraphParseError
from .experiment import (
    PRESETS,
    ExperimentConfig,
    GraphSpec,
    recommend_h,
    run_experiment,
    sweep_h,
)
from .graph import (
    connectivity_radius,
    generate_complete,
    generate_rgg,
    generate_torus,
    load_edge_list,
    save_edge_list,
    stats,
)
from .metrics import improvement
from .walk import SAMPLING_MODES, Policy, run_replicate

EXIT_OK, EXIT_USAGE, EXIT_GENERATION, EXIT_CAP, EXIT_INTERNAL = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return str(value)
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".6g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _baseline_for(policy, policies):
    """ERWC(d) is compared with RWC(d) when listed; anything else with the first policy."""
    if policy.kind == "erwc":
        for p in policies:
            if p.kind == "rwc" and p.d == policy.d:
                return p
    return policies[0]


def experiment_tables(result) -> dict:
    """CSV file name -> contents for an experiment result."""
    policies = result.config.policies
    reports = result.reports
    report_rows = []
    for p in policies:
        rep = reports[p.token]
        base = _baseline_for(p, policies)
        brep = reports[base.token]
        report_rows.append([
            p.token, rep.replicates, rep.mean_cs_norm, rep.mean_mnlcs, rep.ct_norm, rep.mnlct,
            rep.bc_cs_norm, rep.bc_mnlcs, rep.cs_se_norm, rep.mnlcs_se, base.token,
            improvement(brep.mean_cs_norm, rep.mean_cs_norm),
            improvement(brep.mean_mnlcs, rep.mean_mnlcs),
        ])
    tables = {
        "report.csv": _csv_text(
            ["policy", "R", "mean_cs_norm", "mean_mnlcs", "ct_norm", "mnlct", "bc_cs_norm",
             "bc_mnlcs", "cs_se_norm", "mnlcs_se", "baseline", "improvement_cs_pct",
             "improvement_mnlcs_pct"],
            report_rows,
        ),
        "cs_dist.csv": _csv_text(
            ["policy", "rank", "cover_steps", "cover_steps_norm"],
            [[p.token, i, cs, cs / reports[p.token].n]
             for p in policies for i, cs in enumerate(reports[p.token].cs_distribution)],
        ),
        "mnl_dist.csv": _csv_text(
            ["policy", "rank", "max_node_load"],
            [[p.token, i, v] for p in policies for i, v in enumerate(reports[p.token].mnl_distribution)],
        ),
        "partial_cover.csv": _csv_text(
            ["policy", "fraction", "mean_steps_norm"],
            [[p.token, float(f), v] for p in policies
             for f, v in zip(reports[p.token].fractions, reports[p.token].partial_cover_curve)],
        ),
        "visit_hist.csv": _csv_text(
            ["policy", "bin_low", "nodes"],
            [[p.token, b, c] for p in policies
             for b, c in enumerate(reports[p.token].visit_distribution)],
        ),
    }
    return tables


def sweep_table(sweep) -> str:
    return _csv_text(["d", "h", "mean_cs_norm", "mean_mnlcs"], sweep.rows)


def _write_outputs(outdir, files: dict):
    os.makedirs(outdir, exist_ok=True)
    written = []
    try:
        for name, text in files.items():
            path = os.path.join(outdir, name)
            with open(path, "w", encoding="ascii", newline="") as fh:
                fh.write(text)
            written.append(path)
    except BaseException:
        for path in written:
            os.remove(path)
        raise
    return written


def _policy_arg(text):
    return Policy.parse(text)


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _h_values(text):
    """``2:30`` (inclusive integer range) or a comma list such as ``2,3,4.5``."""
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return [Fraction(h) for h in range(int(lo), int(hi) + 1)]
        return [Fraction(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad h values {text!r}") from None


def _graph_spec_from_args(args) -> GraphSpec:
    family = args.family
    if family == "rgg":
        if args.n is None:
            raise UsageError("--family rgg needs --n")
        return GraphSpec("rgg", n=args.n, radius=args.radius, radius_mult=args.radius_mult,
                         max_retries=args.max_retries)
    if family == "torus":
        if args.rows is None or args.cols is None:
            raise UsageError("--family torus needs --rows and --cols")
        return GraphSpec("torus", rows=args.rows, cols=args.cols)
    if family == "complete":
        if args.n is None:
            raise UsageError("--family complete needs --n")
        return GraphSpec("complete", n=args.n)
    if family == "file":
        if not args.graph_file:
            raise UsageError("--family file needs --graph-file")
        return GraphSpec("file", path=args.graph_file)
    raise UsageError("a graph family is required (--family)")


def _entropy_seed():
    return secrets.randbits(63)


def _emit(obj, stream=None):
    print(json.dumps(obj, sort_keys=True), file=stream or sys.stdout)


# ---------------------------------------------------------------- commands

def cmd_gen(args):
    seed = getattr(args, "seed", None)
    extra = {}
    if args.family == "rgg":
        if seed is None:
            seed = _entropy_seed()
        if args.radius is not None and args.radius_mult is not None:
            raise UsageError("give --radius or --radius-mult, not both")
        radius = args.radius if args.radius is not None else (
            (args.radius_mult or 2.0) * connectivity_radius(args.n))
        graph, points = generate_rgg(args.n, radius, seed, require_connected=not args.allow_disconnected,
                                     max_retries=args.max_retries)
        extra = {"seed": seed, "radius": radius}
        if args.coords:
            with open(args.coords, "w", encoding="ascii", newline="") as fh:
                fh.write(_csv_text(["node", "x", "y"], [[i, float(x), float(y)]
                                                         for i, (x, y) in enumerate(points)]))
    elif args.family == "torus":
        graph = generate_torus(args.rows, args.cols)
    else:
        graph = generate_complete(args.n)
    with open(args.out, "w", encoding="ascii", newline="") as fh:
        fh.write(save_edge_list(graph))
    info = {"n": graph.n, "m": graph.m, **stats(graph).as_dict(), **extra}
    _emit(info)
    return EXIT_OK


def cmd_run(args):
    with open(args.graph, encoding="ascii") as fh:
        graph = load_edge_list(fh.read())
    seed = args.seed if args.seed is not None else _entropy_seed()
    policy = Policy(args.policy.kind, args.policy.d, args.policy.h,
                    sampling=args.sampling, rwc_offset=args.rwc_offset)
    if not 0 <= args.start < graph.n:
        raise UsageError(f"--start must lie in 0..{graph.n - 1}")
    trace = open(args.trace, "w", encoding="ascii") if args.trace else None
    try:
        record = run_replicate(graph, policy, args.start, seed, args.step_cap, seed=seed, trace=trace)
    except CapExceededError as exc:
        _emit({"status": "cap_exceeded", "policy": policy.token, "covered": exc.covered,
               **exc.record.to_dict()})
        return EXIT_CAP
    finally:
        if trace is not None:
            trace.close()
    _emit({"status": "ok", "policy": policy.token, **record.to_dict()})
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    data = {}
    if args.preset:
        p = PRESETS[args.preset]
        data = {
            "graph": p["graph"].to_dict(),
            "policies": [x.token for x in p["policies"]],
            "replication": {k: p[k] for k in ("graphs", "starts", "runs")},
        }
    if args.family:
        data["graph"] = _graph_spec_from_args(args).to_dict()
    if args.policies:
        data["policies"] = [p.token for p in args.policies]
    rep = dict(data.get("replication", {}))
    for key in ("graphs", "starts", "runs"):
        if getattr(args, key) is not None:
            rep[key] = getattr(args, key)
    if rep:
        data["replication"] = rep
    if args.seed is not None:
        data["base_seed"] = args.seed
    if args.step_cap is not None:
        data["step_cap"] = args.step_cap
    if args.sampling is not None:
        data["sampling"] = args.sampling
    if args.rwc_offset is not None:
        data["rwc_offset"] = args.rwc_offset
    if args.paired:
        data["paired"] = True
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            file_data = json.load(fh)
        if not isinstance(file_data, dict):
            raise UsageError("config must be a JSON object")
        if "replication" in file_data:
            rep = dict(data.get("replication", {}))
            rep.update(file_data["replication"])
            file_data = {**file_data, "replication": rep}
        data.update(file_data)
    if not data.get("policies"):
        raise UsageError("no policies given (use --policies, --preset or --config)")
    if "graph" not in data:
        raise UsageError("no graph given (use --family, --preset or --config)")
    data.setdefault("base_seed", _entropy_seed())
    output = data.pop("output", None)
    if args.out is None:
        args.out = output or "out"
    try:
        return ExperimentConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_experiment(args):
    config = _experiment_config(args)
    print(f"base_seed={config.base_seed}", file=sys.stderr)
    result = run_experiment(config, jobs=args.jobs)
    files = experiment_tables(result)
    files["config.json"] = json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"
    _write_outputs(args.out, files)
    _emit({
        "base_seed": config.base_seed,
        "graph": config.graph.describe(),
        "mean_degree": result.mean_degree,
        "reports": {tok: rep.summary() for tok, rep in result.reports.items()},
    })
    return EXIT_OK


def cmd_sweep(args):
    spec = _graph_spec_from_args(args)
    seed = args.seed if args.seed is not None else _entropy_seed()
    print(f"base_seed={seed}", file=sys.stderr)
    sweep = sweep_h(spec, args.d, args.h, args.graphs, args.starts, args.runs, seed,
                    jobs=args.jobs, step_cap=args.step_cap, sampling=args.sampling or "replace",
                    paired=not args.unpaired)
    _write_outputs(args.out, {"sweep.csv": sweep_table(sweep)})
    mean_deg = sweep.result.mean_degree
    low, high = recommend_h(mean_deg)
    _emit({
        "base_seed": seed,
        "graph": spec.describe(),
        "best_h": {str(d): str(h) for d, h in sweep.best_h.items()},
        "mean_degree": mean_deg,
        "heuristic_h_interval": [low, high],
        "heuristic_note": "mean degree / 3 .. mean degree / 2; a rule of thumb, not a guarantee",
    })
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_graph_flags(p, family_required=False):
    p.add_argument("--family", choices=["rgg", "torus", "complete", "file"], required=family_required)
    p.add_argument("--n", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--radius-mult", type=float)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--graph-file")
    p.add_argument("--max-retries", type=int, default=100)


def build_parser():
    parser = argparse.ArgumentParser(prog="choicewalk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a graph and write its edge list")
    gsub = gen.add_subparsers(dest="family", required=True)
    rgg = gsub.add_parser("rgg")
    rgg.add_argument("--n", type=int, required=True)
    rgg.add_argument("--radius", type=float)
    rgg.add_argument("--radius-mult", type=float)
    rgg.add_argument("--seed", type=int)
    rgg.add_argument("--max-retries", type=int, default=100)
    rgg.add_argument("--allow-disconnected", action="store_true")
    rgg.add_argument("--coords", help="also write node coordinates as CSV")
    torus = gsub.add_parser("torus")
    torus.add_argument("--rows", type=int, required=True)
    torus.add_argument("--cols", type=int, required=True)
    comp = gsub.add_parser("complete")
    comp.add_argument("--n", type=int, required=True)
    for p in (rgg, torus, comp):
        p.add_argument("-o", "--out", required=True, help="edge-list output path")
        p.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="one walk replicate; prints its record as JSON")
    run.add_argument("--graph", required=True)
    run.add_argument("--policy", type=_policy_arg, required=True, help="srw | rwc:D | erwc:D:H")
    run.add_argument("--start", type=int, default=0)
    run.add_argument("--seed", type=int)
    run.add_argument("--step-cap", type=int)
    run.add_argument("--sampling", choices=SAMPLING_MODES, default="replace")
    run.add_argument("--rwc-offset", type=int, choices=[0, 1], default=0)
    run.add_argument("--trace", help="write one JSON line per step to this file")
    run.set_defaults(func=cmd_run)

    exp = sub.add_parser("experiment", help="replicated comparison of policies; writes CSVs")
    exp.add_argument("--config", help="JSON config; its values override flags")
    exp.add_argument("--preset", choices=sorted(PRESETS))
    _add_graph_flags(exp)
    exp.add_argument("--policies", type=_policy_arg, nargs="+")
    exp.add_argument("--graphs", type=int)
    exp.add_argument("--starts", type=int)
    exp.add_argument("--runs", type=int)
    exp.add_argument("--sampling", choices=SAMPLING_MODES)
    exp.add_argument("--rwc-offset", type=int, choices=[0, 1])
    exp.add_argument("--seed", type=int)
    exp.add_argument("--step-cap", type=int)
    exp.add_argument("--paired", action="store_true",
                     help="replay the same replicate seeds for every policy")
    exp.add_argument("--jobs", type=int, default=1)
    exp.add_argument("--out", help="output directory (default: config 'output' or ./out)")
    exp.set_defaults(func=cmd_experiment)

    sw = sub.add_parser("sweep", help="ERWC h sweep; writes sweep.csv")
    _add_graph_flags(sw, family_required=True)
    sw.add_argument("--d", type=_int_list, default=[2, 3, 4])
    sw.add_argument("--h", type=_h_values, default=_h_values("2:30"))
    sw.add_argument("--graphs", type=int, default=30)
    sw.add_argument("--starts", type=int, default=2)
    sw.add_argument("--runs", type=int, default=2)
    sw.add_argument("--sampling", choices=SAMPLING_MODES)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--step-cap", type=int)
    sw.add_argument("--unpaired", action="store_true",
                    help="independent seeds per h instead of common random numbers")
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--out", default="out")
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"choicewalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GenerationError as exc:
        print(f"choicewalk: generation failed: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except CapExceededError as exc:
        print(f"choicewalk: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (GraphParseError, ValueError, OSError) as exc:
        print(f"choicewalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ChoiceWalkError as exc:
        print(f"choicewalk: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"choicewalk: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
