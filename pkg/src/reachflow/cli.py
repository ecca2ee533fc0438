"""Command-line front end.

Subcommands:
  simulate   run one scenario file, writing trace and snapshot CSVs
  sweep-eps  confinement-strength sweep with a log-log rate fit
  sweep-tau  step-size refinement study against a fine reference
  reproduce  run a canned experiment (fig2..fig5) and print its summary
  w2         Wasserstein distance between two snapshot files
  catalog    print a shipped scenario document as JSON

All runs are seeded through the scenario file; no entropy is taken from the
environment, so identical invocations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dynamics import CONVERGED, FIXED_TIME_REACHED, run
from .errors import ReachflowError
from .experiments import reproduce, sweep_eps, sweep_tau
from .scenarios import CATALOG, builtin_scenario, load_scenario, scheme_config_from_spec
from .tracefiles import final_snapshot, write_snapshots_csv, write_trace_csv
from .wasserstein import w2_assignment


def _fail(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def _output_paths(scenario, outdir):
    trace = scenario.outputs.get("trace", f"{scenario.name}_trace.csv")
    snaps = scenario.outputs.get("snapshots", f"{scenario.name}_snapshots.csv")
    return os.path.join(outdir, trace), os.path.join(outdir, snaps)


def _cmd_simulate(args):
    scenario = load_scenario(args.scenario)
    domain, potential, config, initial = scenario.build()
    if args.workers != 1:
        config = scheme_config_from_spec(scenario.scheme_spec, workers=args.workers)
    trace = run(config, domain, potential, initial)
    os.makedirs(args.outdir, exist_ok=True)
    trace_path, snap_path = _output_paths(scenario, args.outdir)
    write_trace_csv(trace_path, trace)
    write_snapshots_csv(snap_path, trace)
    print(f"termination={trace.termination} steps={trace.records[-1][0]} "
          f"tau={trace.tau!r} final_energy={trace.final_energy!r}")
    print(f"trace={trace_path}")
    print(f"snapshots={snap_path}")
    if trace.termination in (CONVERGED, FIXED_TIME_REACHED):
        return 0
    return _fail("termination", f"run ended with {trace.termination!r}", 1)


def _report_lines(report):
    lines = ["control,metric,w2_error,status"]
    for row in report.rows:
        metric = "" if row.metric is None else repr(float(row.metric))
        w2e = "" if row.w2_error is None else repr(float(row.w2_error))
        lines.append(f"{row.control!r},{metric},{w2e},{row.status}")
    if report.slope is not None:
        lines.append(f"# slope={report.slope!r} residual={report.residual!r}")
    if report.orders is not None:
        shown = ["indeterminate" if p is None else repr(p) for p in report.orders]
        lines.append("# orders=" + ",".join(shown))
    return lines


def _emit_report(report, out):
    text = "\n".join(_report_lines(report)) + "\n"
    sys.stdout.write(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_sweep_eps(args):
    scenario = load_scenario(args.scenario)
    report = sweep_eps(scenario, args.eps)
    _emit_report(report, args.out)
    return 0


def _cmd_sweep_tau(args):
    scenario = load_scenario(args.scenario)
    report = sweep_tau(scenario, args.taus, args.ref)
    _emit_report(report, args.out)
    return 0


def _cmd_reproduce(args):
    summary, traces = reproduce(args.figure, seeds=args.seeds)
    os.makedirs(args.outdir, exist_ok=True)
    for name, trace in traces.items():
        write_trace_csv(os.path.join(args.outdir, f"{name}_trace.csv"), trace)
        write_snapshots_csv(os.path.join(args.outdir, f"{name}_snapshots.csv"), trace)
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_w2(args):
    _, pa = final_snapshot(args.file_a)
    _, pb = final_snapshot(args.file_b)
    print(f"{w2_assignment(pa, pb):.12f}")
    return 0


def _cmd_catalog(args):
    scenario = builtin_scenario(args.name)
    doc = {
        "version": 1,
        "name": scenario.name,
        "domain": scenario.domain_spec,
        "potential": scenario.potential_spec,
        "scheme": scenario.scheme_spec,
        "initial": scenario.initial_spec,
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="reachflow",
        description="Particle schemes for nonlocal-interaction dynamics "
                    "on compact positive-reach domains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario file")
    p.add_argument("scenario")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--outdir", default=".")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("sweep-eps", help="confinement-strength sweep")
    p.add_argument("scenario")
    p.add_argument("--eps", type=float, nargs="+", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_sweep_eps)

    p = sub.add_parser("sweep-tau", help="step-size refinement study")
    p.add_argument("scenario")
    p.add_argument("--taus", type=float, nargs="+", required=True)
    p.add_argument("--ref", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_sweep_tau)

    p = sub.add_parser("reproduce", help="run a canned experiment")
    p.add_argument("figure", choices=["fig2", "fig3", "fig4", "fig5"])
    p.add_argument("--outdir", default=".")
    p.add_argument("--seeds", type=int, nargs="+", default=None)
    p.set_defaults(fn=_cmd_reproduce)

    p = sub.add_parser("w2", help="distance between two snapshot files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.set_defaults(fn=_cmd_w2)

    p = sub.add_parser("catalog", help="print a shipped scenario as JSON")
    p.add_argument("name", choices=list(CATALOG))
    p.set_defaults(fn=_cmd_catalog)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ReachflowError as err:
        return _fail(type(err).__name__, str(err), 2)
    except (OSError, ValueError, json.JSONDecodeError) as err:
        return _fail(type(err).__name__, str(err), 3)


if __name__ == "__main__":
    sys.exit(main())
