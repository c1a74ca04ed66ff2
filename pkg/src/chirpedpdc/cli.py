"""Command-line front end.

    chirpedpdc run <scenario> [--out-dir D] [--grid-points N] [--threads T]
    chirpedpdc validate [--level fast|full] [--scenario S] [--report FILE]
    chirpedpdc scenarios list

``<scenario>`` is a YAML path or the name of a file in the scenario
directory (``$CHIRPEDPDC_SCENARIO_DIR`` or the bundled set).
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import yaml

from . import __version__
from .dispersion import InfeasibleDesignError, RangeError
from .pipeline import SelfCheckError, format_summary, run_scenario, write_outputs
from .scenario import ConfigError, load_scenario
from .validation import band_report, run_checks

SCENARIO_ENV = "CHIRPEDPDC_SCENARIO_DIR"
BUNDLED = Path(__file__).with_name("scenarios")
DEFAULT_VALIDATE_SCENARIO = "octave_highgain"

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_INPUT = 2


def scenario_dir():
    env = os.environ.get(SCENARIO_ENV)
    return Path(env) if env else BUNDLED


def resolve_scenario(ref):
    """Path for a scenario given as a path or a bare name."""
    p = Path(ref)
    if p.is_file():
        return p
    d = scenario_dir()
    for cand in (d / ref, d / f"{ref}.yaml", d / f"{ref}.yml"):
        if cand.is_file():
            return cand
    raise ConfigError(f"no scenario {ref!r} (looked for a file and in {d})")


def _power_of_two(text):
    n = int(text)
    if n < 1024 or n & (n - 1):
        raise argparse.ArgumentTypeError("grid points must be a power of two >= 1024")
    return n


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser():
    ap = argparse.ArgumentParser(prog="chirpedpdc", description="Squeezing spectra of chirped-grating parametric down-conversion.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its tables")
    run.add_argument("scenario", help="scenario YAML file or bundled scenario name")
    run.add_argument("--out-dir", default=".", help="directory for output files (default: .)")
    run.add_argument("--grid-points", type=_power_of_two, default=None, help="override the scenario grid size")
    run.add_argument("--threads", type=_positive_int, default=1, help="worker threads for the grid evaluation")
    run.add_argument("--summary-json", default=None, help="also write the summary as JSON to this file")

    val = sub.add_parser("validate", help="check the solution's identities")
    val.add_argument("--level", choices=("fast", "full"), default="fast")
    val.add_argument("--scenario", default=DEFAULT_VALIDATE_SCENARIO, help="crystal to validate on")
    val.add_argument("--report", default=None, help="write a JSON report to this file")

    sc = sub.add_parser("scenarios", help="inspect the scenario directory")
    sc.add_argument("action", choices=("list",))
    return ap


def _cmd_run(args):
    scen = load_scenario(resolve_scenario(args.scenario))
    t = time.perf_counter()
    result = run_scenario(scen, grid_points=args.grid_points, threads=args.threads)
    paths = write_outputs(result, args.out_dir)
    print(f"scenario {scen.name}  ({result.spectra.grid.size} detunings, {time.perf_counter() - t:.1f} s)")
    print(format_summary(result.summary))
    for p in paths:
        print(f"wrote {p}")
    if args.summary_json:
        with open(args.summary_json, "w") as fh:
            json.dump(result.summary, fh, indent=1)
            fh.write("\n")
    return EXIT_OK


def _cmd_validate(args):
    scen = load_scenario(resolve_scenario(args.scenario))
    cfg = scen.crystal()
    checks = run_checks(cfg, args.level)
    for c in checks:
        print(c.line())
    edges = band_report(cfg)
    print(f"INFO  half-maximum band (nu=0.146)       {edges[0]:.5f} - {edges[1]:.5f} um")
    ok = all(c.passed for c in checks)
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    if args.report:
        doc = {
            "version": __version__,
            "level": args.level,
            "scenario": scen.name,
            "passed": ok,
            "checks": [c.to_dict() for c in checks],
            "half_max_band_um": list(edges),
        }
        with open(args.report, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    return EXIT_OK if ok else EXIT_CHECK


def _cmd_scenarios(args):
    d = scenario_dir()
    files = sorted(list(d.glob("*.yaml")) + list(d.glob("*.yml")))
    if not files:
        print(f"no scenarios in {d}")
        return EXIT_OK
    for f in files:
        try:
            with open(f) as fh:
                desc = (yaml.safe_load(fh) or {}).get("description", "")
        except yaml.YAMLError:
            desc = "(unreadable)"
        print(f"{f.stem:<20} {desc}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "validate": _cmd_validate, "scenarios": _cmd_scenarios}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RangeError, InfeasibleDesignError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SelfCheckError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
