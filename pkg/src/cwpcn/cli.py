"""Command-line front end.

Exit status: 0 success, 2 bad-config, 3 infeasible, 4 io-error.  Errors are
reported on stderr as ``error: <category>: <field>: <message>``.
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
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import ConfigError, RunSpec, load_config
from .model import Allocation, InfeasibleError, effective_gains, harvested_power
from .model import primary_rate_overlay, primary_rate_underlay, secondary_throughput
from .model import underlay_ap_power
from .oracle import feasibility_violations, verify_kkt
from .overlay import DEFAULT_GRID_POINTS, solve_p2
from .region import default_gamma_grid, frontier_overlay, frontier_underlay
from .sim import monte_carlo_throughput, sample_instance
from .underlay import UnderlayProblem, solve_p1

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4
OUTPUT_DIR_ENV = "CWPCN_OUTPUT_DIR"
COMMANDS = ("solve-underlay", "solve-overlay", "region", "sweep-pmax", "sweep-alpha",
            "montecarlo", "verify")

SOLVE_COLUMNS = ("model", "param", "tau", "throughput", "primary_rate", "p_c",
                 "interference", "gamma0")
MC_COLUMNS = ("model", "param", "value", "mean", "stderr", "trials", "infeasible")
REGION_COLUMNS = ("param", "r_primary", "r_secondary")


class _Failure(Exception):
    def __init__(self, category: str, code: int, message: str):
        super().__init__(message)
        self.category = category
        self.code = code


def _cell(x) -> str:
    # shortest round-trip float text; None becomes an empty cell
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_atomic(path: Path, text: str):
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _json_text(command: str, records: list) -> str:
    doc = {"schema_version": 1, "command": command, "records": records}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV) or ".")


def _target(args, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    return _output_dir() / default_name


def _instance(spec: RunSpec):
    if spec.instance is not None:
        return spec.instance
    # a deterministic solve uses path-loss-only gains
    return sample_instance(spec.scenario.replace(fading="none"))


def _cap(spec: RunSpec):
    g = spec.scenario.gamma_itc
    return None if math.isinf(g) else g


def _solve_record(res) -> dict:
    d = res.to_dict()
    return {k: _json_value(v) for k, v in d.items()}


def _emit_solve(args, command: str, res) -> str:
    rec = _solve_record(res)
    if args.format == "json":
        text = _json_text(command, [rec])
        path = _target(args, f"{command}.json")
    else:
        k = len(rec["e"])
        header = SOLVE_COLUMNS + tuple(f"e{i + 1}" for i in range(k))
        row = [rec[c] for c in SOLVE_COLUMNS] + rec["e"]
        if row[1] is None and rec["model"] == "underlay":
            row[1] = math.inf
        text = _csv_text(header, [row])
        path = _target(args, f"{command}.csv")
    write_atomic(path, text)
    return f"{command}: throughput={res.throughput!r} primary_rate={res.primary_rate!r} -> {path}"


def _cmd_solve_underlay(args, spec: RunSpec) -> str:
    res = solve_p1(_instance(spec), _cap(spec))
    return _emit_solve(args, "solve-underlay", res)


def _cmd_solve_overlay(args, spec: RunSpec) -> str:
    res = solve_p2(_instance(spec), spec.scenario.r_bar, grid_points=args.grid_points)
    return _emit_solve(args, "solve-overlay", res)


def _cmd_region(args, spec: RunSpec) -> str:
    inst = _instance(spec)
    frontiers = []
    if "underlay" in spec.models:
        grid = spec.gamma_grid if spec.gamma_grid is not None else default_gamma_grid(inst)
        grid = [None if g is not None and math.isinf(g) else g for g in grid]
        frontiers.append(frontier_underlay(inst, grid))
    if "overlay" in spec.models:
        frontiers.append(frontier_overlay(inst, spec.rbar_grid, grid_points=args.grid_points))
    if args.format == "json":
        records = [{"model": f.model,
                    "points": [{"param": _json_value(p.parameter), "r_primary": p.r_primary,
                                "r_secondary": p.r_secondary} for p in f.points]}
                   for f in frontiers]
        path = _target(args, "region.json")
        write_atomic(path, _json_text("region", records))
        paths = [path]
    else:
        out_dir = Path(args.out) if args.out else _output_dir()
        paths = []
        for f in frontiers:
            rows = [(math.inf if p.parameter is None else p.parameter, p.r_primary,
                     p.r_secondary) for p in f.points]
            path = out_dir / f"region_{f.model}.csv"
            write_atomic(path, _csv_text(REGION_COLUMNS, rows))
            paths.append(path)
    counts = ", ".join(f"{f.model}={len(f.points)}" for f in frontiers)
    return f"region: frontier points {counts} -> {', '.join(map(str, paths))}"


def _mc_rows(spec: RunSpec, args, field_name: str | None, values) -> list:
    scn = spec.scenario
    rows = []
    for model in spec.models:
        param = _cap(spec) if model == "underlay" else scn.r_bar
        for v in values:
            s = scn if field_name is None else scn.replace(**{field_name: v})
            r = monte_carlo_throughput(s, model, param, grid_points=args.grid_points)
            rows.append({"model": model, "param": math.inf if param is None else param,
                         "value": v, "mean": r.mean, "stderr": r.stderr,
                         "trials": r.trials, "infeasible": r.infeasible})
    return rows


def _emit_mc(args, command: str, rows: list) -> str:
    if args.format == "json":
        records = [{k: _json_value(v) for k, v in r.items()} for r in rows]
        path = _target(args, f"{command}.json")
        write_atomic(path, _json_text(command, records))
    else:
        path = _target(args, f"{command}.csv")
        write_atomic(path, _csv_text(MC_COLUMNS, [[r[c] for c in MC_COLUMNS] for r in rows]))
    infeasible = sum(r["infeasible"] for r in rows)
    return f"{command}: {len(rows)} rows, {infeasible} infeasible trials scored 0 -> {path}"


def _cmd_sweep_pmax(args, spec: RunSpec) -> str:
    return _emit_mc(args, "sweep-pmax", _mc_rows(spec, args, "p_max", spec.p_max_grid))


def _cmd_sweep_alpha(args, spec: RunSpec) -> str:
    rows = _mc_rows(spec, args, "pathloss_exponent", spec.alpha_grid)
    return _emit_mc(args, "sweep-alpha", rows)


def _cmd_montecarlo(args, spec: RunSpec) -> str:
    return _emit_mc(args, "montecarlo", _mc_rows(spec, args, None, [None]))


def _cmd_verify(args, spec: RunSpec) -> str:
    if spec.allocation is None:
        raise ConfigError("allocation", "section is required for verify")
    inst = _instance(spec)
    a = spec.allocation
    model = a["model"]
    param = a["param"]
    if param is None:
        param = _cap(spec) if model == "underlay" else spec.scenario.r_bar
    try:
        alloc = Allocation(a["tau"], a["e"])
    except ValueError as exc:
        raise ConfigError("allocation", str(exc)) from None
    if alloc.e.size != inst.k:
        raise ConfigError("allocation.e", f"must have {inst.k} entries")
    violations = feasibility_violations(inst, model, param, alloc)
    gains = effective_gains(inst)
    kkt = None
    if model == "underlay":
        p_c = underlay_ap_power(param, inst)
        throughput = secondary_throughput(alloc, gains.gamma)
        primary = primary_rate_underlay(alloc, inst, p_c)
        if 0.0 < alloc.tau < 1.0:
            prob = UnderlayProblem(inst, param, gains.gamma, harvested_power(inst, p_c))
            kkt = verify_kkt(prob, alloc.tau, alloc.e).max_residual
    else:
        throughput = secondary_throughput(alloc, gains.gamma_hat)
        primary = primary_rate_overlay(alloc, inst)
    rec = {"model": model, "param": _json_value(param), "feasible": not violations,
           "violations": violations, "throughput": throughput, "primary_rate": primary,
           "kkt_max_residual": kkt}
    if args.format == "json":
        path = _target(args, "verify.json")
        write_atomic(path, _json_text("verify", [rec]))
    else:
        path = _target(args, "verify.csv")
        header = ("model", "param", "feasible", "throughput", "primary_rate",
                  "kkt_max_residual", "violations")
        row = [model, math.inf if param is None else param, str(not violations).lower(),
               throughput, primary, kkt, "; ".join(violations)]
        write_atomic(path, _csv_text(header, [row]))
    if violations:
        raise _Failure("infeasible", EXIT_INFEASIBLE,
                       f"allocation: {violations[0]} (report written to {path})")
    return f"verify: feasible, kkt_max_residual={kkt!r} -> {path}"


_HANDLERS = {
    "solve-underlay": _cmd_solve_underlay,
    "solve-overlay": _cmd_solve_overlay,
    "region": _cmd_region,
    "sweep-pmax": _cmd_sweep_pmax,
    "sweep-alpha": _cmd_sweep_alpha,
    "montecarlo": _cmd_montecarlo,
    "verify": _cmd_verify,
}

_HELP = {
    "solve-underlay": "throughput-optimal allocation under an interference cap",
    "solve-overlay": "throughput-optimal allocation under a primary-rate floor",
    "region": "primary/secondary rate-region frontiers of both models",
    "sweep-pmax": "average throughput against the H-AP power budget",
    "sweep-alpha": "average throughput against the path-loss exponent",
    "montecarlo": "average throughput over fading draws",
    "verify": "check a given allocation for feasibility and optimality",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cwpcn",
        description="Optimal allocations, rate regions and Monte Carlo sweeps for "
                    "cognitive wireless-powered networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", required=True, metavar="PATH", help="YAML run config")
        p.add_argument("--out", metavar="PATH",
                       help="output file (a directory for region CSV); default: "
                            f"${OUTPUT_DIR_ENV} or the working directory")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="output format (solve/verify default json, others csv)")
        p.add_argument("--seed", type=int, help="override scenario.seed")
        p.add_argument("--trials", type=int, help="override scenario.trials")
        p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS,
                       help="interference-level grid size of the overlay search")
    return parser


def _apply_overrides(spec: RunSpec, args) -> RunSpec:
    changes = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed", "must be a 64-bit unsigned integer")
        changes["seed"] = args.seed
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("--trials", "must be at least 1")
        changes["trials"] = args.trials
    if args.grid_points < 3:
        raise ConfigError("--grid-points", "must be at least 3")
    if not changes:
        return spec
    from dataclasses import replace
    return replace(spec, scenario=spec.scenario.replace(**changes))


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = "json" if args.command in ("solve-underlay", "solve-overlay",
                                                 "verify") else "csv"
    try:
        try:
            spec = load_config(args.config)
        except OSError as exc:
            raise _Failure("io-error", EXIT_IO, f"--config: {exc}") from None
        spec = _apply_overrides(spec, args)
        summary = _HANDLERS[args.command](args, spec)
    except _Failure as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"error: bad-config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except InfeasibleError as exc:
        print(f"error: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"error: io-error: --out: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
