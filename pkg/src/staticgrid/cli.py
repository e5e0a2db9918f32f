"""Command-line front end.

Exit status: 0 on success, 1 when ``validate`` finds errors, 2 for usage
errors, 3 for unreadable input, 4 for an invalid case or scenario and 5 when
an analysis fails to converge.  Failures print ``error: <category>: <message>``
on standard error.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import math
import sys
from pathlib import Path
from typing import Iterator, Optional, Sequence, TextIO

import numpy as np

from .case_io import CaseFormatError, read_case, serialize_case
from .case_model import LEVELS, PowerCase, validate_case
from .cpf import CpfError, CpfOptions, critical_bus, loadability_margin, trace_pv_curve, write_pv_csv
from .fixtures import fixture_path, list_fixtures
from .network import NetworkError
from .opf import OpfError, OpfOptions, pareto_sweep, solve_market_vsc_opf, write_pareto_csv
from .powerflow import PowerFlowError, SolverOptions, solve_power_flow
from .scenario import ANNUAL_AVERAGE, ScenarioError, ScenarioSpec, apply_scenario
from .sensitivity import format_rank_table, rank_wind_farms

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_INPUT, EXIT_CASE, EXIT_CONVERGENCE = 0, 1, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, category: str, message: str, code: int):
        super().__init__(message)
        self.category = category
        self.code = code


def parse_omega_grid(text: str) -> list[float]:
    """``start:step:stop`` with both ends included."""
    try:
        start, step, stop = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:step:stop, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("omega grid needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = [round(start + i * step, 12) for i in range(count)]
    if any(not 0 <= w <= 1 for w in values):
        raise argparse.ArgumentTypeError("omega values must lie in [0, 1]")
    return values


def _fraction(text: str) -> float:
    value = float(text)
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"{text} is outside [0, 1]")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text} must be positive")
    return value


def _month(text: str) -> int:
    value = int(text)
    if not 1 <= value <= 12:
        raise argparse.ArgumentTypeError("month must be 1..12")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="staticgrid", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("case", help=f"case file, '-' for stdin, or a bundled case "
                                     f"({', '.join(list_fixtures())})")
    common.add_argument("-o", "--output", help="output file (default: stdout)")

    scenario = argparse.ArgumentParser(add_help=False)
    scenario.add_argument("--month", type=_month, default=9)
    scenario.add_argument("--level", choices=LEVELS + (ANNUAL_AVERAGE,), default=ANNUAL_AVERAGE)
    scenario.add_argument("--capacity-factors", action="store_true",
                          help="scale generation by the monthly capacity factors")
    scenario.add_argument("--growth", type=float, nargs="*", default=[], metavar="PCT",
                          help="yearly load growth rates in percent, compounded")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--tol", type=_positive, default=1e-8)
    solver.add_argument("--max-iter", type=int, default=30)

    cpf = argparse.ArgumentParser(add_help=False)
    cpf.add_argument("--step", type=_positive, default=0.1, help="initial continuation step")
    cpf.add_argument("--max-step", type=_positive, default=0.25)
    cpf.add_argument("--single-slack", action="store_true",
                     help="let the reference slack absorb the losses instead of k_G")

    opf = argparse.ArgumentParser(add_help=False)
    opf.add_argument("--lambda-min", type=float, default=1.01)
    opf.add_argument("--lambda-max", type=float, default=1.99)

    sub.add_parser("validate", parents=[common], help="check the case invariants")
    p = sub.add_parser("lf", parents=[common, scenario, solver], help="AC power flow")
    p.add_argument("--distributed-slack", action="store_true")
    p.add_argument("--q-limits", action="store_true", help="enforce generator reactive limits")
    p = sub.add_parser("cpf", parents=[common, scenario, solver, cpf], help="PV curves")
    p.add_argument("--monitor-bus", type=int, action="append", default=[],
                   help="bus to include in the CSV (repeatable; default: all)")
    p = sub.add_parser("opf", parents=[common, scenario, opf], help="market / stability OPF")
    p.add_argument("--omega", type=_fraction, required=True)
    p = sub.add_parser("pareto", parents=[common, scenario, opf], help="dispatch versus omega")
    p.add_argument("--omega-grid", type=parse_omega_grid, default=parse_omega_grid("0:0.1:1"))
    p = sub.add_parser("rank", parents=[common, scenario, solver, cpf],
                       help="wind-farm sensitivity ranking")
    p.add_argument("--target-pf", type=_fraction, default=0.95)
    sub.add_parser("scale", parents=[common, scenario], help="write the scenario-scaled case")
    return parser


def load_case(source: str) -> PowerCase:
    try:
        if source != "-" and not Path(source).exists() and source in list_fixtures():
            return read_case(fixture_path(source))
        return read_case(source)
    except CaseFormatError as exc:
        raise CliError("input", str(exc), EXIT_INPUT) from exc
    except OSError as exc:
        raise CliError("input", str(exc), EXIT_INPUT) from exc


def scenario_case(case: PowerCase, args) -> PowerCase:
    try:
        spec = ScenarioSpec(month=args.month, level=args.level, growth_rates=tuple(args.growth))
        return apply_scenario(case, spec, capacity_factors=args.capacity_factors)
    except ScenarioError as exc:
        raise CliError("scenario", str(exc), EXIT_CASE) from exc


def require_valid(case: PowerCase) -> None:
    diags = validate_case(case)
    for d in diags:
        if d.severity != "error":
            print(d, file=sys.stderr)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise CliError("case", "; ".join(str(d) for d in errors), EXIT_CASE)


@contextlib.contextmanager
def output(path: Optional[str]) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_validate(args) -> int:
    case = load_case(args.case)
    diags = validate_case(case)
    with output(args.output) as out:
        for d in diags:
            print(d, file=out)
        errors = sum(1 for d in diags if d.severity == "error")
        print(f"{errors} error(s), {len(diags) - errors} warning(s)", file=out)
    return EXIT_OK if errors == 0 else EXIT_INVALID


def cmd_lf(args) -> int:
    case = scenario_case(load_case(args.case), args)
    require_valid(case)
    opts = SolverOptions(tolerance=args.tol, max_iterations=args.max_iter,
                         distributed_slack=args.distributed_slack,
                         enforce_q_limits=args.q_limits)
    sol = solve_power_flow(case, opts)
    for w in sol.warnings:
        print(f"warning: {w}", file=sys.stderr)
    with output(args.output) as out:
        print(f"{'bus':>6}  {'name':<24}  {'V (pu)':>9}  {'theta (deg)':>11}  "
              f"{'P (pu)':>9}  {'Q (pu)':>9}", file=out)
        for i, bus in enumerate(sol.bus_ids):
            print(f"{bus:>6}  {case.bus_name(bus):<24}  {sol.v[i]:>9.6f}  "
                  f"{np.degrees(sol.theta[i]):>11.5f}  {sol.p_injected[i]:>9.5f}  "
                  f"{sol.q_injected[i]:>9.5f}", file=out)
        print(f"iterations: {sol.iterations}", file=out)
        if opts.distributed_slack:
            print(f"k_G: {sol.k_g:.8f}", file=out)
        print(f"total losses: {sol.losses:.4f} MW", file=out)
    return EXIT_OK


def _cpf_options(args) -> CpfOptions:
    return CpfOptions(initial_step=args.step, max_step=max(args.max_step, args.step),
                      tolerance=args.tol, corrector_iterations=args.max_iter,
                      distributed_slack=not args.single_slack)


def cmd_cpf(args) -> int:
    case = scenario_case(load_case(args.case), args)
    require_valid(case)
    for b in args.monitor_bus:
        if b not in case.bus_index():
            raise CliError("usage", f"unknown monitor bus {b}", EXIT_USAGE)
    trace = trace_pv_curve(case, options=_cpf_options(args))
    dl, mw = loadability_margin(trace)
    report = sys.stdout if args.output not in (None, "-") else sys.stderr
    with output(args.output) as out:
        write_pv_csv(trace, out, args.monitor_bus or None)
    print(f"delta_lambda: {dl:.6f}", file=report)
    print(f"margin: {mw:.3f} MW", file=report)
    print(f"critical bus: {critical_bus(trace)}", file=report)
    return EXIT_OK


def _opf_options(args) -> OpfOptions:
    return OpfOptions(lambda_min=args.lambda_min, lambda_max=args.lambda_max)


def cmd_opf(args) -> int:
    case = scenario_case(load_case(args.case), args)
    require_valid(case)
    sol = solve_market_vsc_opf(case, args.omega, _opf_options(args))
    supply = [s for s in case.supply if s.connected]
    demand = [d for d in case.demand if d.connected]
    sb = case.system_base
    with output(args.output) as out:
        print(f"omega: {sol.omega:g}", file=out)
        print(f"{'supply':<24}  {'P_S (pu)':>10}  {'P_S (MW)':>10}", file=out)
        for s, p in zip(supply, sol.p_s):
            print(f"{case.bus_name(s.bus):<24}  {p:>10.6f}  {p * sb:>10.3f}", file=out)
        print(f"{'demand':<24}  {'P_D (pu)':>10}  {'P_D (MW)':>10}", file=out)
        for d, p in zip(demand, sol.p_d):
            print(f"{case.bus_name(d.bus):<24}  {p:>10.6f}  {p * sb:>10.3f}", file=out)
        for bus, q in sol.q_g.items():
            print(f"Q_G {case.bus_name(bus)}: {q:.6f} pu", file=out)
        print(f"lambda_c: {sol.lambda_c:.6f}", file=out)
        print(f"k_Gc: {sol.k_gc:.6f}", file=out)
        print(f"surplus: {sol.surplus:.2f} R$/h", file=out)
        print(f"objective G: {sol.objective:.6f}", file=out)
        print(f"losses: {sol.losses:.4f} MW", file=out)
    return EXIT_OK


def cmd_pareto(args) -> int:
    case = scenario_case(load_case(args.case), args)
    require_valid(case)
    sols = pareto_sweep(case, args.omega_grid, _opf_options(args))
    with output(args.output) as out:
        write_pareto_csv(case, sols, out)
    failed = [s for s in sols if not s.converged]
    for s in failed:
        print(f"error: convergence: omega={s.omega:g}: {s.message}", file=sys.stderr)
    return EXIT_CONVERGENCE if failed else EXIT_OK


def cmd_rank(args) -> int:
    case = scenario_case(load_case(args.case), args)
    require_valid(case)
    rank = rank_wind_farms(case, args.target_pf, _cpf_options(args))
    with output(args.output) as out:
        print(format_rank_table(rank), file=out)
    return EXIT_CONVERGENCE if any(e.failed for e in rank.entries) else EXIT_OK


def cmd_scale(args) -> int:
    case = scenario_case(load_case(args.case), args)
    with output(args.output) as out:
        out.write(serialize_case(case))
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "lf": cmd_lf, "cpf": cmd_cpf, "opf": cmd_opf,
            "pareto": cmd_pareto, "rank": cmd_rank, "scale": cmd_scale}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return exc.code
    except (ScenarioError, NetworkError) as exc:
        print(f"error: case: {exc}", file=sys.stderr)
        return EXIT_CASE
    except (PowerFlowError, CpfError, OpfError) as exc:
        print(f"error: convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"error: case: {exc}", file=sys.stderr)
        return EXIT_CASE


if __name__ == "__main__":
    raise SystemExit(main())
