#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

"""
Command-line front end.

    partialmac <command> [--scenario PATH] [--out PATH] ...

Without --scenario, a scenario is drawn from --seed with
the package's linear-congruential generator, so runs are
reproducible.  Output is CSV, to --out or stdout.

Exit codes: 0 success, 2 invalid input, 3 infeasible.
"""

import argparse
import logging
import math
import sys
import time

import numpy as np

from . import load, loads
from .baseline import oma_optimize_fractions
from .epi import *
from .minpic import *
from .minpic import config_neighbors, BRUTE_FORCE_LIMIT
from .model import *
from .region import boundary_scan_2user, BoundarySample
from .timeshare import build_vertices, solve_timeshare_lp
from .utility import *


__all__ = []

def export(fn):
    __all__.append(fn.__name__)
    return fn


log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3


#
# CSV output
#

class CsvSerializer:
    "Comma-separated rows, LF line endings, floats to 9 significant digits."

    def __init__(self, fieldnames):
        self.fieldnames = tuple(fieldnames)
        self.reset()

    def reset(self):
        self.lines = []

    def dumps(self):
        s = "\n".join(self.lines) + "\n"
        self.reset()
        return s

    def newline(self, fields):
        self.lines.append(",".join(fields))

    @staticmethod
    def quoted_string(s):
        must_quote = (
            (s.strip() != s)
            or any(c in s for c in ',"\n\r')
            )
        if not must_quote:
            return s
        return '"' + s.replace('"', '""') + '"'

    def serialize_value(self, value):
        if value is None:
            return ""
        if isinstance(value, (bool, np.bool_)):
            return "true" if value else "false"
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            value = float(value)
            if value == 0:
                # no "-0"
                value = 0.0
            return format(value, ".9g")
        return self.quoted_string(str(value))

    def serialize(self, rows):
        self.newline(self.quoted_string(name) for name in self.fieldnames)
        expected = set(self.fieldnames)
        for row in rows:
            if set(row) != expected:
                raise ValueError(f"row keys {sorted(row)} don't match the header {list(self.fieldnames)}")
            self.newline(self.serialize_value(row[name]) for name in self.fieldnames)


@export
def format_csv(rows, fieldnames=None):
    rows = list(rows)
    if fieldnames is None:
        if not rows:
            raise ValueError("fieldnames are required when there are no rows")
        fieldnames = list(rows[0])
    serializer = CsvSerializer(fieldnames)
    serializer.serialize(rows)
    return serializer.dumps()


@export
def export_csv(rows, path, fieldnames=None):
    text = format_csv(rows, fieldnames)
    with open(path, "wt", encoding="utf-8", newline="\n") as f:
        f.write(text)


#
# scenarios and reports
#

@export
def parse_scenario(source):
    """
    source is a path, or scenario text (anything starting
    with "{" after whitespace, or containing a newline).
    """
    if source.lstrip().startswith("{") or ("\n" in source):
        return loads(source)
    return load(source)


def scenario_for(args):
    if args.scenario:
        return parse_scenario(args.scenario)
    log.info("drawing a %d-user scenario from seed %d", args.users, args.seed)
    return random_scenario(Lcg(args.seed), args.users)


def report_fieldnames(sc, timing):
    names = ['method', 'total_power']
    names.extend(f"r{k}_bits" for k in range(1, sc.num_users + 1))
    names.extend(('configs_evaluated', 'feasible'))
    if sc.bandwidth_hz is not None:
        names.append('sum_throughput_bps')
    if timing:
        names.append('wall_time_s')
    return names


def report_row(sc, timing, method, total_power, rates, configs_evaluated, feasible, wall_time):
    row = {
        'method': method,
        'total_power': total_power if math.isfinite(total_power) else None,
        'configs_evaluated': configs_evaluated,
        'feasible': bool(feasible),
        }
    rates = np.asarray(rates, dtype=float)
    for k, rate in enumerate(rates, 1):
        row[f"r{k}_bits"] = float(rate)
    if sc.bandwidth_hz is not None:
        row['sum_throughput_bps'] = sc.bandwidth_hz * float(rates.sum())
    if timing:
        row['wall_time_s'] = wall_time
    return row


def _timed(fn, *a, **kw):
    start = time.perf_counter()
    result = fn(*a, **kw)
    return result, time.perf_counter() - start


def _solution_row(sc, args, solution, wall_time):
    return report_row(sc, args.timing, solution.method, solution.total_power,
        solution.user_rates(), solution.configs_evaluated, solution.feasible, wall_time)


def _infeasible_row(sc, args, method, wall_time):
    return report_row(sc, args.timing, method, math.inf, np.zeros(sc.num_users), 0, False, wall_time)


def _timeshare_configs(solution, ch):
    configs = [solution.config]
    seen = {solution.config}
    for neighbor in config_neighbors(solution.config):
        if neighbor not in seen:
            seen.add(neighbor)
            configs.append(neighbor)
    if not solution.feasible:
        for cfg in (DecodingConfig.own_only(ch), DecodingConfig.full(ch)):
            if cfg not in seen:
                seen.add(cfg)
                configs.append(cfg)
    return configs


def _timeshare(sc, args, solution=None):
    if solution is None:
        solution = minpic_solve(sc, MinpicSettings(tol=args.tol))
    configs = _timeshare_configs(solution, sc.channel)
    vertices = build_vertices(sc, configs)
    if not vertices:
        raise InfeasibleError("no configuration supports any rate target", detail={'configs': len(configs)})
    return solve_timeshare_lp(vertices, sc.rate_min), len(configs)


def _total_power(args, sc):
    if args.power is not None:
        if not args.power > 0:
            raise ValueError(f"--power must be positive, not {args.power}")
        return args.power
    if sc.power_budget is not None:
        return sc.power_budget
    return None


#
# commands
#
# each returns (rows, fieldnames, exit code)
#

def command_region(sc, args):
    total_power = _total_power(args, sc)
    if total_power is None:
        raise ValueError("region needs --power or a scenario power_budget")
    sample = boundary_scan_2user(sc.channel, total_power, args.grid)
    log.info("region: %d hull points", len(sample))
    return list(sample.rows()), BoundarySample.fieldnames, EXIT_OK


def command_minpic(sc, args):
    solution, wall_time = _timed(minpic_solve, sc, MinpicSettings(tol=args.tol))
    log.info("minpic: total power %.9g over %d configurations", solution.total_power, solution.configs_evaluated)
    exit_code = EXIT_OK if solution.feasible else EXIT_INFEASIBLE
    return [_solution_row(sc, args, solution, wall_time)], report_fieldnames(sc, args.timing), exit_code


def command_brute(sc, args):
    solution, wall_time = _timed(brute_force_solve, sc, args.split_grid)
    log.info("brute: total power %.9g over %d configurations", solution.total_power, solution.configs_evaluated)
    exit_code = EXIT_OK if solution.feasible else EXIT_INFEASIBLE
    return [_solution_row(sc, args, solution, wall_time)], report_fieldnames(sc, args.timing), exit_code


def command_timeshare(sc, args):
    schedule, config_count = _timeshare(sc, args)
    log.info("timeshare: average power %.9g from %d vertices", schedule.avg_power, len(schedule.vertices))
    fieldnames = ['config_id', 'theta', 'power'] + [f"r{k}" for k in range(1, sc.num_users + 1)]
    exit_code = EXIT_OK if sc.within_budget(schedule.avg_power) else EXIT_INFEASIBLE
    return list(schedule.rows()), fieldnames, exit_code


def command_oma(sc, args):
    solution, wall_time = _timed(oma_optimize_fractions, sc, args.grid)
    feasible = sc.within_budget(solution.total_power)
    row = report_row(sc, args.timing, "oma", solution.total_power, sc.rate_min, 0, feasible, wall_time)
    return [row], report_fieldnames(sc, args.timing), EXIT_OK if feasible else EXIT_INFEASIBLE


def command_compare(sc, args):
    rows = []

    def attempt(method, fn):
        start = time.perf_counter()
        try:
            row = fn()
        except InfeasibleError as e:
            log.info("%s: infeasible: %s", method, e.message)
            row = _infeasible_row(sc, args, method, time.perf_counter() - start)
        else:
            if row is None:
                return
            if args.timing:
                row['wall_time_s'] = time.perf_counter() - start
        rows.append(row)

    minpic = []

    def minpic_row():
        minpic.append(minpic_solve(sc, MinpicSettings(tol=args.tol)))
        return _solution_row(sc, args, minpic[0], 0.0)
    attempt("minpic", minpic_row)

    def brute():
        try:
            return _solution_row(sc, args, brute_force_solve(sc, args.split_grid), 0.0)
        except SizeLimitError as e:
            log.warning("brute: skipped: %s", e.message)
            return None
    if sc.num_users <= BRUTE_FORCE_LIMIT:
        attempt("brute", brute)

    def timeshare():
        schedule, config_count = _timeshare(sc, args, minpic[0] if minpic else None)
        return report_row(sc, args.timing, "timeshare", schedule.avg_power, schedule.avg_rates,
            config_count, sc.within_budget(schedule.avg_power), 0.0)
    attempt("timeshare", timeshare)

    def oma():
        solution = oma_optimize_fractions(sc, args.grid)
        return report_row(sc, args.timing, "oma", solution.total_power, sc.rate_min,
            0, sc.within_budget(solution.total_power), 0.0)
    attempt("oma", oma)

    exit_code = EXIT_OK if any(row['feasible'] for row in rows) else EXIT_INFEASIBLE
    return rows, report_fieldnames(sc, args.timing), exit_code


def command_epi_bounds(sc, args):
    """
    Outer bounds for the scenario with independent Gaussian
    inputs of equal power: --power (or power_budget, or U)
    split evenly across users.
    """
    u = sc.num_users
    total_power = _total_power(args, sc) or float(u)
    P = np.full(u, total_power / u)
    H = np.sqrt(sc.channel.gain)
    noise = NoiseSpec.gaussian(sc.channel.noise)

    values = []
    for j in range(u):
        values.append((f"noise_entropy_rx{j + 1}", gaussian_entropy(noise.variance[j])))
    values.append(("sum_rate_bound_independent", sum_rate_bound_correlated(H, np.eye(u), P, noise)))
    values.append(("sum_rate_bound_rearranged", sum_rate_bound_correlated(H, np.eye(u), P, noise, noise_model="rearranged")))
    values.append(("joint_sum_rate_bound", joint_sum_rate_bound(np.diag(H), P, np.diag(noise.variance))))
    analytic, finite_difference = mmse_identity_check(sc.channel.gain[0, 0] / noise.variance[0], P[0])
    values.append(("mmse_derivative_analytic", analytic))
    values.append(("mmse_derivative_finite_difference", finite_difference))

    rows = [{'bound_name': name, 'value_nats': value, 'value_bits': nats_to_bits(value)} for name, value in values]
    return rows, ('bound_name', 'value_nats', 'value_bits'), EXIT_OK


COMMAND_HELP = {
    'region': "two-user rate-region boundary under a total power",
    'minpic': "local-search minimum sum power",
    'brute': "exhaustive minimum sum power (U <= 3)",
    'timeshare': "cheapest time-sharing schedule near the minpic solution",
    'oma': "orthogonal multiple access baseline",
    'compare': "one report row per method",
    'epi-bounds': "entropy-power sum-rate bounds",
    }

COMMANDS = {
    'region': command_region,
    'minpic': command_minpic,
    'brute': command_brute,
    'timeshare': command_timeshare,
    'oma': command_oma,
    'compare': command_compare,
    'epi-bounds': command_epi_bounds,
    }


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario file (.json, .pky) or JSON text")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--tol", type=float, default=1e-9, help="improvement tolerance for the local search (default 1e-9)")
    common.add_argument("--seed", type=int, default=0, help="seed for a generated scenario (default 0)")
    common.add_argument("--users", type=int, default=2, help="users in a generated scenario (default 2)")
    common.add_argument("--grid", type=int, default=64, help="grid resolution for region and oma (default 64)")
    common.add_argument("--split-grid", type=int, default=BruteSettings.split_grid, help="rate-split lattice for brute (default %(default)s)")
    common.add_argument("--power", type=float, help="total power for region and epi-bounds")
    common.add_argument("--timing", action="store_true", help="add a wall_time_s column")
    common.add_argument("-v", "--verbose", action="count", default=0, help="log to stderr; repeat for debug output")

    parser = argparse.ArgumentParser(prog="partialmac", description="Power minimization on the partial-MAC interference channel.")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=COMMAND_HELP[name])
    return parser


@export
def run_command(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if not e.code else EXIT_INVALID

    if args.verbose:
        level = logging.INFO if args.verbose == 1 else logging.DEBUG
        logging.basicConfig(level=level, stream=sys.stderr, format="%(name)s: %(message)s")

    try:
        sc = scenario_for(args)
        rows, fieldnames, exit_code = COMMANDS[args.command](sc, args)
        if args.out:
            export_csv(rows, args.out, fieldnames)
        else:
            sys.stdout.write(format_csv(rows, fieldnames))
    except InfeasibleError as e:
        print(f"partialmac {args.command}: infeasible: {e.message}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError) as e:
        message = e.message if isinstance(e, PartialMacError) else str(e)
        print(f"partialmac {args.command}: {message}", file=sys.stderr)
        return EXIT_INVALID
    return exit_code


def main():
    sys.exit(run_command())
