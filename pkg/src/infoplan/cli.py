"""Command-line experiment runner.

Subcommands: ``weighing``, ``guess``, ``submarine-exact``,
``submarine-rollout`` and ``gp-transect``. Every run writes one report
(CSV or JSON) to ``--out`` or stdout. Options may also come from a
``key=value`` file given with ``--config``; flags on the command line win.

Exit status is 0 on success and otherwise the ``exit_code`` of the error
class raised (model 2, resource 3, numerical 4, target not reached 5,
internal consistency 6), 64 for usage errors and 74 for I/O errors.
"""
from __future__ import annotations

import argparse
import math
import sys
import time

from . import __version__
from .agent_dp import brute_force_value, solve_extended
from .domains import (
    Grid,
    guess_model,
    questions_needed,
    submarine_process,
    weighing_model,
    weighings_needed,
)
from .domains.submarine import TIE_BREAKS
from .dp import TIE_TOL, min_stages_for_information, solve
from .errors import InfoPlanError, ModelError, ResourceError
from .gp import SEKernel, TransectProblem, brute_force_transect, exactly_one, plan_transect
from .report import FORMATS, Report
from .rollout import RolloutConfig, greedy_search, min_rollout_measurements, rollout_search, summarize_grid

EX_USAGE = 64
EX_IOERR = 74
# config-echo exclusions: where the report goes does not change its content
_NOT_ECHOED = {"command", "config", "out", "timings", "func"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}


# counting domains -------------------------------------------------------------


def _counting(args, name, model, bound, bound_name) -> Report:
    if args.sweep:
        lo, hi = args.sweep
        if lo < 2 or hi < lo:
            raise ModelError(f"sweep range must satisfy 2 <= lo <= hi, got {lo}..{hi}")
        rep = Report(name, _echo(args), ["n", "target_bits", "min_stages", bound_name, "match"])
        for n in range(lo, hi + 1):
            stages = min_stages_for_information(model(n), math.log2(n), args.max_stages, args.state_cap)
            rep.add(n=n, target_bits=math.log2(n), min_stages=stages,
                    **{bound_name: bound(n), "match": stages == bound(n)})
        rep.summary = {"all_match": all(r["match"] for r in rep.records)}
        return rep

    if args.n is None:
        raise ModelError("--n is required unless --sweep is given")
    proc = model(args.n)
    if args.target_bits is not None:
        horizon = min_stages_for_information(proc, args.target_bits, args.max_stages, args.state_cap)
    elif args.horizon is not None:
        horizon = args.horizon
    else:
        raise ModelError("give --horizon or --target-bits")
    sol = solve(proc, horizon, args.state_cap)
    rep = Report(name, _echo(args), ["k", "state", "value_bits", "argmax"])
    for k in range(horizon):
        for x in sorted(sol.policy[k], key=repr):
            rep.add(k=k, state=x, value_bits=sol.values[k][x], argmax=list(sol.policy[k][x]))
    rep.summary = {
        "horizon": horizon,
        "value_bits": sol.value,
        "max_bits": math.log2(args.n),
        "stage0_argmax": list(sol.argmax(0, sol.initial_state)),
        bound_name: bound(args.n),
    }
    return rep


def cmd_weighing(args) -> Report:
    return _counting(args, "weighing", weighing_model, weighings_needed, "bound_weighings")


def cmd_guess(args) -> Report:
    return _counting(args, "guess", guess_model, questions_needed, "bound_questions")


# submarine ----------------------------------------------------------------------


def _grid(args, width=None):
    w = width if width is not None else args.width
    h = w if width is not None or args.height is None else args.height
    return Grid(w, h, tie_break=args.tie_break)


def cmd_submarine_exact(args) -> Report:
    grid = _grid(args)
    proc = submarine_process(grid)
    full = math.log2(grid.n_cells)
    try:
        if args.horizon is not None:
            horizon = args.horizon
            sol = solve_extended(proc, horizon, cap=args.state_cap)
        else:
            for horizon in range(1, grid.n_cells + 1):
                sol = solve_extended(proc, horizon, cap=args.state_cap)
                if sol.best_initial()[0] >= full - TIE_TOL:
                    break
    except ResourceError as exc:
        raise ResourceError(f"{exc}; use the submarine-rollout subcommand for this grid", cap=exc.cap) from None
    value, starts = sol.best_initial()
    rep = Report(
        "submarine-exact",
        _echo(args),
        ["start", "k", "ship_cell", "searched", "coverage_u_k", "optimal_moves", "destinations"],
    )
    seen = set()

    def follow(start, k, xp, x):
        # walk the "not found" branch under every optimal move
        if k == sol.horizon or not isinstance(x, int) or (start, k, xp, x) in seen:
            return
        seen.add((start, k, xp, x))
        ups = sol.move_policy[k][(xp, x)]
        rep.add(start=start, k=k, ship_cell=xp, searched=list(grid.cells_of(x)),
                coverage_u_k=proc.coverage(xp, x, xp), optimal_moves=list(ups),
                destinations=[xp + d for d in ups])
        nxt = proc.transition(k, x, xp, "no") if grid.remaining(x) > proc.coverage(xp, x, xp) else None
        if nxt is None:
            return
        for d in ups:
            follow(start, k + 1, xp + d, nxt)

    for s in (grid.cells() if args.all_starts else starts):
        follow(s, 0, s, 0)
    rep.summary = {
        "grid": f"{grid.width}x{grid.height}",
        "horizon": sol.horizon,
        "value_bits": value,
        "max_bits": full,
        "optimal_starts": list(starts),
        "stage0_coverage": sorted({proc.coverage(s, 0, s) for s in starts}),
        "start_values": {s: sol.value_at(s) for s in grid.cells()},
    }
    if args.oracle:
        rep.summary["oracle_bits"] = brute_force_value(proc, sol.horizon)
        rep.summary["oracle_match"] = abs(rep.summary["oracle_bits"] - value) <= TIE_TOL
    return rep


def _search(grid, policy, start, horizon, step_cap):
    if policy == "greedy":
        return greedy_search(grid, start, step_cap)
    if horizon is not None:
        return rollout_search(grid, start, horizon)
    return min_rollout_measurements(grid, start)[1]


def cmd_submarine_rollout(args) -> Report:
    sizes = args.sizes or [None]
    if args.emit == "trajectory":
        if len(sizes) != 1:
            raise ModelError("--emit trajectory takes a single grid")
        grid = _grid(args, sizes[0])
        start = args.start
        if start is None:
            start = summarize_grid(grid, args.policy, args.starts).best_start
            if start is None:
                raise ModelError("no start completes the search; pass --start to see one run")
        traj = _search(grid, args.policy, start, args.horizon, args.step_cap)
        rep = Report(
            "submarine-rollout",
            _echo(args),
            ["k", "ship_cell", "move", "coverage_u_k", "stage_entropy_bits", "cumulative_bits"],
        )
        acc = []
        for r in traj.records:
            acc.append(r.bits)
            rep.add(k=r.k, ship_cell=r.position, move=r.move, coverage_u_k=r.coverage,
                    stage_entropy_bits=r.bits, cumulative_bits=math.fsum(acc))
        rep.summary = {
            "grid": f"{grid.width}x{grid.height}",
            "policy": args.policy,
            "start": start,
            "completed": traj.completed,
            "reason": traj.reason,
            "measurements": traj.measurements,
            "terminal_bits": traj.terminal_bits,
            "total_bits": traj.total_bits,
        }
        return rep

    rep = Report("submarine-rollout", _echo(args), ["grid", "cells", "measurements", "percentage"])
    per_grid = {}
    for size in sizes:
        grid = _grid(args, size)
        if args.horizon is not None or (args.policy == "greedy" and args.step_cap is not None):
            counts = {}
            for s in args.starts or grid.cells():
                t = _search(grid, args.policy, s, args.horizon, args.step_cap)
                counts[s] = t.measurements if t.completed else None
            done = {s: n for s, n in counts.items() if n is not None}
            best = min(done, key=lambda s: (done[s], s)) if done else None
            meas = done.get(best)
        else:
            summ = summarize_grid(grid, args.policy, args.starts)
            counts, best, meas = summ.per_start, summ.best_start, summ.measurements
        label = f"{grid.width}x{grid.height}"
        pct = None if meas is None else round(100.0 * meas / (grid.n_cells - 1), 1)
        rep.add(grid=label, cells=grid.n_cells, measurements=meas, percentage=pct)
        per_grid[label] = {
            "best_start": best,
            "per_start": counts,
            "failed_starts": [s for s, n in counts.items() if n is None],
        }
    rep.summary = {"policy": args.policy, "grids": per_grid}
    return rep


# gp ---------------------------------------------------------------------------


def _broadcast(values, n, name):
    if len(values) == 1:
        return list(values) * n
    if len(values) != n:
        raise ModelError(f"--{name} needs 1 or {n} values, got {len(values)}")
    return list(values)


def cmd_gp_transect(args) -> Report:
    n_fields = max(len(args.signal_variance), len(args.length_scale), len(args.noise_variance))
    if args.mode != "multi-field" and n_fields != 1:
        raise ModelError("several fields require --mode multi-field")
    fields = [
        SEKernel(ls, sv, nv)
        for ls, sv, nv in zip(
            _broadcast(args.length_scale, n_fields, "length-scale"),
            _broadcast(args.signal_variance, n_fields, "signal-variance"),
            _broadcast(args.noise_variance, n_fields, "noise-variance"),
        )
    ]
    selections = exactly_one(n_fields) if args.selection == "one" else None
    common = dict(fields=fields, horizon=args.horizon, mode=args.mode, slip=args.slip,
                  selections=selections, window=args.window)
    if args.lattice_height is None:
        problem = TransectProblem.line(args.points, args.spacing, args.max_step, **common)
    else:
        w, h, s = args.points, args.lattice_height, args.spacing
        lattice = [(i * s, j * s) for j in range(h) for i in range(w)]
        reach = range(-args.max_step, args.max_step + 1)
        moves = [(dx * s, dy * s) for dy in reach for dx in reach if (dx, dy) != (0, 0)]
        problem = TransectProblem(lattice, moves, **common)
    start = problem.position(args.start)
    config = RolloutConfig(horizon=args.horizon, samples_per_control=args.samples,
                           rng_seed=args.seed, tie_break=args.tie_break)
    traj = plan_transect(problem, start, config, lookahead=args.lookahead)
    rep = Report("gp-transect", _echo(args),
                 ["k", "position", "selection", "stage_entropy_bits", "cumulative_bits"])
    acc = []
    for k, (pos, sel, bits) in enumerate(zip(traj.path, traj.selections, traj.stage_bits)):
        acc.append(bits)
        rep.add(k=k, position=list(pos), selection=list(sel), stage_entropy_bits=bits,
                cumulative_bits=math.fsum(acc))
    rep.summary = {"start": list(start), "total_bits": traj.total_bits, "joint_bits": traj.joint_bits}
    if traj.joint_bits is not None:
        rep.summary["chain_rule_gap"] = abs(traj.total_bits - traj.joint_bits)
    if args.oracle:
        best, paths = brute_force_transect(problem, start)
        rep.summary["oracle_bits"] = best
        rep.summary["oracle_match"] = tuple(traj.path) in paths and abs(best - traj.total_bits) <= TIE_TOL
    return rep


# parser ---------------------------------------------------------------------


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="RNG seed (recorded in the report)")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--timings", action="store_true",
                   help="embed wall-clock timings (makes output run-dependent)")
    p.add_argument("--state-cap", type=int, default=None,
                   help="reachable-state cap (default: INFOPLAN_STATE_CAP or 5000000)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="infoplan", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, func, what in (("weighing", cmd_weighing, "balls"), ("guess", cmd_guess, "integers")):
        p = sub.add_parser(name, help=f"exact DP for the {name} problem")
        _common(p)
        p.add_argument("--n", type=int, help=f"number of {what}")
        p.add_argument("--horizon", type=int)
        p.add_argument("--target-bits", type=float)
        p.add_argument("--max-stages", type=int, default=30)
        p.add_argument("--sweep", type=int, nargs=2, metavar=("LO", "HI"),
                       help="minimum stages for log2(n) bits for every n in LO..HI")
        p.set_defaults(func=func)

    p = sub.add_parser("submarine-exact", help="exact agent DP for the submarine search")
    _common(p)
    p.add_argument("--width", type=int, default=3)
    p.add_argument("--height", type=int)
    p.add_argument("--horizon", type=int, help="default: fewest stages resolving every cell")
    p.add_argument("--tie-break", choices=TIE_BREAKS, default=TIE_BREAKS[0])
    p.add_argument("--all-starts", action="store_true", help="list controls for every start")
    p.add_argument("--oracle", action="store_true", help="cross-check with policy enumeration")
    p.set_defaults(func=cmd_submarine_exact)

    p = sub.add_parser("submarine-rollout", help="greedy or rollout search on larger grids")
    _common(p)
    p.add_argument("--width", type=int, default=7)
    p.add_argument("--height", type=int)
    p.add_argument("--sizes", type=int, nargs="+", help="square grid sizes (overrides --width)")
    p.add_argument("--policy", choices=("rollout", "greedy"), default="rollout")
    p.add_argument("--emit", choices=("summary", "trajectory"), default="summary")
    p.add_argument("--start", type=int, help="trajectory start cell (default: best start)")
    p.add_argument("--starts", type=int, nargs="+", help="start cells to evaluate (default: all)")
    p.add_argument("--horizon", type=int, help="fixed rollout horizon (default: smallest that finishes)")
    p.add_argument("--step-cap", type=int, help="greedy step cap (default: 2 x cells)")
    p.add_argument("--tie-break", choices=TIE_BREAKS, default=TIE_BREAKS[0])
    p.set_defaults(func=cmd_submarine_rollout)

    p = sub.add_parser("gp-transect", help="plan GP sampling locations on a lattice")
    _common(p)
    p.add_argument("--points", type=int, default=5, help="lattice width in waypoints")
    p.add_argument("--lattice-height", type=int, help="rows for a 2-D lattice (default: 1-D)")
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--max-step", type=int, default=1)
    p.add_argument("--start", type=int, default=0, help="start waypoint index")
    p.add_argument("--horizon", type=int, default=3)
    p.add_argument("--length-scale", type=float, nargs="+", default=[1.0])
    p.add_argument("--signal-variance", type=float, nargs="+", default=[1.0])
    p.add_argument("--noise-variance", type=float, nargs="+", default=[0.01])
    p.add_argument("--mode", choices=("deterministic", "stochastic", "multi-field"), default="deterministic")
    p.add_argument("--slip", type=float, default=0.0)
    p.add_argument("--selection", choices=("all", "one"), default="all")
    p.add_argument("--window", type=float)
    p.add_argument("--lookahead", choices=("rollout", "exhaustive"), default="rollout")
    p.add_argument("--samples", type=int, default=1, help="rollout samples per control")
    p.add_argument("--tie-break", choices=TIE_BREAKS, default=TIE_BREAKS[0])
    p.add_argument("--oracle", action="store_true", help="compare with exhaustive path search")
    p.set_defaults(func=cmd_gp_transect)
    return parser


def _read_config(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _apply_config(sub_parser, raw: dict, argv_dests: set) -> dict:
    actions = {a.dest: a for a in sub_parser._actions}
    defaults = {}
    for key, text in raw.items():
        if key in _NOT_ECHOED or key not in actions:
            raise UsageError(f"unknown config key {key!r}")
        if key in argv_dests:
            continue
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = text.lower() in ("1", "true", "yes", "on")
            continue
        conv = act.type or str
        parts = text.split() if act.nargs not in (None, "?") else [text]
        vals = [conv(v) for v in parts]
        if act.choices is not None and any(v not in act.choices for v in vals):
            raise UsageError(f"config {key}={text!r}: choose from {list(act.choices)}")
        defaults[key] = vals if act.nargs not in (None, "?") else vals[0]
    return defaults


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub_parser = parser._subparsers._group_actions[0].choices[args.command]
        given = {a.dest for a in sub_parser._actions
                 if any(opt in argv or any(s.startswith(opt + "=") for s in argv)
                        for opt in a.option_strings)}
        try:
            raw = _read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        try:
            sub_parser.set_defaults(**_apply_config(sub_parser, raw, given))
        except ValueError as exc:
            raise UsageError(f"bad config value: {exc}") from None
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EX_USAGE
    t0 = time.perf_counter()
    try:
        rep = args.func(args)
    except InfoPlanError as exc:
        print(f"infoplan {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    elapsed = time.perf_counter() - t0
    if args.timings:
        rep.timings = {"wall_seconds": elapsed}
    text = rep.render(args.format)
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"infoplan: cannot write output: {exc}", file=sys.stderr)
        return EX_IOERR
    print(f"infoplan {args.command}: done in {elapsed:.3f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
