"""Command-line entry point: ``discround <command> [options]``.

Exit codes: 0 success, 1 failed verification, 2 parse/validation error,
3 precondition failure, 4 no convergence after restarts.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from .baselines import iterated_round, randomized_round
from .instance import InstanceError, load_instance
from .report import ConstraintRow, RoundingReport, emit_report
from .schedules import (
    ConvergenceError,
    assign_parts,
    column_sparsity,
    degmat,
    lambda_for,
    laminar_rsp,
    multicrit,
    round_full,
    row_scales,
    rsp,
    ScheduleParams,
)
from .walk import (
    PreconditionError,
    SideConstraint,
    WalkConfig,
    WalkError,
    fractional_mask,
    partial_round,
)

log = logging.getLogger("discround")

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_PRECONDITION, EXIT_CONVERGENCE = 0, 1, 2, 3, 4


def _config(args, n: int) -> WalkConfig:
    over = {}
    for key, attr in (("alpha", "alpha"), ("gamma", "gamma"), ("k0", "k0"), ("restarts", "restarts"),
                      ("slack_exp", "slack_exp")):
        v = getattr(args, attr)
        if v is not None:
            over[key] = v
    return WalkConfig.from_preset(args.preset, max(n, 2), **over)


def _rows(a, b, x, lams, n, one_sided=False) -> list[ConstraintRow]:
    m = a.shape[0]
    labels = assign_parts(b, n, max(m, 1), column_sparsity(a), 1.0, row_scales(a))
    diff = a @ x - b
    viol = np.maximum(diff, 0.0) if one_sided else np.abs(diff)
    return [ConstraintRow(j, labels[j].part, float(b[j]), float(lams[j]), float(viol[j]), *labels[j].menu)
            for j in range(m)]


def _structure(inst):
    return inst.matroid if inst.matroid is not None else inst.laminar


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_round(args, inst):
    cfg = _config(args, inst.n)
    x, rep = round_full(inst.y, inst.a, inst.b, _structure(inst), cfg, args.seed,
                        base=inst.base, groups=inst.groups)
    return rep, {"x": x.astype(int).tolist()}


def cmd_round_matroid(args, inst):
    cfg = _config(args, inst.n)
    a, b = inst.a, inst.b
    m = a.shape[0]
    f = max(int(fractional_mask(inst.y).sum()), 1)
    labels = assign_parts(b, inst.n, max(m, 1), column_sparsity(a), 1.0, row_scales(a))
    support = np.count_nonzero(a[:, fractional_mask(inst.y)], axis=1) if m else []
    lams = []
    for j, c in enumerate(inst.constraints):
        if c.lam is not None:
            lams.append(c.lam)
        else:
            lams.append(lambda_for(labels[j].part, j + 1, f, b[j], int(support[j]), ScheduleParams(),
                                   column_sparsity(a), cfg.k0))
    side = [SideConstraint(a[j], lams[j]) for j in range(m)]
    x, wr = partial_round(inst.y, side, _structure(inst), cfg, args.seed, base=inst.base)
    rep = RoundingReport(_rows(a, b, x, lams, inst.n), {
        "driver": "round-matroid", "seed": args.seed, "preset": cfg.preset, "restarts": cfg.restarts,
        "restarts_used": wr.restarts_used, "steps": wr.steps, "truncations": wr.truncations,
        "newly_integral": wr.newly_integral, "n_frac": wr.n_frac, "success": wr.success,
    })
    return rep, {"x": x.tolist()}


def cmd_degmat(args, inst):
    if inst.matroid is None or inst.costs is None:
        raise InstanceError("schema", "top level", "degmat needs 'matroid' and 'costs'")
    cfg = _config(args, inst.n)
    res = degmat(inst.costs, inst.a, inst.b, inst.matroid, inst.y, cfg, args.seed)
    return res.report, {"base": sorted(res.base), "cost": res.cost, "lp_cost": res.lp_cost}


def cmd_multicrit(args, inst):
    if inst.matroid is None or inst.costs is None or inst.budgets is None:
        raise InstanceError("schema", "top level", "multicrit needs 'matroid', 'costs' and 'budgets'")
    cfg = _config(args, inst.n)
    costs = np.atleast_2d(inst.costs)
    eps = inst.epsilon if inst.epsilon is not None else 0.5
    res = multicrit(inst.matroid, costs, inst.budgets, eps, cfg, args.seed)
    meta = {"driver": "multicrit", "seed": args.seed, "preset": cfg.preset, "status": res.status,
            "branches": res.branches, "epsilon": eps}
    if not res.feasible:
        return RoundingReport([], meta), {"status": res.status}
    ind = np.zeros(inst.n)
    ind[sorted(res.base)] = 1.0
    meta["constant"] = res.constant
    rows = _rows(costs, inst.budgets, ind, [0.0] * costs.shape[0], inst.n, one_sided=True)
    return RoundingReport(rows, meta), {"status": res.status, "base": sorted(res.base),
                                        "costs": res.costs.tolist()}


def _need_paths(inst):
    if inst.paths is None:
        raise InstanceError("schema", "top level", "this command needs a 'paths' block")


def cmd_rsp(args, inst):
    _need_paths(inst)
    cfg = _config(args, sum(len(p) for p in inst.paths.pairs))
    res = rsp(inst.paths.pairs, inst.paths.capacities, cfg, args.seed)
    return res.report, {"paths": {str(k): v for k, v in sorted(res.chosen.items())},
                        "loads": {str(k): v for k, v in res.loads.items()}}


def cmd_laminar_rsp(args, inst):
    _need_paths(inst)
    cfg = _config(args, sum(len(p) for p in inst.paths.pairs))
    res = laminar_rsp(inst.paths.pairs, inst.paths.requirements, inst.paths.capacities, cfg, args.seed)
    return res.report, {"paths": {str(k): v for k, v in sorted(res.counts.items())},
                        "requirements_met": res.requirements_met}


def cmd_baseline(args, inst):
    a, b = inst.a, inst.b
    if args.method == "random":
        x = randomized_round(inst.y, args.seed)
        dropped = []
    else:
        x, dropped = iterated_round(inst.y, a)
    rep = RoundingReport(_rows(a, b, x, [math.nan] * a.shape[0], inst.n),
                         {"driver": f"baseline-{args.method}", "seed": args.seed, "dropped": len(dropped)})
    return rep, {"x": x.astype(int).tolist()}


def cmd_verify(args, inst):
    """Run one debug-mode walk and check its invariants; prints one line per check."""
    cfg = _config(args, inst.n)
    cfg = WalkConfig(**{**cfg.__dict__, "debug": True})
    a, b = inst.a, inst.b
    m = a.shape[0]
    lams = [c.lam if c.lam is not None else 1.0 for c in inst.constraints]
    side = [SideConstraint(a[j], lams[j]) for j in range(m)]
    checks = []
    try:
        x, wr = partial_round(inst.y, side, _structure(inst), cfg, args.seed, base=inst.base, check_lambda=False)
        checks.append(("feasibility audits", all(au.violation <= 1e-8 and au.structure_ok for au in wr.audits)))
        checks.append(("class sums", wr.max_class_drift <= 1e-8))
        checks.append(("truncations <= n_frac", wr.truncations <= wr.n_frac))
        checks.append(("side bands", wr.max_side_excess <= 1e-6))
        checks.append(("potential bound", wr.potential_end <= cfg.alpha ** 2 * max(wr.n_frac, 1) + 1e-9))
    except WalkError as exc:
        checks.append((f"walk raised {type(exc).__name__}: {exc}", False))
    ok = all(c for _, c in checks)
    lines = [f"{'PASS' if c else 'FAIL'} {name}" for name, c in checks]
    rep = RoundingReport([], {"driver": "verify", "seed": args.seed, "passed": ok})
    return rep, {"checks": lines, "ok": ok}


def cmd_bench(args):
    from .bench import bench_csv, bench_sweep, summarize
    from .plotting import plot_sweep

    cfg = _config(args, args.n)
    bs = [int(v) for v in args.bs.split(",")]
    rows = bench_sweep(args.n, args.m, bs, args.trials, args.seed, cfg, args.jobs)
    data = bench_csv(rows)
    if args.out:
        out = Path(args.out)
        out.write_bytes(data)
        plot_sweep(rows, out.with_suffix(".png"))
        log.info("wrote %s and %s", out, out.with_suffix(".png"))
    else:
        sys.stdout.buffer.write(data)
    for b, s in summarize(rows).items():
        print(f"# b={b}: engine {s['engine']:.4g}  random {s['random']:.4g}  "
              f"envelope {s['envelope_nlog']:.4g}  max ratio {s['max_ratio']:.4g}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "round": cmd_round,
    "round-matroid": cmd_round_matroid,
    "degmat": cmd_degmat,
    "multicrit": cmd_multicrit,
    "rsp": cmd_rsp,
    "laminar-rsp": cmd_laminar_rsp,
    "baseline": cmd_baseline,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    env_seed = os.environ.get("DISCROUND_SEED")
    common.add_argument("--seed", type=int, default=int(env_seed) if env_seed else 0,
                        help="random seed (default: $DISCROUND_SEED or 0)")
    common.add_argument("--preset", choices=["practical", "paper"], default="practical")
    common.add_argument("--gamma", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--k0", type=float)
    common.add_argument("--restarts", type=int)
    common.add_argument("--slack-exp", dest="slack_exp", type=float)
    common.add_argument("--out", help="write the report here (csv by default) plus .json sidecars")
    common.add_argument("--format", choices=["csv", "table"], help="report format (default: table on stdout, csv for --out)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="discround", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "baseline":
            p.add_argument("method", choices=["random", "iterated"])
        p.add_argument("instance", help="instance file (JSON)")
    b = sub.add_parser("bench", parents=[common], help="violation-vs-b sweep with a figure")
    b.add_argument("--n", type=int, default=256)
    b.add_argument("--m", type=int)
    b.add_argument("--bs", default="16,64,256,1024", help="comma-separated right-hand sides")
    b.add_argument("--trials", type=int, default=3)
    b.add_argument("--jobs", type=int, default=1)
    return parser


def _write(args, rep: RoundingReport, extra: dict) -> None:
    fmt = args.format or ("csv" if args.out else "table")
    data = emit_report(rep, fmt)
    if args.out:
        out = Path(args.out)
        out.write_bytes(data)
        sidecar = {"meta": _jsonable(rep.meta), "wall_time": rep.wall_time, **_jsonable(extra)}
        out.with_suffix(".json").write_text(json.dumps(sidecar, indent=1, sort_keys=True) + "\n")
    else:
        sys.stdout.buffer.write(data)
    for line in extra.get("checks", []):
        print(line)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "bench":
            return cmd_bench(args)
        inst = load_instance(args.instance)
        start = time.perf_counter()
        rep, extra = COMMANDS[args.command](args, inst)
        rep.wall_time = time.perf_counter() - start
        log.info("%s finished in %.3fs", args.command, rep.wall_time)
        _write(args, rep, extra)
        if args.command == "verify" and not extra["ok"]:
            return EXIT_VERIFY
        return EXIT_OK
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ConvergenceError, WalkError) as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
