"""Command line interface: solve, check, simulate, sweep.

Exit codes: 0 on a verified run, 1 on usage/config errors, 2 when any
structural diagnostic or cross-check fails.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ResolvedConfig, fmt, load_config
from .evaluate import evaluate_policy
from .model import Criterion, ModelParams, validate
from .reporting import (
    read_policy_table,
    render_policy_figure,
    render_sweep_figure,
    write_estimate_document,
    write_policy_table,
    write_report_document,
    write_sweep_table,
)
from .sim import simulate
from .solver import SolverError, diagnose, policy_iteration, solve_finite, solve_infinite

__all__ = ["main"]

SWEEP_PARAMS = ("r", "h", "c", "theta", "lambda", "alpha", "N")


def _validated(cfg: ResolvedConfig):
    vr = validate(cfg.params, cfg.actions)
    if vr.errors:
        raise ConfigError("; ".join(vr.errors))
    return vr.actions, vr.idle_appended


def _solve(cfg: ResolvedConfig, params: ModelParams, actions, L=None):
    if params.capacity is not None:
        return solve_finite(params, actions, tie_eps=cfg.tie_eps, zone_frac=cfg.zone_frac)
    if L is None:
        L = cfg.L
    if L is not None:
        return policy_iteration(
            params, actions, L, tie_eps=cfg.tie_eps, zone_frac=cfg.zone_frac
        )
    return solve_infinite(
        params,
        actions,
        eps=cfg.tail_eps,
        ceiling=cfg.max_states,
        tie_eps=cfg.tie_eps,
        zone_frac=cfg.zone_frac,
    )


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    actions, idle_appended = _validated(cfg)
    report = _solve(cfg, cfg.params, actions)
    resolved = cfg if cfg.params.capacity is not None else cfg.with_L(report.L)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_policy_table(out / "policy.csv", report)
    write_report_document(out / "report.txt", report, resolved)
    if not args.no_figure:
        render_policy_figure(out / "policy.png", report)
    if idle_appended:
        print(f"note: idle point ({fmt(cfg.params.theta)}, "
              f"{fmt(cfg.params.c * cfg.params.theta)}) appended to the action set")
    obj = report.evaluation.gain if report.params.criterion == Criterion.AVERAGE \
        else report.evaluation.values[0]
    label = "gain" if report.params.criterion == Criterion.AVERAGE else "value_at_0"
    print(f"{label} = {fmt(obj)}")
    print(f"iterations = {report.iterations}  L = {report.L}  "
          f"tail_limit_mu = {fmt(report.mu_inf)}")
    print(f"verified = {str(report.verified).lower()}")
    print(f"wrote {out / 'policy.csv'}, {out / 'report.txt'}"
          + ("" if args.no_figure else f", {out / 'policy.png'}"))
    return 0 if report.verified else 2


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    actions, _ = _validated(cfg)
    policy = read_policy_table(args.policy)
    L = len(policy)
    if cfg.params.capacity is not None and L != cfg.params.capacity:
        raise ConfigError(
            f"policy covers {L} states but config capacity is {cfg.params.capacity}"
        )
    if np.any(policy.mu <= 0):
        raise ConfigError("policy file contains nonpositive service rates")
    ev = evaluate_policy(policy, cfg.params, L)
    diag = diagnose(cfg.params, actions, policy, ev, L, cfg.zone_frac)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    label = "gain" if ev.criterion == Criterion.AVERAGE else "value_at_0"
    obj = ev.gain if ev.criterion == Criterion.AVERAGE else ev.values[0]
    lines = [f"{label} = {fmt(obj)}", f"residual = {fmt(ev.residual)}",
             f"verified = {str(diag.verified).lower()}"]
    if diag.monotone is not None:
        lines.append(f"monotone = {str(diag.monotone.ok).lower()}")
    if diag.unimodal is not None:
        lines.append(f"unimodal = {str(diag.unimodal.ok).lower()}")
        if diag.unimodal.peak is not None:
            lines.append(f"unimodal_peak = {diag.unimodal.peak}")
    if diag.concavity is not None:
        lines.append(f"concavity = {str(diag.concavity.ok).lower()}")
    for b in diag.bounds:
        state = "skipped" if b.skipped else ("pass" if b.satisfied else "FAIL")
        lines.append(f"bound_{b.name} = {state}")
    text = "\n".join(lines)
    (out / "check.txt").write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0 if diag.verified else 2


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    _validated(cfg)
    policy = read_policy_table(args.policy)
    L = len(policy)
    if cfg.params.capacity is not None and L != cfg.params.capacity:
        raise ConfigError(
            f"policy covers {L} states but config capacity is {cfg.params.capacity}"
        )
    horizon = args.horizon if args.horizon is not None else cfg.sim_horizon
    reps = args.reps if args.reps is not None else cfg.sim_reps
    seed = args.seed if args.seed is not None else cfg.sim_seed
    est = simulate(
        policy,
        cfg.params,
        start=0,
        horizon=horizon,
        replications=reps,
        seed=seed,
        burn_in_frac=cfg.sim_burn_in,
    )
    ev = evaluate_policy(policy, cfg.params, L)
    analytic = ev.gain if ev.criterion == Criterion.AVERAGE else float(ev.values[0])
    z = None
    if est.stderr is not None:
        gap = abs(est.estimate - analytic)
        z = gap / est.stderr if est.stderr > 0 else (0.0 if gap == 0 else math.inf)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_estimate_document(out / "estimate.txt", est, analytic, z)
    se_txt = fmt(est.stderr) if est.stderr is not None else "none"
    print(f"estimate = {fmt(est.estimate)}  stderr = {se_txt}")
    print(f"analytic = {fmt(analytic)}  z = {fmt(z) if z is not None else 'none'}")
    print(f"wrote {out / 'estimate.txt'}")
    if est.stderr is None:
        print("warning: single replication, no standard error", file=sys.stderr)
        return 0
    return 2 if z > 4.0 else 0


def _parse_sweep(spec: str):
    if "=" not in spec:
        raise ConfigError("sweep spec must look like name=v1,v2,...")
    name, _, rest = spec.partition("=")
    name = name.strip()
    if name not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {name!r}; choose from {SWEEP_PARAMS}")
    values = [tok.strip() for tok in rest.split(",") if tok.strip() != ""]
    try:
        parsed = [int(v) if name == "N" else float(v) for v in values]
    except ValueError:
        raise ConfigError(f"sweep values for {name!r} must be numbers") from None
    return name, parsed


def _apply_sweep(params: ModelParams, name: str, value) -> ModelParams:
    field = {"lambda": "lam", "N": "capacity"}.get(name, name)
    return params.replace(**{field: value})


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    name, values = _parse_sweep(args.sweep)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if not values:
        write_sweep_table(out / "sweep.csv", [])
        print(f"wrote {out / 'sweep.csv'} (empty sweep)")
        return 0
    solved = []
    pinned_L = cfg.L
    all_verified = True
    for value in values:
        params = _apply_sweep(cfg.params, name, value)
        vr = validate(params, cfg.actions)
        if vr.errors:
            raise ConfigError(f"{name}={value}: " + "; ".join(vr.errors))
        report = _solve(cfg, params, vr.actions, L=pinned_L)
        if pinned_L is None and params.capacity is None:
            # pin the first resolved truncation so later values share it
            pinned_L = report.L
        solved.append((value, report))
        all_verified = all_verified and report.verified
    rows = []
    for value, report in solved:
        for i in range(len(report.policy)):
            rows.append((value, i + 1, report.policy.mu[i]))
    write_sweep_table(out / "sweep.csv", rows)
    lines = [f"parameter = {name}"]
    for value, report in solved:
        obj = report.evaluation.gain if report.params.criterion == Criterion.AVERAGE \
            else report.evaluation.values[0]
        lines.append(
            f"{name} = {fmt(value)}: objective = {fmt(obj)}, L = {report.L}, "
            f"verified = {str(report.verified).lower()}"
        )
    checks_ok = True
    if name == "r" and len(solved) > 1:
        pols = [rep.policy.mu for _, rep in solved]
        same_L = all(len(p) == len(pols[0]) for p in pols)
        if cfg.params.payment.value == "arrival":
            ok = same_L and all(np.array_equal(pols[0], p) for p in pols[1:])
            lines.append(f"cross_check_r_invariance = {'pass' if ok else 'FAIL'}")
            checks_ok = checks_ok and ok
        else:
            order = np.argsort([v for v, _ in solved])
            ok = same_L
            if same_L:
                for a, b in zip(order[:-1], order[1:]):
                    ok = ok and bool(np.all(pols[b] >= pols[a] - 1e-12))
            lines.append(f"cross_check_r_monotonicity = {'pass' if ok else 'FAIL'}")
            checks_ok = checks_ok and ok
    text = "\n".join(lines)
    (out / "sweep_report.txt").write_text(text + "\n", encoding="utf-8")
    if not args.no_figure:
        render_sweep_figure(out / "sweep.png", name, solved)
    print(text)
    print(f"wrote {out / 'sweep.csv'}, {out / 'sweep_report.txt'}"
          + ("" if args.no_figure else f", {out / 'sweep.png'}"))
    return 0 if (all_verified and checks_ok) else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abandonq",
        description="Optimal service-rate policies for Markovian queues with abandonment",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, policy=False):
        p.add_argument("--config", required=True, help="INI config path")
        p.add_argument("--out", default=".", help="output directory")
        if policy:
            p.add_argument("--policy", required=True, help="policy CSV path")

    p = sub.add_parser("solve", help="solve for the optimal policy")
    common(p)
    p.add_argument("--no-figure", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="evaluate and structurally check a policy")
    common(p, policy=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="Monte Carlo cross-validation of a policy")
    common(p, policy=True)
    p.add_argument("--horizon", type=float, default=None, help="simulation horizon T")
    p.add_argument("--reps", type=int, default=None, help="replications R")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="solve across a parameter sweep")
    common(p)
    p.add_argument("--sweep", required=True, help='sweep spec, e.g. "r=0,2,4"')
    p.add_argument("--no-figure", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, SolverError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
