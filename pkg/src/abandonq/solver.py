"""Policy iteration over the pruned envelope, truncation selection, and an
independent value-iteration oracle.

The iteration follows the classic scheme: start every controllable state
at the cheapest-rate breakpoint, alternate exact evaluation with a greedy
improvement sweep, retain incumbents on ties, stop at a fixed point. The
improvement coefficient for state i is the value increment at i-1
(shifted by -r under payment at completion), so the sweep is a batch of
breakpoint argmax queries against one convex envelope.

Infinite-buffer problems are solved on a truncated chain whose level is
doubled until the policy's tail sits at the theoretical limit rate and the
low states have stopped moving. The oracle solves the same truncated chain
by uniformization and (relative) value iteration over the raw action grid,
deliberately bypassing the envelope reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .evaluate import Evaluation, evaluate_policy
from .hull import LowerEnvelope, best_action_indices, lower_envelope, prune, slope_cap
from .model import ActionSet, Criterion, ModelParams, Payment, Policy, validate
from .structure import (
    BoundCheck,
    ConcavityCheck,
    MonotoneCheck,
    UnimodalCheck,
    check_bounds,
    check_concavity,
    check_monotone,
    check_unimodal,
    trusted_upto,
)

__all__ = [
    "Diagnostics",
    "diagnose",
    "OracleResult",
    "SolveReport",
    "SolverError",
    "policy_iteration",
    "solve_finite",
    "solve_infinite",
    "tail_limit",
    "value_iteration_oracle",
]

DEFAULT_CEILING = 2**20


class SolverError(RuntimeError):
    """Solve failure; carries the iteration trace gathered so far."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace or []


@dataclass(frozen=True)
class Diagnostics:
    """Structural checks attached to a solve (trusted zone only)."""

    trusted_upto: int
    monotone: MonotoneCheck | None
    unimodal: UnimodalCheck | None
    concavity: ConcavityCheck | None
    delta2_max: float
    bounds: list[BoundCheck]

    @property
    def verified(self) -> bool:
        parts = [c.ok for c in (self.monotone, self.unimodal, self.concavity) if c is not None]
        parts += [b.ok for b in self.bounds]
        return all(parts)


@dataclass(frozen=True)
class SolveReport:
    """Everything a solve produced, plus its structural diagnostics."""

    params: ModelParams
    actions: ActionSet
    envelope: LowerEnvelope
    policy: Policy
    evaluation: Evaluation
    iterations: int
    trace: list[tuple[float, int]]
    L: int
    mu_inf: float
    diagnostics: Diagnostics
    envelope_meta: dict
    stabilization: dict | None = None

    @property
    def objective(self):
        """Gain for the average criterion, value vector for discounted."""
        if self.params.criterion == Criterion.AVERAGE:
            return self.evaluation.gain
        return self.evaluation.values

    @property
    def verified(self) -> bool:
        return self.diagnostics.verified


def tail_limit(env: LowerEnvelope, params: ModelParams) -> float:
    """Limiting optimal rate: the largest breakpoint rate whose left slope
    stays strictly below the criterion cap (leftmost always qualifies via
    its -inf left slope)."""
    cap = slope_cap(params)
    return float(env.mu[env.left_slopes < cap].max())


def _improve(env, betas, pol_mu, pol_f, tie_eps):
    idx = best_action_indices(env, betas)
    new_mu, new_f = env.mu[idx], env.f[idx]
    keep = (-pol_f - pol_mu * betas) >= (-new_f - new_mu * betas) - tie_eps
    new_mu = np.where(keep, pol_mu, new_mu)
    new_f = np.where(keep, pol_f, new_f)
    return new_mu, new_f, int(np.count_nonzero(~keep))


def diagnose(params, actions, policy, ev, L, zone_frac):
    top = trusted_upto(L, params.capacity, zone_frac)
    infinite = params.capacity is None
    monotone = check_monotone(policy.mu[:top]) if infinite else None
    unimodal = None if infinite else check_unimodal(policy.mu)
    concavity = None
    d2max = math.nan
    if top + 1 >= 3:
        d2 = np.diff(ev.values[: top + 1], n=2)
        d2max = float(d2.max())
        if infinite:
            concavity = check_concavity(ev.values[: top + 1])
    # the bound propositions are infinite-buffer results; finite-capacity
    # solves are judged on shape alone
    bounds = check_bounds(ev, params, actions, trusted=top) if infinite else []
    return Diagnostics(
        trusted_upto=top,
        monotone=monotone,
        unimodal=unimodal,
        concavity=concavity,
        delta2_max=d2max,
        bounds=bounds,
    )


def policy_iteration(
    params: ModelParams,
    actions: ActionSet,
    L: int | None = None,
    *,
    tie_eps: float = 1e-12,
    max_iter: int | None = None,
    zone_frac: float = 0.05,
    _envelopes: tuple[LowerEnvelope, LowerEnvelope] | None = None,
) -> SolveReport:
    """Solve by exact policy iteration on states 0..L.

    The action set is used as given (run model.validate first to append
    the idle point). Raises SolverError if the iteration cap (10 L) is
    hit, which for a finite chain under incumbent-retention tie breaking
    signals a bug rather than slow convergence.
    """
    report = validate(params, actions)
    if report.errors:
        raise ValueError("; ".join(report.errors))
    if params.capacity is not None:
        if L is None:
            L = params.capacity
        elif L != params.capacity:
            raise ValueError("L must equal the finite capacity N")
    if L is None:
        raise ValueError("L is required for infinite-capacity solves")
    if params.capacity is None and L < 2:
        raise ValueError("need L >= 2 for a truncated infinite-capacity solve")
    if _envelopes is not None:
        env_raw, env = _envelopes
    else:
        env_raw = lower_envelope(actions)
        env = prune(env_raw, params)
    policy = Policy.constant(L, env.point(0))
    shift = params.r if params.payment == Payment.COMPLETION else 0.0
    max_iter = max_iter if max_iter is not None else max(10 * L, 20)
    trace: list[tuple[float, int]] = []
    ev: Evaluation | None = None
    for _ in range(max_iter):
        ev = evaluate_policy(policy, params, L)
        betas = ev.delta - shift
        new_mu, new_f, changed = _improve(env, betas, policy.mu, policy.f, tie_eps)
        trace.append((ev.objective, changed))
        if changed == 0:
            break
        policy = Policy(mu=new_mu, f=new_f)
    else:
        raise SolverError(
            f"policy iteration did not converge within {max_iter} iterations", trace
        )
    diagnostics = diagnose(params, actions, policy, ev, L, zone_frac)
    meta = {
        "breakpoints_raw": len(env_raw),
        "breakpoints_pruned": len(env),
        "grid_resolution": actions.grid_resolution(),
    }
    return SolveReport(
        params=params,
        actions=actions,
        envelope=env,
        policy=policy,
        evaluation=ev,
        iterations=len(trace),
        trace=trace,
        L=L,
        mu_inf=tail_limit(env_raw, params),
        diagnostics=diagnostics,
        envelope_meta=meta,
    )


def solve_finite(params: ModelParams, actions: ActionSet, **kwargs) -> SolveReport:
    """Policy iteration on states 0..N with blocked arrivals at N."""
    if params.capacity is None:
        raise ValueError("solve_finite needs a finite capacity")
    return policy_iteration(params, actions, params.capacity, **kwargs)


def solve_infinite(
    params: ModelParams,
    actions: ActionSet,
    eps: float | None = None,
    *,
    L0: int = 128,
    ceiling: int = DEFAULT_CEILING,
    tie_eps: float = 1e-12,
    zone_frac: float = 0.05,
) -> SolveReport:
    """Pick the truncation level for an infinite-buffer solve.

    Doubles L until (a) every state in the top decile of the trusted zone
    chooses a rate within eps of the tail limit, and (b) the policy on
    states below half the previous truncation is unchanged between
    consecutive levels. eps defaults to two envelope grid steps. The top
    boundary state itself always dips below the tail limit (reflecting
    boundary), which is why (a) is read on the trusted zone.
    """
    if params.capacity is not None:
        raise ValueError("solve_infinite applies to infinite-capacity models")
    report = validate(params, actions)
    if report.errors:
        raise ValueError("; ".join(report.errors))
    env_raw = lower_envelope(actions)
    env = prune(env_raw, params)
    mu_inf = tail_limit(env_raw, params)
    if eps is None:
        gaps = np.diff(env.mu)
        eps = 2.0 * float(gaps.min()) if len(gaps) else math.inf
    L = L0
    prev: SolveReport | None = None
    while L <= ceiling:
        rep = policy_iteration(
            params,
            actions,
            L,
            tie_eps=tie_eps,
            zone_frac=zone_frac,
            _envelopes=(env_raw, env),
        )
        top = trusted_upto(L, None, zone_frac)
        window = rep.policy.mu[math.ceil(0.9 * top) - 1 : top]
        tail_margin = float(np.abs(window - mu_inf).max()) if len(window) else math.inf
        low_changed = None
        if prev is not None:
            half = prev.L // 2
            low_changed = int(
                np.count_nonzero(
                    (rep.policy.mu[:half] != prev.policy.mu[:half])
                    | (rep.policy.f[:half] != prev.policy.f[:half])
                )
            )
        if tail_margin <= eps and low_changed == 0:
            return SolveReport(
                params=rep.params,
                actions=rep.actions,
                envelope=rep.envelope,
                policy=rep.policy,
                evaluation=rep.evaluation,
                iterations=rep.iterations,
                trace=rep.trace,
                L=rep.L,
                mu_inf=rep.mu_inf,
                diagnostics=rep.diagnostics,
                envelope_meta=rep.envelope_meta,
                stabilization={
                    "L": rep.L,
                    "eps": eps,
                    "tail_margin": tail_margin,
                    "low_states_changed": low_changed,
                },
            )
        prev = rep
        L *= 2
    raise SolverError(
        f"truncation exceeded {ceiling} states before stabilizing; review parameters"
    )


@dataclass(frozen=True)
class OracleResult:
    objective: float | np.ndarray
    policy: Policy
    iterations: int


def value_iteration_oracle(
    params: ModelParams,
    actions: ActionSet,
    L: int,
    tol: float = 1e-8,
    max_iter: int = 500_000,
) -> OracleResult:
    """Uniformized (relative) value iteration over the full raw grid.

    Cross-check that deliberately skips the envelope reduction: the
    truncated chain is uniformizable even though the infinite one is not.
    For the average criterion the gain is bracketed by the span of the
    one-step improvement and iteration stops once the bracket is tighter
    than tol; for the discounted criterion the usual contraction bound
    drives the stop.
    """
    report = validate(params, actions)
    if report.errors:
        raise ValueError("; ".join(report.errors))
    if params.capacity is not None and params.capacity != L:
        raise ValueError("L must equal the finite capacity N")
    mu, f = actions.mu, actions.f
    i = np.arange(1, L + 1, dtype=float)[:, None]
    down = mu[None, :] + (i - 1.0) * params.theta
    if params.payment == Payment.ARRIVAL:
        R = params.lam * params.r - params.h * i - params.c * (i - 1.0) * params.theta - f[None, :]
        if params.capacity is not None:
            R[-1, :] -= params.lam * params.r
        R0 = params.lam * params.r
    else:
        R = mu[None, :] * params.r - params.h * i - params.c * (i - 1.0) * params.theta - f[None, :]
        R0 = 0.0
    Lambda = params.lam + float(down.max())
    up = np.full(L + 1, params.lam)
    up[L] = 0.0
    up_col = up[1:, None]

    def sweep(w):
        # one-step lookahead; the top state's phantom w[L+1] never enters
        # because its up-rate is zero
        succ_up = np.concatenate([w[2:], [0.0]])[:, None]
        q = R + up_col * succ_up + down * w[:-1][:, None] + (Lambda - up_col - down) * w[1:][:, None]
        t0 = R0 + up[0] * w[1] + (Lambda - up[0]) * w[0]
        return np.concatenate([[t0], q.max(axis=1)]), q

    if params.criterion == Criterion.AVERAGE:
        w = np.zeros(L + 1)
        for it in range(1, max_iter + 1):
            tw, q = sweep(w)
            diff = tw / Lambda - w
            span = float(diff.max() - diff.min())
            g_mid = float(0.5 * (diff.max() + diff.min()) * Lambda)
            w = tw / Lambda - tw[0] / Lambda
            if span * Lambda < tol:
                greedy = np.argmax(q, axis=1)
                return OracleResult(g_mid, Policy(mu[greedy], f[greedy]), it)
        raise SolverError("value iteration budget exhausted (average)")
    alpha = params.alpha
    if alpha is None or alpha <= 0:
        raise ValueError("alpha must be > 0")
    gamma = Lambda / (alpha + Lambda)
    v = np.zeros(L + 1)
    for it in range(1, max_iter + 1):
        tv, q = sweep(v)
        vn = tv / (alpha + Lambda)
        step = float(np.abs(vn - v).max())
        v = vn
        if step * gamma / (1.0 - gamma) < tol:
            greedy = np.argmax(q, axis=1)
            return OracleResult(v, Policy(mu[greedy], f[greedy]), it)
    raise SolverError("value iteration budget exhausted (discounted)")
