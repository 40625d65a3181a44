"""Exact policy evaluation on the controlled birth-death chain.

All evaluation happens on a finite chain over states 0..L. For infinite
buffer problems L is a numerical truncation: the top state simply has no
up-transition (reflecting boundary, rewards untouched). When the model's
capacity is genuinely finite and equal to L, blocked arrivals additionally
forfeit the arrival reward (the -lam*r adjustment at state N).

The average-reward Poisson equation g = R + Q u is solved by differencing
consecutive state equations, which yields a tridiagonal system in the bias
increments du(i) = u(i+1) - u(i); the discounted system (alpha*I - Q)v = R
is tridiagonal as is. Both go through a pivoted banded solver and the
defect of every original equation is reported as the residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import logsumexp

from .model import Criterion, ModelParams, Payment, Policy

__all__ = [
    "Evaluation",
    "chain_data",
    "difference_views",
    "evaluate_average",
    "evaluate_discounted",
    "evaluate_policy",
    "stationary_distribution",
]


@dataclass(frozen=True)
class Evaluation:
    """Solved value data for one policy on states 0..L.

    values holds the bias u (average, normalized so sum(u * P) = 0) or the
    discounted value v. delta holds the first differences value(i+1) -
    value(i), taken straight from the linear solve where possible. For the
    average criterion gain and the stationary distribution are filled.
    residual is the max absolute defect of the evaluated equations.
    """

    criterion: Criterion
    values: np.ndarray
    delta: np.ndarray
    residual: float
    gain: float | None = None
    distribution: np.ndarray | None = None

    @property
    def L(self) -> int:
        return len(self.values) - 1

    @property
    def objective(self) -> float:
        """Scalar objective: the gain, or v(0) for the discounted case."""
        if self.criterion == Criterion.AVERAGE:
            return float(self.gain)
        return float(self.values[0])


def chain_data(policy: Policy, params: ModelParams, L: int):
    """Per-state (up, down, reward) arrays for states 0..L under the policy.

    Vectorized mirror of model.reward_rate / model.transition_rates; the
    agreement is pinned by tests.
    """
    if len(policy) != L:
        raise ValueError("policy must cover states 1..L")
    if params.capacity is not None and params.capacity != L:
        raise ValueError("finite capacity N must equal the chain length L")
    i = np.arange(1, L + 1, dtype=float)
    up = np.full(L + 1, params.lam)
    up[L] = 0.0
    down = np.zeros(L + 1)
    down[1:] = policy.mu + (i - 1.0) * params.theta
    R = np.zeros(L + 1)
    if params.payment == Payment.ARRIVAL:
        R[0] = params.lam * params.r
        R[1:] = (
            params.lam * params.r
            - params.h * i
            - params.c * (i - 1.0) * params.theta
            - policy.f
        )
        if params.capacity is not None:
            R[L] -= params.lam * params.r
    else:
        R[0] = 0.0
        R[1:] = (
            policy.mu * params.r
            - params.h * i
            - params.c * (i - 1.0) * params.theta
            - policy.f
        )
    return up, down, R


def stationary_distribution(policy: Policy, params: ModelParams, L: int) -> np.ndarray:
    """Stationary law of the birth-death chain truncated at L.

    Detailed balance gives the product form P(i+1) = P(i) * lam / down(i+1);
    accumulated in log space so long chains neither overflow nor underflow
    before normalization.
    """
    if L == 0:
        return np.ones(1)
    _, down, _ = chain_data(policy, params, L)
    if np.any(down[1:] <= 0):
        raise ArithmeticError("down-rate vanished at a positive state")
    logw = np.zeros(L + 1)
    logw[1:] = np.cumsum(np.log(params.lam) - np.log(down[1:]))
    return np.exp(logw - logsumexp(logw))


def _tridiag_solve(lower, diag, upper, rhs):
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


def _poisson_residual(g, delta, up, down, R):
    L = len(R) - 1
    res = g - R
    if L > 0:
        res[:-1] -= up[:-1] * delta
        res[1:] += down[1:] * delta
    return float(np.abs(res).max())


def evaluate_average(policy: Policy, params: ModelParams, L: int) -> Evaluation:
    """Gain, bias and stationary law from the Poisson equation.

    Consecutive equations g = R(i) + up(i) du(i) - down(i) du(i-1) are
    subtracted to eliminate g, leaving a tridiagonal system in du; the gain
    then follows from the equation at the top state, and the bias from a
    cumulative sum pinned by the normalization sum(u * P) = 0.
    """
    up, down, R = chain_data(policy, params, L)
    if L == 0:
        return Evaluation(
            criterion=Criterion.AVERAGE,
            values=np.zeros(1),
            delta=np.empty(0),
            residual=0.0,
            gain=float(R[0]),
            distribution=np.ones(1),
        )
    rows = np.arange(L)
    lower = np.where(rows >= 1, down[rows], 0.0)
    diag = -(down[rows + 1] + up[rows])
    upper = np.where(rows + 1 < L, up[rows + 1], 0.0)
    rhs = R[rows] - R[rows + 1]
    delta = _tridiag_solve(lower, diag, upper, rhs)
    g = float(R[L] - down[L] * delta[L - 1])
    u = np.concatenate([[0.0], np.cumsum(delta)])
    P = stationary_distribution(policy, params, L)
    u = u - float(P @ u)
    residual = _poisson_residual(g, delta, up, down, R)
    return Evaluation(
        criterion=Criterion.AVERAGE,
        values=u,
        delta=delta,
        residual=residual,
        gain=g,
        distribution=P,
    )


def evaluate_discounted(
    policy: Policy, params: ModelParams, alpha: float | None = None, L: int | None = None
) -> Evaluation:
    """Discounted values from the tridiagonal system (alpha*I - Q) v = R."""
    if alpha is None:
        alpha = params.alpha
    if alpha is None or alpha <= 0:
        raise ValueError("alpha must be > 0")
    if L is None:
        L = len(policy)
    up, down, R = chain_data(policy, params, L)
    diag = alpha + up + down
    v = _tridiag_solve(-down, diag, -up, R)
    res = alpha * v - R
    res[:-1] -= up[:-1] * (v[1:] - v[:-1])
    res[1:] += down[1:] * (v[1:] - v[:-1])
    residual = float(np.abs(res).max())
    return Evaluation(
        criterion=Criterion.DISCOUNTED,
        values=v,
        delta=np.diff(v),
        residual=residual,
    )


def evaluate_policy(policy: Policy, params: ModelParams, L: int) -> Evaluation:
    """Dispatch on the model's criterion."""
    if params.criterion == Criterion.AVERAGE:
        return evaluate_average(policy, params, L)
    return evaluate_discounted(policy, params, params.alpha, L)


def difference_views(evaluation) -> tuple[np.ndarray, np.ndarray]:
    """First and second forward differences of the value/bias vector."""
    if isinstance(evaluation, Evaluation):
        delta = evaluation.delta
        n = len(evaluation.values)
    else:
        values = np.asarray(evaluation, dtype=float)
        delta = np.diff(values)
        n = len(values)
    if n < 3:
        raise ValueError("need at least 3 values for difference views")
    return delta, np.diff(delta)
