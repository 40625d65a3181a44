"""Shared fixtures: the benchmark instance and random-instance helpers."""

from __future__ import annotations

import numpy as np
import pytest

from abandonq import ActionSet, Criterion, ModelParams, Payment, validate

# benchmark instance: lambda=0.5, r=2, h=1, c=3, theta=0.5,
# rates on [0.5, 30], cost 0.25*mu^2
SEC6 = dict(lam=0.5, r=2.0, h=1.0, c=3.0, theta=0.5)


def sec6_params(**overrides) -> ModelParams:
    kw = dict(SEC6)
    kw.update(overrides)
    return ModelParams(**kw)


def sec6_actions(step: float = 0.01) -> ActionSet:
    return ActionSet.grid(0.5, 30.0, step, lambda m: 0.25 * m**2)


def prepared(params: ModelParams, actions: ActionSet) -> ActionSet:
    """Validated action set with the idle point present."""
    vr = validate(params, actions)
    assert vr.ok, vr.errors
    return vr.actions


@pytest.fixture(scope="session")
def bench_params() -> ModelParams:
    return sec6_params()


@pytest.fixture(scope="session")
def bench_actions_coarse() -> ActionSet:
    return sec6_actions(step=0.1)


def random_instance(rng: np.random.Generator, *, capacity=None, criterion=None,
                    payment=None, max_actions=120):
    """A random, well-posed problem instance for property sweeps."""
    if criterion is None:
        criterion = Criterion.AVERAGE if rng.random() < 0.5 else Criterion.DISCOUNTED
    if payment is None:
        payment = Payment.ARRIVAL if rng.random() < 0.6 else Payment.COMPLETION
    params = ModelParams(
        lam=rng.uniform(0.3, 2.5),
        r=rng.uniform(0.0, 4.0),
        h=rng.uniform(0.05, 2.5),
        c=rng.uniform(0.0, 4.0),
        theta=rng.uniform(0.25, 2.0),
        payment=payment,
        criterion=criterion,
        alpha=float(rng.uniform(0.1, 2.0)) if criterion == Criterion.DISCOUNTED else None,
        capacity=capacity,
    )
    n = int(rng.integers(15, max_actions))
    mu = np.sort(rng.uniform(0.1, rng.uniform(3.0, 18.0), n))
    mu = np.unique(mu)
    kind = rng.random()
    if kind < 0.4:
        f = rng.uniform(0.05, 0.8) * mu**2
    elif kind < 0.7:
        f = rng.uniform(0.1, 3.0) * mu
    else:
        f = rng.uniform(0.05, 0.5) * mu**2 + rng.normal(0.0, 0.4, len(mu))
    return params, ActionSet(mu=mu, f=np.asarray(f))
