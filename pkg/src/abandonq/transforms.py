"""Model equivalences between payment conventions and abandonment variants.

One solver core serves every variant through these maps, and each map
doubles as a regression oracle: solving a model directly and solving its
image must agree.
"""

from __future__ import annotations

import numpy as np

from .model import ActionSet, Criterion, ModelParams, Payment

__all__ = [
    "completion_to_arrival",
    "completion_to_arrival_average",
    "in_service_shift",
]


def completion_to_arrival(
    params: ModelParams, actions: ActionSet
) -> tuple[ModelParams, ActionSet]:
    """Rewrite payment-at-completion as payment-at-arrival with r = 0.

    Crediting r per departure at rate mu is the same flow as lowering the
    service cost: every point maps (mu, f) -> (mu, f - mu*r), the idle
    point like any other (its cost becomes c*theta - theta*r). Works for
    both criteria and either capacity regime.
    """
    if params.payment != Payment.COMPLETION:
        raise ValueError("transform applies to payment-at-completion models")
    new_params = params.replace(payment=Payment.ARRIVAL, r=0.0)
    new_actions = ActionSet(
        mu=actions.mu.copy(),
        f=actions.f - actions.mu * params.r,
        includes_idle=False,
    )
    return new_params, new_actions


def completion_to_arrival_average(params: ModelParams) -> ModelParams:
    """Average-reward equivalence: charge abandonments c' = c + r instead.

    Every abandonment is an arrival that never completes, so under the
    stationary flow balance crediting r at arrivals while surcharging r
    per abandonment equals crediting r at completions. The action set is
    unchanged. Average criterion only.
    """
    if params.payment != Payment.COMPLETION:
        raise ValueError("transform applies to payment-at-completion models")
    if params.criterion != Criterion.AVERAGE:
        raise ValueError("the c' = c + r equivalence holds for the average criterion only")
    return params.replace(payment=Payment.ARRIVAL, c=params.c + params.r)


def in_service_shift(actions: ActionSet, theta_s: float, c_s: float) -> ActionSet:
    """Add in-service abandonment at rate theta_s with cost c_s.

    A served customer leaving at rate theta_s (cost c_s each) just shifts
    every action point by (theta_s, c_s * theta_s): a Minkowski translation
    of the cloud, which commutes with taking the lower envelope.
    """
    if theta_s < 0 or c_s < 0:
        raise ValueError("theta_s and c_s must be >= 0")
    return ActionSet(
        mu=actions.mu + theta_s,
        f=actions.f + c_s * theta_s,
        includes_idle=False if theta_s > 0 else actions.includes_idle,
    )
