"""Executable structural checks: monotonicity, unimodality, concavity, bounds.

These are the solved-policy signatures the theory guarantees. On truncated
infinite-buffer chains the reflecting boundary perturbs the top states, so
every check is asserted on a trusted zone that excludes the top slice
(default 5%); genuinely finite-capacity solves are checked in full.

All checks are pure predicates over report data; none mutates its input.
Strict paper inequalities are tested as <= with a small slack, since
certifying strictness numerically is not meaningful at float scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evaluate import Evaluation
from .model import ActionSet, Criterion, ModelParams, Payment

__all__ = [
    "BoundCheck",
    "ConcavityCheck",
    "MonotoneCheck",
    "UnimodalCheck",
    "VersionOrdering",
    "check_bounds",
    "check_concavity",
    "check_monotone",
    "check_unimodal",
    "compare_versions",
    "trusted_upto",
]

_TOL = 1e-12
_SLACK = 1e-8


def trusted_upto(L: int, capacity: int | None, zone_frac: float = 0.05) -> int:
    """Largest trusted state index: L for finite capacity, else L minus the
    top zone_frac slice of the truncation."""
    if capacity is not None:
        return L
    return max(1, L - math.ceil(zone_frac * (L + 1)))


@dataclass(frozen=True)
class MonotoneCheck:
    ok: bool
    first_violation: int | None = None


def check_monotone(mu_seq) -> MonotoneCheck:
    """Service rate nondecreasing over states 1..top of the given slice."""
    mu = np.asarray(mu_seq, dtype=float)
    if len(mu) < 2:
        return MonotoneCheck(ok=True)
    drops = np.flatnonzero(np.diff(mu) < -_TOL)
    if len(drops) == 0:
        return MonotoneCheck(ok=True)
    return MonotoneCheck(ok=False, first_violation=int(drops[0]) + 1)


@dataclass(frozen=True)
class UnimodalCheck:
    ok: bool
    peak: int | None = None


def check_unimodal(mu_seq) -> UnimodalCheck:
    """Increase-then-decrease shape; returns the smallest valid peak state.

    The smallest valid peak is the first state attaining the maximum rate:
    any earlier peak would have to dominate a later, larger value.
    """
    mu = np.asarray(mu_seq, dtype=float)
    if len(mu) == 0:
        return UnimodalCheck(ok=True, peak=None)
    k = int(np.argmax(mu))
    ok = bool(
        np.all(np.diff(mu[: k + 1]) >= -_TOL) and np.all(np.diff(mu[k:]) <= _TOL)
    )
    return UnimodalCheck(ok=ok, peak=k + 1 if ok else None)


@dataclass(frozen=True)
class ConcavityCheck:
    ok: bool
    worst: float
    state: int | None = None


def check_concavity(values, tol: float = 1e-10) -> ConcavityCheck:
    """Second differences of the value/bias vector must stay below tol."""
    values = np.asarray(values, dtype=float)
    if len(values) < 3:
        raise ValueError("need at least 3 values to check concavity")
    d2 = np.diff(values, n=2)
    worst = int(np.argmax(d2))
    return ConcavityCheck(ok=bool(d2[worst] <= tol), worst=float(d2[worst]), state=worst)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    satisfied: bool
    margin: float | None
    skipped: bool = False

    @property
    def ok(self) -> bool:
        return self.skipped or self.satisfied


def _bound(name, value, kind, limit, slack=_SLACK):
    # kind "ge": value >= limit; kind "le": value <= limit
    margin = value - limit if kind == "ge" else limit - value
    return BoundCheck(name=name, satisfied=bool(margin >= -slack), margin=float(margin))


def _skipped(name):
    return BoundCheck(name=name, satisfied=True, margin=None, skipped=True)


def check_bounds(
    evaluation: Evaluation,
    params: ModelParams,
    actions: ActionSet,
    trusted: int | None = None,
) -> list[BoundCheck]:
    """Evaluate the applicable objective and increment bounds with slack.

    Bounds conditional on a nonnegative cost function are skipped (and
    marked skipped) when the raw action set has min f < 0. Vector bounds
    are taken over the trusted zone only.
    """
    lam, r, h, c, th = params.lam, params.r, params.h, params.c, params.theta
    L = evaluation.L
    if trusted is None:
        trusted = trusted_upto(L, params.capacity)
    delta = evaluation.delta[: max(trusted, 1)]
    values = evaluation.values[: trusted + 1]
    f_nonneg = actions.min_f() >= 0.0
    checks: list[BoundCheck] = []
    if params.criterion == Criterion.AVERAGE:
        cap = (h + c * th) / th
        checks.append(_bound("delta_lower", float(delta.min()), "ge", -cap))
        if params.payment == Payment.ARRIVAL:
            checks.append(_bound("gain_lower", evaluation.gain, "ge", lam * (r - cap)))
            if f_nonneg:
                checks.append(_bound("gain_upper", evaluation.gain, "le", lam * r))
                checks.append(_bound("delta_upper", float(delta.max()), "le", 0.0))
            else:
                checks.append(_skipped("gain_upper"))
                checks.append(_skipped("delta_upper"))
        else:
            if f_nonneg:
                checks.append(_bound("gain_upper", evaluation.gain, "le", lam * r))
                checks.append(_bound("delta_upper", float(delta.max()), "le", r))
            else:
                checks.append(_skipped("gain_upper"))
                checks.append(_skipped("delta_upper"))
    else:
        alpha = params.alpha
        cap = (h + c * th) / (alpha + th)
        checks.append(_bound("delta_lower", float(delta.min()), "ge", -cap))
        if params.payment == Payment.ARRIVAL:
            idle_line = (lam / alpha) * (r - cap) - cap * np.arange(len(values))
            checks.append(
                _bound("value_lower", float((values - idle_line).min()), "ge", 0.0)
            )
            if f_nonneg:
                checks.append(
                    _bound("value_upper", float(values.max()), "le", lam * r / alpha)
                )
                checks.append(_bound("delta_upper", float(delta.max()), "le", 0.0))
            else:
                checks.append(_skipped("value_upper"))
                checks.append(_skipped("delta_upper"))
        else:
            if f_nonneg:
                checks.append(
                    _bound("value_upper", float(values[0]), "le", lam * r / alpha)
                )
                checks.append(_bound("delta_upper", float(delta.max()), "le", r))
            else:
                checks.append(_skipped("value_upper"))
                checks.append(_skipped("delta_upper"))
    return checks


@dataclass(frozen=True)
class VersionOrdering:
    """Statewise and objective ordering between payment conventions."""

    mu_ordered: bool
    mu_margin: float
    objective_ordered: bool
    objective_margin: float

    @property
    def ok(self) -> bool:
        return self.mu_ordered and self.objective_ordered


def compare_versions(report_arrival, report_completion) -> VersionOrdering:
    """Arrival-payment rates never exceed completion-payment rates, and the
    completion objective never exceeds the arrival objective.

    Both reports must come from the same parameters (payment aside), the
    same action grid and the same truncation. Comparison is over the
    common trusted zone.
    """
    ra, rc = report_arrival, report_completion
    if ra.params.payment != Payment.ARRIVAL or rc.params.payment != Payment.COMPLETION:
        raise ValueError("expected one arrival-payment and one completion-payment report")
    if ra.L != rc.L:
        raise ValueError("reports solved at different truncation levels")
    if not np.array_equal(ra.actions.mu, rc.actions.mu) or not np.array_equal(
        ra.actions.f, rc.actions.f
    ):
        raise ValueError("reports solved against different action grids")
    top = min(
        trusted_upto(ra.L, ra.params.capacity), trusted_upto(rc.L, rc.params.capacity)
    )
    gap = rc.policy.mu[:top] - ra.policy.mu[:top]
    mu_margin = float(gap.min())
    if ra.params.criterion == Criterion.AVERAGE:
        obj_margin = float(ra.evaluation.gain - rc.evaluation.gain)
    else:
        obj_margin = float(ra.evaluation.values[0] - rc.evaluation.values[0])
    return VersionOrdering(
        mu_ordered=bool(mu_margin >= -_TOL),
        mu_margin=mu_margin,
        objective_ordered=bool(obj_margin >= -_SLACK),
        objective_margin=obj_margin,
    )
