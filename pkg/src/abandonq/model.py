"""Problem data for the controlled M/M/1+M queue.

State i counts customers in the system. A single server picks a service
point (mu, f): serve at rate mu while paying cost f per unit time. Waiting
customers abandon at rate theta each (cost c per abandonment); when the
server idles, every customer in the system is subject to abandonment. The
idle option is represented by the action point (theta, c*theta), which
reproduces the idle transition rates and (under payment at arrival) the
idle reward flow exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

__all__ = [
    "IDLE",
    "ActionSet",
    "Criterion",
    "ModelParams",
    "Payment",
    "Policy",
    "ValidationReport",
    "idle_point",
    "reward_rate",
    "transition_rates",
    "validate",
    "with_idle",
]


class Payment(str, Enum):
    """When the per-customer reward r is credited."""

    ARRIVAL = "arrival"
    COMPLETION = "completion"


class Criterion(str, Enum):
    AVERAGE = "average"
    DISCOUNTED = "discounted"


class _IdleAction:
    """Sentinel for the distinguished idle action (serve no one)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "IDLE"


IDLE = _IdleAction()


@dataclass(frozen=True)
class ModelParams:
    """Scalar problem data.

    lam: Poisson arrival rate (> 0).
    r: reward per customer (>= 0), credited per `payment`.
    h: holding cost rate per customer per unit time (>= 0).
    c: cost per abandonment (>= 0).
    theta: abandonment rate per exposed customer (> 0).
    payment: arrival or completion crediting.
    criterion: average or discounted objective.
    alpha: discount rate (> 0), required when criterion is discounted.
    capacity: buffer size N (>= 1) for finite systems, None for infinite.
    """

    lam: float
    r: float
    h: float
    c: float
    theta: float
    payment: Payment = Payment.ARRIVAL
    criterion: Criterion = Criterion.AVERAGE
    alpha: float | None = None
    capacity: int | None = None

    def idle_point(self) -> tuple[float, float]:
        return (self.theta, self.c * self.theta)

    def replace(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)


def idle_point(params: ModelParams) -> tuple[float, float]:
    """The (mu, f) point that stands in for idling: (theta, c*theta)."""
    return params.idle_point()


@dataclass(frozen=True)
class ActionSet:
    """A finite cloud of (mu, f) action points.

    Continuous action sets are represented by a user-supplied sample grid;
    optimal policies only ever use breakpoints of the cloud's lower convex
    boundary, so grid resolution controls the discretization error.
    """

    mu: np.ndarray
    f: np.ndarray
    includes_idle: bool = False

    @classmethod
    def from_points(cls, points, includes_idle: bool = False) -> "ActionSet":
        pts = list(points)
        mu = np.asarray([p[0] for p in pts], dtype=float)
        f = np.asarray([p[1] for p in pts], dtype=float)
        return cls(mu=mu, f=f, includes_idle=includes_idle)

    @classmethod
    def grid(cls, mu_min: float, mu_max: float, step: float, cost) -> "ActionSet":
        """Uniform rate grid with f = cost(mu). `cost` is a callable."""
        n = int(math.floor((mu_max - mu_min) / step + 1e-9)) + 1
        mu = mu_min + step * np.arange(n)
        return cls(mu=mu, f=np.asarray(cost(mu), dtype=float))

    def __len__(self) -> int:
        return len(self.mu)

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.mu.tolist(), self.f.tolist()))

    def min_f(self) -> float:
        return float(self.f.min())

    def grid_resolution(self) -> float:
        """Smallest positive gap between distinct rates (0.0 if singleton)."""
        mu = np.unique(self.mu)
        if len(mu) < 2:
            return 0.0
        return float(np.diff(mu).min())

    def contains_point(self, point: tuple[float, float]) -> bool:
        return bool(np.any((self.mu == point[0]) & (self.f == point[1])))


@dataclass(frozen=True)
class Policy:
    """Chosen (mu, f) per state 1..L; state 0 always idles.

    Entries produced by the solver are breakpoints of the envelope the
    policy was solved against; hand-built policies may hold any pairs.
    """

    mu: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "f", np.asarray(self.f, dtype=float))
        if self.mu.shape != self.f.shape:
            raise ValueError("policy mu and f must have equal length")

    @classmethod
    def constant(cls, L: int, point: tuple[float, float]) -> "Policy":
        return cls(mu=np.full(L, point[0]), f=np.full(L, point[1]))

    @classmethod
    def idle(cls, L: int, params: ModelParams) -> "Policy":
        return cls.constant(L, params.idle_point())

    def __len__(self) -> int:
        return len(self.mu)

    def action(self, i: int) -> tuple[float, float]:
        """Action at state i (1-based)."""
        return (float(self.mu[i - 1]), float(self.f[i - 1]))


def reward_rate(params: ModelParams, i: int, action) -> float:
    """Reward flow r(i, a) in money per unit time.

    Arrival payment credits lam*r continuously in expectation; completion
    payment credits mu*r. Holding h*i and abandonment c*(exposed)*theta
    are charged as flows; the chosen action's f is charged while serving.
    At a genuinely finite capacity N, arrival payment forfeits lam*r in
    state N (arrivals are blocked and earn nothing).
    """
    if i < 0:
        raise ValueError("state index must be >= 0")
    if params.capacity is not None and i > params.capacity:
        raise ValueError("state above finite capacity")
    at_arrival = params.payment == Payment.ARRIVAL
    if action is IDLE:
        base = -params.h * i - params.c * params.theta * i
        if at_arrival:
            base += params.lam * params.r
    else:
        if i == 0:
            raise ValueError("active action is not available in state 0")
        mu, f = action
        base = -params.h * i - params.c * (i - 1) * params.theta - f
        base += params.lam * params.r if at_arrival else mu * params.r
    if at_arrival and params.capacity is not None and i == params.capacity:
        base -= params.lam * params.r
    return base


def transition_rates(params: ModelParams, i: int, action) -> dict[str, float]:
    """Birth-death rates {up, down} from state i under the action."""
    if i < 0:
        raise ValueError("state index must be >= 0")
    blocked = params.capacity is not None and i >= params.capacity
    up = 0.0 if blocked else params.lam
    if i == 0:
        down = 0.0
    elif action is IDLE:
        down = i * params.theta
    else:
        mu, _ = action
        down = mu + (i - 1) * params.theta
    return {"up": up, "down": down}


@dataclass(frozen=True)
class ValidationReport:
    errors: list[str]
    actions: ActionSet
    idle_appended: bool

    @property
    def ok(self) -> bool:
        return not self.errors


def with_idle(params: ModelParams, actions: ActionSet) -> tuple[ActionSet, bool]:
    """Return the action set with the idle point (theta, c*theta) present."""
    pt = params.idle_point()
    if actions.contains_point(pt):
        if actions.includes_idle:
            return actions, False
        return ActionSet(actions.mu, actions.f, includes_idle=True), False
    mu = np.concatenate([actions.mu, [pt[0]]])
    f = np.concatenate([actions.f, [pt[1]]])
    return ActionSet(mu, f, includes_idle=True), True


def validate(params: ModelParams, actions: ActionSet) -> ValidationReport:
    """Check every type invariant; append the idle point when absent.

    Each violated invariant is reported with the offending field's name.
    """
    errors: list[str] = []
    if not params.lam > 0:
        errors.append("lambda must be > 0")
    if not params.theta > 0:
        errors.append("theta must be > 0")
    if params.h < 0:
        errors.append("h must be >= 0")
    if params.c < 0:
        errors.append("c must be >= 0")
    if params.r < 0:
        errors.append("r must be >= 0")
    if params.criterion == Criterion.DISCOUNTED:
        if params.alpha is None or not params.alpha > 0:
            errors.append("alpha must be > 0 under the discounted criterion")
    if params.capacity is not None and params.capacity < 1:
        errors.append("capacity N must be >= 1")
    if len(actions) == 0:
        errors.append("action set empty")
        return ValidationReport(errors, actions, False)
    if not np.all(np.isfinite(actions.mu)) or not np.all(np.isfinite(actions.f)):
        errors.append("action points must be finite")
    if np.any(actions.mu <= 0):
        errors.append("service rates mu must be > 0")
    if actions.includes_idle and not actions.contains_point(params.idle_point()):
        errors.append("includes_idle set but idle point (theta, c*theta) missing")
    if errors:
        return ValidationReport(errors, actions, False)
    normalized, appended = with_idle(params, actions)
    return ValidationReport(errors, normalized, appended)
