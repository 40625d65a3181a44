"""Lower convex boundary of the action cloud and breakpoint argmax queries.

Every optimal action lies on the lower boundary f* of the convex hull of
H = {(mu, f)}, and some optimal policy uses only its extreme points, so
the improvement step reduces to maximizing the linear score -f - mu*beta
over the envelope's breakpoints. Slope bounds on f* shrink the candidate
set further: breakpoints whose left slope exceeds the criterion's cap, or
(when all costs are nonnegative) whose right slope is nonpositive, can
never be chosen by an optimal policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ActionSet, Criterion, ModelParams, Payment

__all__ = [
    "LowerEnvelope",
    "best_action",
    "best_action_indices",
    "lower_envelope",
    "prune",
    "slope_cap",
]


@dataclass(frozen=True)
class LowerEnvelope:
    """Breakpoints of the lower convex boundary, strictly increasing in mu.

    Interior chord slopes are nondecreasing. By convention the leftmost
    breakpoint's left slope is -inf and the rightmost's right slope +inf.
    """

    mu: np.ndarray
    f: np.ndarray
    _slopes: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        f = np.asarray(self.f, dtype=float)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "f", f)
        with np.errstate(divide="ignore"):
            s = np.diff(f) / np.diff(mu) if len(mu) > 1 else np.empty(0)
        object.__setattr__(self, "_slopes", s)

    def __len__(self) -> int:
        return len(self.mu)

    @property
    def slopes(self) -> np.ndarray:
        """Chord slopes between consecutive breakpoints (len - 1 values)."""
        return self._slopes

    @property
    def left_slopes(self) -> np.ndarray:
        return np.concatenate([[-np.inf], self._slopes])

    @property
    def right_slopes(self) -> np.ndarray:
        return np.concatenate([self._slopes, [np.inf]])

    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self.mu.tolist(), self.f.tolist()))

    def point(self, k: int) -> tuple[float, float]:
        return (float(self.mu[k]), float(self.f[k]))

    def value(self, mu) -> np.ndarray:
        """f*(mu) by linear interpolation inside [mu_-, mu_+]."""
        return np.interp(mu, self.mu, self.f)


def lower_envelope(points) -> LowerEnvelope:
    """Lower convex hull of a point cloud (Andrew's monotone chain).

    Points sharing a rate keep only the cheapest cost. Collinear interior
    points are dropped; they are never uniquely optimal.
    """
    if isinstance(points, ActionSet):
        mu, f = points.mu, points.f
    else:
        pts = list(points)
        if not pts:
            raise ValueError("empty point cloud")
        mu = np.asarray([p[0] for p in pts], dtype=float)
        f = np.asarray([p[1] for p in pts], dtype=float)
    if len(mu) == 0:
        raise ValueError("empty point cloud")
    order = np.lexsort((f, mu))
    mu, f = mu[order], f[order]
    keep = np.ones(len(mu), dtype=bool)
    keep[1:] = mu[1:] != mu[:-1]
    mu, f = mu[keep], f[keep]
    hx: list[float] = []
    hy: list[float] = []
    for x, y in zip(mu, f):
        # pop while the turn through the last two kept points is not
        # strictly convex (cross <= 0 also drops collinear interiors)
        while len(hx) > 1:
            cross = (hx[-1] - hx[-2]) * (y - hy[-2]) - (x - hx[-2]) * (hy[-1] - hy[-2])
            if cross <= 0.0:
                hx.pop()
                hy.pop()
            else:
                break
        hx.append(x)
        hy.append(y)
    return LowerEnvelope(np.asarray(hx), np.asarray(hy))


def slope_cap(params: ModelParams) -> float:
    """Criterion's upper bound on the left slope of optimal breakpoints.

    (h + c*theta)/(alpha + theta) discounted, (h + c*theta)/theta average;
    payment at completion relaxes the cap by +r.
    """
    if params.criterion == Criterion.DISCOUNTED:
        if params.alpha is None:
            raise ValueError("alpha required for the discounted slope cap")
        cap = (params.h + params.c * params.theta) / (params.alpha + params.theta)
    else:
        cap = (params.h + params.c * params.theta) / params.theta
    if params.payment == Payment.COMPLETION:
        cap += params.r
    return cap


def prune(env: LowerEnvelope, params: ModelParams) -> LowerEnvelope:
    """Drop breakpoints no optimal policy can use.

    Removes breakpoints with left slope above the criterion cap; when the
    cloud's minimum cost is nonnegative, also removes breakpoints with
    right slope <= 0. Both filters keep a contiguous window of the chain
    (slopes are nondecreasing), so interior slopes are unchanged. At least
    one breakpoint always survives.
    """
    cap = slope_cap(params)
    keep = env.left_slopes <= cap
    if env.f.min() >= 0.0:
        keep &= env.right_slopes > 0.0
    if not keep.any():
        keep[int(np.argmin(env.f))] = True
    idx = np.flatnonzero(keep)
    return LowerEnvelope(env.mu[idx[0] : idx[-1] + 1], env.f[idx[0] : idx[-1] + 1])


def best_action_indices(env: LowerEnvelope, betas: np.ndarray) -> np.ndarray:
    """Smallest-mu maximizer index of -f - mu*beta for each beta.

    Moving right from breakpoint k improves the score exactly when the
    chord slope s_k < -beta, so the maximizer is the first k with
    s_k >= -beta; exact slope ties resolve to the smaller rate.
    """
    betas = np.asarray(betas, dtype=float)
    return np.searchsorted(env.slopes, -betas, side="left")


def best_action(
    env: LowerEnvelope,
    beta: float,
    incumbent: tuple[float, float] | None = None,
    tie_eps: float = 1e-12,
) -> tuple[float, float]:
    """Breakpoint maximizing -f - mu*beta.

    If the incumbent breakpoint attains the maximum within tie_eps it is
    retained (required for finite convergence of policy iteration);
    otherwise the smallest-mu maximizer is returned.
    """
    if len(env) == 0:
        raise ValueError("empty envelope")
    k = int(best_action_indices(env, np.asarray([beta]))[0])
    if incumbent is not None:
        best_score = -env.f[k] - env.mu[k] * beta
        inc_score = -incumbent[1] - incumbent[0] * beta
        if inc_score >= best_score - tie_eps:
            return (float(incumbent[0]), float(incumbent[1]))
    return env.point(k)
