"""Config ingestion for the CLI.

Flat INI document with sections [model], [actions], [solver], [sim].
Action sets come either as an explicit point table or as a uniform rate
grid with a closed-form cost (quadratic k*mu^2 or linear k*mu); nothing
fancier is parsed on purpose. ResolvedConfig.to_ini() re-emits the fully
resolved document (defaults filled, truncation level pinned) at 17
significant digits, so a report can be fed straight back as a config and
reproduce the run exactly.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace

import numpy as np

from .model import ActionSet, Criterion, ModelParams, Payment

__all__ = ["ConfigError", "ResolvedConfig", "fmt", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Malformed or semantically invalid configuration."""


def fmt(x) -> str:
    """Full-precision text for a float (17 significant digits)."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ResolvedConfig:
    params: ModelParams
    actions: ActionSet
    action_spec: dict
    L: int | None
    tie_eps: float
    tail_eps: float | None
    max_states: int
    zone_frac: float
    sim_horizon: float
    sim_reps: int
    sim_seed: int
    sim_burn_in: float

    def with_L(self, L: int) -> "ResolvedConfig":
        return replace(self, L=L)

    def with_params(self, params: ModelParams) -> "ResolvedConfig":
        return replace(self, params=params)

    def to_ini(self) -> str:
        p = self.params
        lines = ["[model]"]
        lines.append(f"lambda = {fmt(p.lam)}")
        lines.append(f"r = {fmt(p.r)}")
        lines.append(f"h = {fmt(p.h)}")
        lines.append(f"c = {fmt(p.c)}")
        lines.append(f"theta = {fmt(p.theta)}")
        lines.append(f"payment = {p.payment.value}")
        lines.append(f"criterion = {p.criterion.value}")
        if p.criterion == Criterion.DISCOUNTED:
            lines.append(f"alpha = {fmt(p.alpha)}")
        lines.append(
            "capacity = " + ("infinite" if p.capacity is None else str(p.capacity))
        )
        lines.append("")
        lines.append("[actions]")
        spec = self.action_spec
        if spec["cost"] == "table":
            pts = ", ".join(f"{fmt(m)}:{fmt(f)}" for m, f in zip(spec["mu"], spec["f"]))
            lines.append("cost = table")
            lines.append(f"points = {pts}")
        else:
            lines.append(f"mu_min = {fmt(spec['mu_min'])}")
            lines.append(f"mu_max = {fmt(spec['mu_max'])}")
            lines.append(f"grid_step = {fmt(spec['grid_step'])}")
            lines.append(f"cost = {spec['cost']}")
            lines.append(f"cost_coeff = {fmt(spec['cost_coeff'])}")
        lines.append("")
        lines.append("[solver]")
        if self.L is not None:
            lines.append(f"L = {self.L}")
        lines.append(f"tie_eps = {fmt(self.tie_eps)}")
        if self.tail_eps is not None:
            lines.append(f"tail_eps = {fmt(self.tail_eps)}")
        lines.append(f"max_states = {self.max_states}")
        lines.append(f"zone_frac = {fmt(self.zone_frac)}")
        lines.append("")
        lines.append("[sim]")
        lines.append(f"horizon = {fmt(self.sim_horizon)}")
        lines.append(f"reps = {self.sim_reps}")
        lines.append(f"seed = {self.sim_seed}")
        lines.append(f"burn_in = {fmt(self.sim_burn_in)}")
        lines.append("")
        return "\n".join(lines)


def _getfloat(sec, key, section_name, default=None):
    raw = sec.get(key, None)
    if raw is None or raw.strip() == "":
        if default is not None:
            return default
        raise ConfigError(f"[{section_name}] missing required key '{key}'")
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section_name}] {key}: not a number: {raw!r}") from None


def _getint(sec, key, section_name, default=None):
    raw = sec.get(key, None)
    if raw is None or raw.strip() == "":
        if default is not None:
            return default
        raise ConfigError(f"[{section_name}] missing required key '{key}'")
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section_name}] {key}: not an integer: {raw!r}") from None


def _parse_points(raw: str) -> tuple[np.ndarray, np.ndarray]:
    mus, fs = [], []
    for tok in raw.replace("\n", ",").split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" not in tok:
            raise ConfigError(f"[actions] points: expected 'mu:f', got {tok!r}")
        mtxt, ftxt = tok.split(":", 1)
        try:
            mus.append(float(mtxt))
            fs.append(float(ftxt))
        except ValueError:
            raise ConfigError(f"[actions] points: bad pair {tok!r}") from None
    if not mus:
        raise ConfigError("[actions] points: empty point list")
    return np.asarray(mus), np.asarray(fs)


def _parse_actions(sec) -> tuple[ActionSet, dict]:
    cost = sec.get("cost", "table").strip().lower()
    if cost == "table" or "points" in sec:
        if "points" not in sec:
            raise ConfigError("[actions] missing 'points' for table form")
        mu, f = _parse_points(sec["points"])
        return ActionSet(mu, f), {"cost": "table", "mu": mu, "f": f}
    if cost not in ("quadratic", "linear"):
        raise ConfigError(
            f"[actions] cost must be 'quadratic', 'linear' or 'table', got {cost!r}"
        )
    mu_min = _getfloat(sec, "mu_min", "actions")
    mu_max = _getfloat(sec, "mu_max", "actions")
    step = _getfloat(sec, "grid_step", "actions")
    k = _getfloat(sec, "cost_coeff", "actions")
    if step <= 0 or mu_max < mu_min:
        raise ConfigError("[actions] need grid_step > 0 and mu_max >= mu_min")
    costfn = (lambda m: k * m**2) if cost == "quadratic" else (lambda m: k * m)
    actions = ActionSet.grid(mu_min, mu_max, step, costfn)
    spec = {
        "cost": cost,
        "mu_min": mu_min,
        "mu_max": mu_max,
        "grid_step": step,
        "cost_coeff": k,
    }
    return actions, spec


def parse_config(text: str, origin: str = "<config>") -> ResolvedConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    for section in ("model", "actions"):
        if section not in cp:
            raise ConfigError(f"missing required section [{section}]")
    m = cp["model"]
    payment_raw = m.get("payment", "arrival").strip().lower()
    try:
        payment = Payment(payment_raw)
    except ValueError:
        raise ConfigError(f"[model] payment must be arrival or completion, got {payment_raw!r}") from None
    criterion_raw = m.get("criterion", "average").strip().lower()
    try:
        criterion = Criterion(criterion_raw)
    except ValueError:
        raise ConfigError(f"[model] criterion must be average or discounted, got {criterion_raw!r}") from None
    cap_raw = m.get("capacity", "infinite").strip().lower()
    if cap_raw in ("infinite", "inf", ""):
        capacity = None
    else:
        try:
            capacity = int(cap_raw)
        except ValueError:
            raise ConfigError(f"[model] capacity must be 'infinite' or an integer, got {cap_raw!r}") from None
    alpha = None
    if m.get("alpha", "").strip() != "":
        alpha = _getfloat(m, "alpha", "model")
    params = ModelParams(
        lam=_getfloat(m, "lambda", "model"),
        r=_getfloat(m, "r", "model"),
        h=_getfloat(m, "h", "model"),
        c=_getfloat(m, "c", "model"),
        theta=_getfloat(m, "theta", "model"),
        payment=payment,
        criterion=criterion,
        alpha=alpha,
        capacity=capacity,
    )
    actions, spec = _parse_actions(cp["actions"])
    s = cp["solver"] if "solver" in cp else {}
    L = None
    if isinstance(s, configparser.SectionProxy) and s.get("L", "").strip() not in ("", "auto"):
        L = _getint(s, "L", "solver")
    tail_eps = None
    if isinstance(s, configparser.SectionProxy) and s.get("tail_eps", "").strip() != "":
        tail_eps = _getfloat(s, "tail_eps", "solver")
    sim = cp["sim"] if "sim" in cp else {}
    return ResolvedConfig(
        params=params,
        actions=actions,
        action_spec=spec,
        L=L,
        tie_eps=_getfloat(s, "tie_eps", "solver", 1e-12) if s else 1e-12,
        tail_eps=tail_eps,
        max_states=_getint(s, "max_states", "solver", 2**20) if s else 2**20,
        zone_frac=_getfloat(s, "zone_frac", "solver", 0.05) if s else 0.05,
        sim_horizon=_getfloat(sim, "horizon", "sim", 1e5) if sim else 1e5,
        sim_reps=_getint(sim, "reps", "sim", 30) if sim else 30,
        sim_seed=_getint(sim, "seed", "sim", 0) if sim else 0,
        sim_burn_in=_getfloat(sim, "burn_in", "sim", 0.1) if sim else 0.1,
    )


def load_config(path) -> ResolvedConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, origin=str(path))
