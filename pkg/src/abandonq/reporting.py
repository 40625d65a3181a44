"""Report emission: delimited policy tables, the report document, figures.

Everything numeric is written at 17 significant digits so downstream
diffs are meaningful and the embedded config reproduces runs exactly.
The report document is itself valid INI whose [model]/[actions]/[solver]/
[sim] sections are the fully resolved config, so it can be passed back to
the CLI as a config file.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .config import ResolvedConfig, fmt
from .model import Criterion, Policy
from .solver import SolveReport

__all__ = [
    "read_policy_table",
    "render_policy_figure",
    "render_sweep_figure",
    "write_estimate_document",
    "write_policy_table",
    "write_report_document",
    "write_sweep_table",
]


def write_policy_table(path, report: SolveReport) -> None:
    """CSV with one row per controllable state: state, mu, f, delta_value.

    delta_value in row i is the value increment at i-1, the quantity whose
    argmax picked state i's action.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["state", "mu", "f", "delta_value"])
        delta = report.evaluation.delta
        for i in range(len(report.policy)):
            w.writerow(
                [i + 1, fmt(report.policy.mu[i]), fmt(report.policy.f[i]), fmt(delta[i])]
            )


def read_policy_table(path) -> Policy:
    """Parse a policy CSV back into a Policy (states must run 1..L)."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0][:3]] != ["state", "mu", "f"]:
        raise ValueError("policy file must start with header: state,mu,f[,delta_value]")
    states, mu, f = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            states.append(int(row[0]))
            mu.append(float(row[1]))
            f.append(float(row[2]))
        except (ValueError, IndexError):
            raise ValueError(f"policy file line {lineno}: expected state,mu,f") from None
    if states != list(range(1, len(states) + 1)):
        raise ValueError("policy file states must be contiguous 1..L")
    return Policy(mu=np.asarray(mu), f=np.asarray(f))


def _diagnostics_lines(report: SolveReport) -> list[str]:
    d = report.diagnostics
    lines = ["[diagnostics]"]
    lines.append(f"verified = {str(d.verified).lower()}")
    lines.append(f"trusted_upto = {d.trusted_upto}")
    if d.monotone is not None:
        lines.append(f"monotone = {str(d.monotone.ok).lower()}")
        if d.monotone.first_violation is not None:
            lines.append(f"monotone_first_violation = {d.monotone.first_violation}")
    if d.unimodal is not None:
        lines.append(f"unimodal = {str(d.unimodal.ok).lower()}")
        if d.unimodal.peak is not None:
            lines.append(f"unimodal_peak = {d.unimodal.peak}")
    if d.concavity is not None:
        lines.append(f"concavity = {str(d.concavity.ok).lower()}")
    if not np.isnan(d.delta2_max):
        lines.append(f"delta2_max = {fmt(d.delta2_max)}")
    for b in d.bounds:
        if b.skipped:
            lines.append(f"bound_{b.name} = skipped")
        else:
            lines.append(f"bound_{b.name} = {'pass' if b.satisfied else 'FAIL'} {fmt(b.margin)}")
    return lines


def write_report_document(path, report: SolveReport, cfg: ResolvedConfig) -> None:
    buf = io.StringIO()
    p = report.params
    buf.write("[result]\n")
    if p.criterion == Criterion.AVERAGE:
        buf.write(f"gain = {fmt(report.evaluation.gain)}\n")
    else:
        buf.write(f"value_at_0 = {fmt(report.evaluation.values[0])}\n")
    buf.write(f"iterations = {report.iterations}\n")
    buf.write(f"truncation_L = {report.L}\n")
    buf.write(f"tail_limit_mu = {fmt(report.mu_inf)}\n")
    buf.write(f"residual = {fmt(report.evaluation.residual)}\n")
    buf.write(f"breakpoints_raw = {report.envelope_meta['breakpoints_raw']}\n")
    buf.write(f"breakpoints_pruned = {report.envelope_meta['breakpoints_pruned']}\n")
    buf.write(f"grid_resolution = {fmt(report.envelope_meta['grid_resolution'])}\n")
    if report.stabilization is not None:
        buf.write(f"stabilization_eps = {fmt(report.stabilization['eps'])}\n")
        buf.write(f"stabilization_tail_margin = {fmt(report.stabilization['tail_margin'])}\n")
    buf.write("\n")
    buf.write("\n".join(_diagnostics_lines(report)))
    buf.write("\n\n[trace]\n")
    for n, (obj, changed) in enumerate(report.trace, start=1):
        buf.write(f"iter_{n} = {fmt(obj)} {changed}\n")
    buf.write("\n")
    buf.write(cfg.to_ini())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def write_estimate_document(path, est, analytic: float, z: float | None) -> None:
    lines = ["[estimate]"]
    lines.append(f"estimate = {fmt(est.estimate)}")
    lines.append(f"stderr = {fmt(est.stderr) if est.stderr is not None else 'none'}")
    lines.append(f"replications = {est.replications}")
    lines.append(f"horizon = {fmt(est.horizon)}")
    lines.append(f"seed = {est.seed}")
    lines.append(f"analytic = {fmt(analytic)}")
    lines.append(f"z = {fmt(z) if z is not None else 'none'}")
    for key in ("reward_credit", "abandon_cost", "holding_cost", "service_cost",
                "arrivals", "completions", "abandonments", "blocked"):
        lines.append(f"mean_{key} = {fmt(est.components[key].mean())}")
    lines.append("")
    lines.append("[replications]")
    for i, v in enumerate(est.rep_estimates):
        lines.append(f"rep_{i} = {fmt(v)}")
    lines.append("")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def write_sweep_table(path, rows) -> None:
    """Long-format CSV: one (value, state, mu) row per solved state."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["value", "state", "mu"])
        for value, state, mu in rows:
            w.writerow([fmt(value), state, fmt(mu)])


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def render_policy_figure(path, report: SolveReport) -> None:
    """Optimal service rate by state, with the tail limit marked."""
    plt = _plt()
    states = np.arange(1, len(report.policy) + 1)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.step(states, report.policy.mu, where="post", lw=1.5)
    ax.axhline(report.mu_inf, color="tab:red", ls="--", lw=1.0,
               label=f"tail limit {report.mu_inf:g}")
    ax.set_xlabel("customers in system")
    ax.set_ylabel("service rate")
    crit = report.params.criterion.value
    pay = report.params.payment.value
    ax.set_title(f"optimal service rate ({crit}, payment at {pay})")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep_figure(path, name: str, solved: list) -> None:
    """Overlay of solved rate curves across sweep values."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    for value, report in solved:
        states = np.arange(1, len(report.policy) + 1)
        ax.step(states, report.policy.mu, where="post", lw=1.2, label=f"{name}={value:g}")
    ax.set_xlabel("customers in system")
    ax.set_ylabel("service rate")
    ax.set_title(f"optimal service rate across {name}")
    if solved:
        ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
