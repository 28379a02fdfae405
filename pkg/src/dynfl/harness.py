"""Trial orchestration and report building for the CLI front end.

Randomness across repeated rounding trials follows one documented splitting
rule: trial ``k`` of a run with master seed ``s`` uses
``numpy.random.default_rng(numpy.random.SeedSequence(s).spawn(trials)[k])``.
The master seed therefore fully determines every random choice, and trials
could be evaluated in any order (or in parallel) with identical results.

Reports come in two renderings: a JSON document (machine-readable, stable
bytes for fixed seeds) and an aligned text table.  Wall-clock timings are
kept out of the serialized payloads so that seeded pipelines stay
byte-reproducible; the CLI prints timings to stderr instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exact import SizeGuardError, exact_fixed, exact_hourly, static_baseline
from .model import (CostBreakdown, DynflError, Instance, Mode, Solution,
                    evaluate_cost, validate)
from .relaxation import FractionalSolution, solve_relaxation
from .rounding import round_fixed, round_hourly, sampling_rate

#: Best-of-k default: ceil(log2(1/epsilon)) repetitions drive the failure
#: probability of the 1/4-success guarantee below epsilon = 1%.
DEFAULT_TRIALS = math.ceil(math.log2(1.0 / 0.01))

#: Auto mode solves the LP only when it stays desk-sized.
LP_AUTO_VAR_LIMIT = 2500


def bound_factor(n: int, T: int) -> float:
    """Approximation factor ``4 ln(2nT)`` certified by the rounding analysis."""
    return 2.0 * sampling_rate(n, T)


def trial_rngs(master_seed: int, count: int) -> list:
    """Independent per-trial generators derived from one master seed."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def _lp_var_count(instance: Instance) -> int:
    per_mode = instance.m if instance.mode is Mode.FIXED else instance.T * instance.m
    return per_mode + (2 * instance.T - 1) * instance.m * instance.n


def _maybe(flag: str, what: str, compute):
    """Run ``compute`` per an auto/on/off flag, tolerating guards in auto."""
    if flag == "off":
        return None
    try:
        return compute()
    except SizeGuardError:
        if flag == "on":
            raise
        return None


@dataclass
class TrialReport:
    """Outcome of one ``solve`` invocation (possibly many rounding trials)."""

    instance_name: str
    instance_id: str
    mode: str
    algorithm: str
    seed: int | None
    trials: int
    lp_value: float | None
    trial_costs: list = field(default_factory=list)
    best_cost: float = math.inf
    best_trial: int = 0
    bound_factor: float | None = None
    success_fraction: float | None = None
    exact_total: float | None = None
    static_total: float | None = None
    wall_clock_s: float | None = None

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {
            "instance": self.instance_name,
            "instance_id": self.instance_id,
            "mode": self.mode,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "trials": self.trials,
            "lp_value": self.lp_value,
            "trial_costs": list(self.trial_costs),
            "best_cost": self.best_cost,
            "best_trial": self.best_trial,
            "bound_factor": self.bound_factor,
            "success_fraction": self.success_fraction,
            "exact_total": self.exact_total,
            "static_total": self.static_total,
        }
        if include_timings:
            out["wall_clock_s"] = self.wall_clock_s
        return out

    def to_json(self, include_timings: bool = False) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2) + "\n"

    def to_table(self) -> str:
        rows = [("instance", self.instance_name),
                ("instance id", self.instance_id),
                ("mode", self.mode),
                ("algorithm", self.algorithm),
                ("seed", _fmt(self.seed)),
                ("trials", str(self.trials)),
                ("lp value", _fmt(self.lp_value)),
                ("best cost", _fmt(self.best_cost)),
                ("best trial", str(self.best_trial)),
                ("bound 4ln(2nT)*LP", _fmt(None if self.lp_value is None or
                                           self.bound_factor is None
                                           else self.bound_factor * self.lp_value)),
                ("success fraction", _fmt(self.success_fraction)),
                ("exact optimum", _fmt(self.exact_total)),
                ("static baseline", _fmt(self.static_total))]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def run_trials(instance: Instance, frac: FractionalSolution, trials: int,
               master_seed: int, retry_budget: int = 64):
    """Run seeded rounding trials; returns (best solution, per-trial costs).

    The best solution is the first trial attaining the minimum total cost.
    """
    rounder = round_fixed if instance.mode is Mode.FIXED else round_hourly
    costs: list[float] = []
    best: Solution | None = None
    best_cost = math.inf
    for rng in trial_rngs(master_seed, trials):
        if instance.mode is Mode.FIXED:
            sol = rounder(instance, frac, rng)
        else:
            sol = rounder(instance, frac, rng, retry_budget)
        total = evaluate_cost(instance, sol).total
        costs.append(total)
        if total < best_cost:
            best, best_cost = sol, total
    return best, costs


def solve_instance(instance: Instance, algorithm: str, trials: int = DEFAULT_TRIALS,
                   seed: int = 0, with_exact: str = "auto", with_static: str = "auto",
                   with_lp: str = "auto", retry_budget: int = 64,
                   instance_name: str = "<instance>"):
    """Dispatch one solve; returns ``(solution, TrialReport)``."""
    if algorithm not in ("lp-round", "exact", "static"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    report = TrialReport(instance_name=instance_name, instance_id=instance.digest(),
                         mode=instance.mode.value, algorithm=algorithm,
                         seed=seed if algorithm == "lp-round" else None,
                         trials=trials if algorithm == "lp-round" else 1,
                         lp_value=None)

    frac = None
    want_lp = with_lp == "on" or algorithm == "lp-round" or (
        with_lp == "auto" and _lp_var_count(instance) <= LP_AUTO_VAR_LIMIT)
    if want_lp:
        frac = solve_relaxation(instance)
        report.lp_value = frac.lp_value
        report.bound_factor = bound_factor(instance.n, instance.T)

    if algorithm == "lp-round":
        solution, costs = run_trials(instance, frac, trials, seed, retry_budget)
        report.trial_costs = costs
        report.best_cost = min(costs)
        report.best_trial = costs.index(report.best_cost)
        bound = report.bound_factor * frac.lp_value
        report.success_fraction = sum(c <= bound for c in costs) / len(costs)
    elif algorithm == "exact":
        solver = exact_fixed if instance.mode is Mode.FIXED else exact_hourly
        solution, breakdown = solver(instance)
        report.trial_costs = [breakdown.total]
        report.best_cost = breakdown.total
        report.exact_total = breakdown.total
    else:
        solution, breakdown = static_baseline(instance)
        report.trial_costs = [breakdown.total]
        report.best_cost = breakdown.total
        report.static_total = breakdown.total

    if report.exact_total is None:
        exact_solver = exact_fixed if instance.mode is Mode.FIXED else exact_hourly
        got = _maybe(with_exact, "exact", lambda: exact_solver(instance))
        report.exact_total = got[1].total if got else None
    if report.static_total is None:
        got = _maybe(with_static, "static", lambda: static_baseline(instance))
        report.static_total = got[1].total if got else None
    return solution, report


@dataclass
class ComparisonReport:
    """Side-by-side cost table for several solutions of one instance."""

    instance_name: str
    instance_id: str
    mode: str
    lp_value: float | None
    exact_total: float | None
    rows: list = field(default_factory=list)  # dicts per solution

    def to_dict(self) -> dict:
        return {
            "instance": self.instance_name,
            "instance_id": self.instance_id,
            "mode": self.mode,
            "lp_value": self.lp_value,
            "exact_total": self.exact_total,
            "solutions": list(self.rows),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_table(self) -> str:
        headers = ["solution", "opening", "distance", "switching", "total",
                   "/lp", "/opt"]
        table_rows = []
        for row in self.rows:
            table_rows.append([
                row["name"], _fmt(row["opening"]), _fmt(row["distance"]),
                _fmt(row["switching"]), _fmt(row["total"]),
                _fmt(row["ratio_lp"]), _fmt(row["ratio_opt"])])
        lines = [f"instance: {self.instance_name} ({self.instance_id}, {self.mode})",
                 f"lp value: {_fmt(self.lp_value)}    exact optimum: {_fmt(self.exact_total)}",
                 _render(headers, table_rows)]
        return "\n".join(lines)


def _render(headers, rows) -> str:
    widths = [max(len(str(h)), *(len(r[i]) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(headers)]
    def line(cells):
        return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [line(headers), line(["-" * w for w in widths])]
    out += [line(r) for r in rows]
    return "\n".join(out) + "\n"


def build_comparison(instance: Instance, named_solutions, with_exact: str = "auto",
                     with_lp: str = "auto", instance_name: str = "<instance>") -> ComparisonReport:
    """Compare solutions against the LP bound and exact optimum when available.

    ``named_solutions`` is a sequence of ``(name, Solution)``.  Every solution
    must be feasible; an infeasible one fails the whole report, naming it.
    """
    lp_value = None
    if with_lp == "on" or (with_lp == "auto" and
                           _lp_var_count(instance) <= LP_AUTO_VAR_LIMIT):
        lp_value = solve_relaxation(instance).lp_value
    exact_solver = exact_fixed if instance.mode is Mode.FIXED else exact_hourly
    got = _maybe(with_exact, "exact", lambda: exact_solver(instance))
    exact_total = got[1].total if got else None

    report = ComparisonReport(instance_name=instance_name,
                              instance_id=instance.digest(),
                              mode=instance.mode.value, lp_value=lp_value,
                              exact_total=exact_total)
    for name, solution in named_solutions:
        ok, violations = validate(instance, solution)
        if not ok:
            raise DynflError(
                f"solution {name!r} is infeasible for this instance "
                f"({len(violations)} violations, first at t={violations[0][0] + 1}, "
                f"j={violations[0][1]})")
        bd = evaluate_cost(instance, solution)
        report.rows.append({
            "name": name,
            "opening": bd.opening,
            "distance": bd.distance,
            "switching": bd.switching,
            "total": bd.total,
            "ratio_lp": (bd.total / lp_value) if lp_value else None,
            "ratio_opt": (bd.total / exact_total) if exact_total else None,
        })
    return report
