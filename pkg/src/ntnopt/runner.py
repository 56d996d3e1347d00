"""Scenario orchestration: multi-realization evaluation, optimization, output files."""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .association import run_association_step
from .config import SEARCH_DIMS, ScenarioConfig
from .metrics import StepMetrics, aggregate_realizations, jfi, scalarize, step_metrics
from .mobility import init_users, load_region, step_users, user_streams
from .optimizer import optimize
from .orbital import LAYER_ORDER, Constellation, propagate_arrays

logger = logging.getLogger(__name__)

STEP_COLUMNS = ("realization", "t", "layer", "users_covered", "active_sats", "mean_beams_per_sat",
                "mean_beam_radius_km", "sum_rate_bps", "jfi")
TRIAL_COLUMNS = ("trial", "P_L", "S_L", "P_M", "S_M", "f", "mean_R_gbps", "mean_JFI", "seed")
ALL_LAYERS = "ALL"


@dataclass
class RealizationResult:
    seed: int
    steps: list[StepMetrics]
    user_mean_rate_bps: np.ndarray
    violations: int

    @property
    def mean_sum_rate_bps(self) -> float:
        return float(np.mean([s.sum_rate_bps for s in self.steps]))

    @property
    def mean_jfi(self) -> float:
        return float(np.mean([s.jfi for s in self.steps]))


@dataclass
class RunOutputs:
    step_rows: list[dict] | None
    trial_rows: list[dict] | None
    summary: dict = field(default_factory=dict)


def count_violations(assignment, beams_per_sat: int, users_per_beam: int) -> int:
    """Number of broken capacity / exclusivity constraints in one step."""
    bad = sum(1 for n in assignment.usage.values() if n > beams_per_sat)
    per_sat: dict[int, int] = {}
    seen: set[int] = set()
    for beam in assignment.active_beams:
        per_sat[beam.sat] = per_sat.get(beam.sat, 0) + 1
        if len(beam.admitted) > users_per_beam:
            bad += 1
        for u in beam.admitted:
            if u in seen:
                bad += 1
            seen.add(u)
    bad += sum(1 for n in per_sat.values() if n > beams_per_sat)
    return bad


def simulate_realization(cfg: ScenarioConfig, configuration, seed: int) -> RealizationResult:
    """One seeded end-to-end run of the configured number of steps."""
    region = load_region(cfg.region.path)
    const = Constellation(cfg.layer_configs(configuration))
    n = cfg.global_.n_users
    streams = user_streams(seed, n)
    mob = cfg.mobility_params()
    users = init_users(n, region, mob, streams)
    rng = np.random.default_rng([seed, 1])
    ap, cp = cfg.association_params(), cfg.channel_params()
    covered: set[int] | None = set() if ap.persist_covered else None
    steps, violations = [], 0
    rate_total = np.zeros(n)
    for t in range(cfg.global_.steps):
        if t > 0:
            users = step_users(users, mob, region, streams)
        sats = propagate_arrays(const, t * cfg.global_.step_seconds)
        assignment = run_association_step(users, sats, ap, cp, rng, t, covered)
        violations += count_violations(assignment, ap.beams_per_sat, ap.users_per_beam)
        for u, rec in assignment.links.items():
            rate_total[u] += rec.rate_bps
        steps.append(step_metrics(assignment, n))
    return RealizationResult(seed, steps, rate_total / cfg.global_.steps, violations)


def _simulate_args(args):
    return simulate_realization(*args)


def simulate_many(cfg: ScenarioConfig, configuration, realizations: int) -> list[RealizationResult]:
    """Realization ``r`` uses seed ``global.seed + r``; results come back in ``r`` order."""
    jobs = [(cfg, configuration, cfg.global_.seed + r) for r in range(realizations)]
    if cfg.global_.workers > 1 and realizations > 1:
        with ProcessPoolExecutor(max_workers=cfg.global_.workers) as pool:
            return list(pool.map(_simulate_args, jobs))
    return [simulate_realization(*job) for job in jobs]


def _config_dict(configuration) -> dict:
    return dict(zip(SEARCH_DIMS, (int(v) for v in configuration)))


def _nanmean(values) -> float:
    arr = np.asarray(values, dtype=float)
    return float(np.nanmean(arr)) if arr.size and not np.all(np.isnan(arr)) else float("nan")


def _ci_half(values) -> float:
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return float("nan")
    return float(1.96 * np.std(arr, ddof=1) / math.sqrt(arr.size))


def _series(matrix) -> dict:
    agg = aggregate_realizations(matrix)
    out = {"mean": agg.mean.tolist()}
    if agg.lower is not None:
        out["lower"] = agg.lower.tolist()
        out["upper"] = agg.upper.tolist()
    return out


def step_rows(results: list[RealizationResult]) -> list[dict]:
    rows = []
    for r, res in enumerate(results):
        for s in res.steps:
            for layer in LAYER_ORDER:
                rows.append({
                    "realization": r, "t": s.t, "layer": layer,
                    "users_covered": s.users_covered[layer],
                    "active_sats": s.active_sats[layer],
                    "mean_beams_per_sat": s.mean_beams_per_sat[layer],
                    "mean_beam_radius_km": s.mean_beam_radius_km[layer],
                    "sum_rate_bps": s.sum_rate_by_layer[layer],
                    "jfi": None,
                })
            n_active = sum(s.active_sats.values())
            n_beams = sum(s.mean_beams_per_sat[k] * s.active_sats[k] for k in LAYER_ORDER
                          if s.active_sats[k])
            radii = [x for k in LAYER_ORDER for x in s.beam_radii_km[k]]
            rows.append({
                "realization": r, "t": s.t, "layer": ALL_LAYERS,
                "users_covered": sum(s.users_covered.values()),
                "active_sats": n_active,
                "mean_beams_per_sat": n_beams / n_active if n_active else None,
                "mean_beam_radius_km": float(np.mean(radii)) if radii else None,
                "sum_rate_bps": s.sum_rate_bps,
                "jfi": s.jfi,
            })
    return rows


def summarize(cfg: ScenarioConfig, configuration, results: list[RealizationResult]) -> dict:
    n = cfg.global_.n_users
    rate_means = [res.mean_sum_rate_bps for res in results]
    jfi_means = [res.mean_jfi for res in results]
    mean_rate = float(np.mean(rate_means))
    mean_jfi = float(np.mean(jfi_means))
    per_user = np.mean([res.user_mean_rate_bps for res in results], axis=0)
    per_layer = {}
    series = {
        "sum_rate_bps": _series([[s.sum_rate_bps for s in res.steps] for res in results]),
        "jfi": _series([[s.jfi for s in res.steps] for res in results]),
    }
    for layer in LAYER_ORDER:
        all_radii = [x for res in results for s in res.steps for x in s.beam_radii_km[layer]]
        per_layer[layer] = {
            "mean_users_covered": _nanmean([s.users_covered[layer] for res in results for s in res.steps]),
            "mean_active_sats": _nanmean([s.active_sats[layer] for res in results for s in res.steps]),
            "mean_beams_per_sat": _nanmean([s.mean_beams_per_sat[layer] for res in results for s in res.steps]),
            "mean_beam_radius_km": _nanmean(all_radii),
        }
        series[f"users_covered_{layer}"] = _series(
            [[s.users_covered[layer] for s in res.steps] for res in results])
        series[f"active_sats_{layer}"] = _series(
            [[s.active_sats[layer] for s in res.steps] for res in results])
    return {
        "configuration": _config_dict(configuration),
        "realizations": len(results),
        "realization_seeds": [res.seed for res in results],
        "mean_sum_rate_bps": mean_rate,
        "mean_sum_rate_gbps": mean_rate / 1e9,
        "mean_jfi": mean_jfi,
        "jfi_of_mean_user_rates": jfi(per_user, n),
        "objective": scalarize(mean_rate, mean_jfi, cfg.global_.omega, cfg.global_.r_ref_bps),
        "ci_half_width": {"sum_rate_bps": _ci_half(rate_means), "jfi": _ci_half(jfi_means)},
        "per_layer": per_layer,
        "constraint_violations": int(sum(res.violations for res in results)),
        "series": series,
    }


def run_evaluate(cfg: ScenarioConfig, configuration=None) -> RunOutputs:
    configuration = tuple(configuration or cfg.default_configuration())
    results = simulate_many(cfg, configuration, cfg.global_.realizations)
    summary = {"version": __version__, "mode": "evaluate", "seed": cfg.global_.seed}
    summary.update(summarize(cfg, configuration, results))
    summary["config"] = cfg.to_dict()
    return RunOutputs(step_rows(results), None, summary)


def run_optimize(cfg: ScenarioConfig) -> RunOutputs:
    space = cfg.search_space()
    opt = cfg.optimizer
    seed = cfg.global_.seed
    details: dict[tuple, dict] = {}

    def evaluator(configuration):
        results = simulate_many(cfg, configuration, opt.realizations_per_trial)
        s = summarize(cfg, configuration, results)
        details[tuple(configuration)] = s
        return s["objective"]

    best, history = optimize(space, evaluator, opt.budget, opt.strategy,
                             np.random.default_rng([seed, 2]), opt.n_init, seed)
    trial_rows = []
    for i, tr in enumerate(history.trials):
        d = details[tr.configuration]
        trial_rows.append({"trial": i, **_config_dict(tr.configuration), "f": tr.objective,
                           "mean_R_gbps": d["mean_sum_rate_gbps"], "mean_JFI": d["mean_jfi"],
                           "seed": seed})
    summary = {
        "version": __version__, "mode": "optimize", "seed": seed,
        "strategy": opt.strategy, "trials": len(history),
        "best_configuration": _config_dict(best),
        "best_trial_objective": history.best.objective,
        "best_trial_mean_sum_rate_gbps": details[best]["mean_sum_rate_gbps"],
        "best_trial_mean_jfi": details[best]["mean_jfi"],
    }
    rows = None
    if opt.final_evaluation:
        results = simulate_many(cfg, best, cfg.global_.realizations)
        summary["final_evaluation"] = summarize(cfg, best, results)
        rows = step_rows(results)
    summary["config"] = cfg.to_dict()
    return RunOutputs(rows, trial_rows, summary)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "" if not math.isfinite(value) else format(float(value), ".9g")
    return str(value)


def _clean(obj):
    """JSON-safe copy: floats rounded to 9 significant digits, NaN/Inf -> null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(format(float(obj), ".9g")) if math.isfinite(obj) else None
    return obj


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def emit_outputs(outputs: RunOutputs, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if outputs.step_rows is not None:
        _write_csv(out / "step_metrics.csv", STEP_COLUMNS, outputs.step_rows)
        written.append(out / "step_metrics.csv")
    if outputs.trial_rows is not None:
        _write_csv(out / "trials.csv", TRIAL_COLUMNS, outputs.trial_rows)
        written.append(out / "trials.csv")
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(_clean(outputs.summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(out / "summary.json")
    return written
