"""Reproducible sweep harness: trials over (m, eps), CSV rows, bound reports.

A sweep config pins everything: the sensing law (plain or contaminated),
link, channel, signal spec, constraint set, the m and eps grids, trials per
cell, and the confidence parameter u. Each trial draws its own dataset from
a seed that is a stable hash of (base_seed, m, eps, trial), so runs are
byte-identical regardless of thread count or execution order.

Per-cell population quantities (lambda, alpha, the closed-form alpha bound,
psi2 norms, mean width) are computed once per eps and copied into every row
so the concentration bound

    bound_value = 2 alpha_mc + c0 (psi2_a^2 + psi2_y^2) (width + u) / sqrt(m)

can be recomputed from any single CSV row. Wall-clock time is kept out of
the CSV on purpose; it lives in the JSON summary.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._util import ConfigError, PreconditionError, derive_seed, make_rng, norm2
from .contamination import ContaminationModel, contaminated_alpha_bounds, contaminated_law
from .distributions import StandardizedDistribution, from_spec, psi_norm
from .geometry import WidthEstimate, min_samples, width_descent_cone_sparse_proxy, width_sparse_sphere
from .link_model import (
    Channel,
    SensingModel,
    alpha_bound_c2,
    alpha_bound_lipschitz,
    alpha_bound_sign,
    link_from_dict,
    population_summary,
)
from .recovery import ConstraintSet, estimate, generate, recovery_error

__all__ = [
    "ExperimentConfig",
    "TrialRow",
    "CSV_COLUMNS",
    "run_sweep",
    "rows_to_csv",
    "parse_rows",
    "fit_rate",
    "FitResult",
    "bound_report",
    "BoundReport",
    "build_signal",
    "psi_norm_from_samples",
]

SCHEMA = "ssns-1"

CSV_COLUMNS = (
    "m",
    "eps",
    "trial",
    "seed",
    "err_scaled",
    "err_normalized",
    "lambda",
    "alpha_mc",
    "alpha_bound",
    "width_mean",
    "psi2_a",
    "psi2_y",
    "u",
    "c0",
    "bound_value",
)


@dataclasses.dataclass(frozen=True)
class TrialRow:
    """One recovery trial. All fields except runtime_ms go into the CSV."""

    m: int
    eps: float
    trial: int
    seed: int
    err_scaled: float
    err_normalized: float
    lam: float
    alpha_mc: float
    alpha_bound: float
    width_mean: float
    psi2_a: float
    psi2_y: float
    u: float
    c0: float
    bound_value: float
    runtime_ms: float = 0.0

    def csv_values(self) -> tuple:
        return (
            self.m, self.eps, self.trial, self.seed,
            self.err_scaled, self.err_normalized, self.lam,
            self.alpha_mc, self.alpha_bound, self.width_mean,
            self.psi2_a, self.psi2_y, self.u, self.c0, self.bound_value,
        )


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Validated sweep configuration; see from_dict for the JSON schema."""

    link: dict
    x: dict
    constraint: dict
    m_grid: tuple
    n_trials: int
    base_seed: int
    dist: dict | None = None
    contamination: dict | None = None
    eps_grid: tuple = (0.0,)
    channel: dict = dataclasses.field(default_factory=lambda: {"kind": "exact"})
    u: float = 2.0
    c0: float = 1.0
    n_population: int = 200_000
    width_samples: int = 10_000

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("link", "x", "constraint", "m_grid", "n_trials", "base_seed"):
            if key not in obj:
                raise ConfigError(f"config is missing required key {key!r}")
        has_dist = obj.get("dist") is not None
        has_cont = obj.get("contamination") is not None
        if has_dist == has_cont:
            raise ConfigError("config needs exactly one of 'dist' or 'contamination'")
        m_grid = tuple(int(m) for m in obj["m_grid"])
        if not m_grid or any(m < 1 for m in m_grid):
            raise ConfigError("m_grid must be a nonempty list of positive ints")
        if list(m_grid) != sorted(m_grid):
            raise ConfigError("m_grid must be ascending")
        eps_grid = tuple(float(e) for e in obj.get("eps_grid", [0.0]))
        if has_dist and any(e != 0.0 for e in eps_grid):
            raise ConfigError("a plain 'dist' config cannot sweep eps; use 'contamination'")
        if any(not 0.0 <= e <= 1.0 for e in eps_grid):
            raise ConfigError("eps values must lie in [0, 1]")
        n_trials = int(obj["n_trials"])
        if n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        u = float(obj.get("u", 2.0))
        if u < 2.0:
            raise ConfigError("u must be >= 2")
        cfg = cls(
            link=obj["link"],
            x=obj["x"],
            constraint=obj["constraint"],
            m_grid=m_grid,
            n_trials=n_trials,
            base_seed=int(obj["base_seed"]),
            dist=obj.get("dist"),
            contamination=obj.get("contamination"),
            eps_grid=eps_grid,
            channel=obj.get("channel", {"kind": "exact"}),
            u=u,
            c0=float(obj.get("c0", 1.0)),
            n_population=int(obj.get("n_population", 200_000)),
            width_samples=int(obj.get("width_samples", 10_000)),
        )
        build_signal(cfg.x)
        return cfg

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["m_grid"] = list(self.m_grid)
        out["eps_grid"] = list(self.eps_grid)
        return {k: v for k, v in out.items() if v is not None}


def build_signal(spec: dict) -> np.ndarray:
    """Signal spec -> unit vector.

    ``{"kind": "unit_sparse", "d": ..., "s": ..., "seed": ...}`` puts equal
    magnitudes 1/sqrt(s) with seeded signs on a seeded support;
    ``{"kind": "explicit", "values": [...]}`` is normalized to unit length.
    """
    kind = spec.get("kind")
    if kind == "unit_sparse":
        try:
            d, s, seed = int(spec["d"]), int(spec["s"]), int(spec["seed"])
        except KeyError as missing:
            raise ConfigError(f"unit_sparse signal spec is missing {missing}") from None
        if not 1 <= s <= d:
            raise ConfigError("unit_sparse needs 1 <= s <= d")
        rng = make_rng(derive_seed(seed, "unit_sparse", d, s))
        support = rng.choice(d, size=s, replace=False)
        signs = np.where(rng.random(s) < 0.5, -1.0, 1.0)
        x = np.zeros(d)
        x[support] = signs / math.sqrt(s)
        return x
    if kind == "explicit":
        x = np.asarray(spec.get("values", ()), dtype=float)
        if x.ndim != 1 or x.size == 0 or not np.all(np.isfinite(x)):
            raise ConfigError("explicit signal needs a finite nonempty vector")
        nrm = norm2(x)
        if nrm == 0.0:
            raise ConfigError("explicit signal must be nonzero")
        return x / nrm
    raise ConfigError(f"unknown signal kind {kind!r}")


def psi_norm_from_samples(values, q: float = 2.0, p_max: float = 32.0) -> float:
    """Empirical psi_q norm proxy: max over p of p^{-1/q} (mean |v|^p)^{1/p}.

    High moments are noisy at sample scale, so the p grid is capped (default
    32) rather than matching the population grid.
    """
    v = np.abs(np.asarray(values, dtype=float))
    v = v[v > 0]
    if v.size == 0:
        return 0.0
    logv = np.log(v)
    best = 0.0
    for p in np.geomspace(1.0, p_max, 24):
        # log mean of |v|^p, computed stably through the max
        shift = p * float(np.max(logv))
        log_moment = shift + math.log(float(np.mean(np.exp(p * logv - shift))))
        best = max(best, math.exp(log_moment / p - math.log(p) / q))
    return best


def _law_for_eps(config: ExperimentConfig, eps: float) -> StandardizedDistribution:
    if config.contamination is not None:
        model = ContaminationModel(
            mode=config.contamination["mode"],
            eps=eps,
            contaminant=from_spec(config.contamination["contaminant"]),
        )
        return contaminated_law(model)
    return from_spec(config.dist)


def _constraint_for(config: ExperimentConfig, d: int, lam: float, notes: list) -> ConstraintSet:
    spec = dict(config.constraint)
    variant = spec.get("variant")
    if variant == "sparse":
        return ConstraintSet("sparse", d, s=int(spec["s"]))
    if variant == "full_space":
        return ConstraintSet("full_space", d)
    if variant in ("l1_ball", "l2_ball"):
        if "radius" in spec:
            return ConstraintSet(variant, d, radius=float(spec["radius"]))
        # radius chosen so the scaled truth lambda*x stays feasible; a bench
        # convenience, since lambda is unknown to a practitioner
        if lam <= 0.0:
            notes.append(f"auto radius fell back to 1.0 (lambda={lam:.4g} <= 0)")
            return ConstraintSet(variant, d, radius=1.0)
        x = build_signal(config.x)
        radius = lam * float(np.sum(np.abs(x))) if variant == "l1_ball" else lam
        notes.append(f"auto {variant} radius = {radius!r}")
        return ConstraintSet(variant, d, radius=radius)
    raise ConfigError(f"unknown constraint variant {variant!r}")


def _width_for(config: ExperimentConfig, d: int) -> WidthEstimate:
    seed = derive_seed(config.base_seed, "width")
    if config.constraint.get("variant") == "sparse":
        return width_descent_cone_sparse_proxy(
            d, int(config.constraint["s"]), config.width_samples, seed
        )
    return width_sparse_sphere(d, d, config.width_samples, seed)


def _alpha_bound_for(config, law, link, x, eps, notes) -> float:
    """Best applicable closed-form alpha bound for the cell, or nan."""
    candidates = []
    if config.contamination is not None:
        model = ContaminationModel(
            mode=config.contamination["mode"],
            eps=eps,
            contaminant=from_spec(config.contamination["contaminant"]),
        )
        bounds = contaminated_alpha_bounds(model, link, float(np.max(np.abs(x))))
        for name in ("lipschitz", "c2", "sign"):
            val = getattr(bounds, name)
            if val is not None:
                candidates.append(val)
            elif name in bounds.reasons:
                notes.append(f"{name} bound unavailable: {bounds.reasons[name]}")
    else:
        if link.lipschitz_const is not None:
            try:
                candidates.append(link.lipschitz_const * alpha_bound_lipschitz(law))
            except (PreconditionError, ValueError) as err:
                notes.append(f"lipschitz bound unavailable: {err}")
        if link.second_deriv_bound is not None:
            candidates.append(alpha_bound_c2(law, link))
        if link.is_sign:
            try:
                candidates.append(alpha_bound_sign(law, x))
            except PreconditionError as err:
                notes.append(f"sign bound unavailable: {err}")
    if not candidates:
        notes.append("no closed-form alpha bound applies to this cell")
        return float("nan")
    return min(candidates)


def _cell_population(config: ExperimentConfig, eps: float):
    """Per-eps population context shared by all trials of that eps."""
    notes: list = []
    law = _law_for_eps(config, eps)
    x = build_signal(config.x)
    link = link_from_dict(config.link)
    channel = Channel.from_dict(config.channel)
    model = SensingModel(dist=law, link=link, x=x, channel=channel)
    pop_seed = derive_seed(config.base_seed, "population", eps)
    summary = population_summary(model, config.n_population, pop_seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        psi2_a = psi_norm(law, 2)
    for w in caught:
        notes.append(f"psi2_a: {w.message}")
    y_seed = derive_seed(config.base_seed, "psi2_y", eps)
    sample_ds = generate(model, min(config.n_population, 100_000), y_seed)
    psi2_y = psi_norm_from_samples(sample_ds.y)
    alpha_bound = _alpha_bound_for(config, law, link, x, eps, notes)
    constraint = _constraint_for(config, x.size, summary.lam, notes)
    return {
        "model": model,
        "constraint": constraint,
        "lam": summary.lam,
        "alpha_mc": summary.alpha,
        "alpha_stderr": summary.mc_stderr,
        "alpha_bound": alpha_bound,
        "psi2_a": psi2_a,
        "psi2_y": psi2_y,
        "notes": notes,
    }


def _run_trial(config, cell, m, eps, trial):
    start = time.perf_counter()
    seed = derive_seed(config.base_seed, m, eps, trial)
    dataset = generate(cell["model"], m, seed)
    x_hat = estimate(dataset, cell["constraint"])
    errs = recovery_error(x_hat, cell["model"], cell["lam"])
    width_mean = cell["width"].mean
    bound_value = 2.0 * cell["alpha_mc"] + config.c0 * (
        cell["psi2_a"] ** 2 + cell["psi2_y"] ** 2
    ) * (width_mean + config.u) / math.sqrt(m)
    return TrialRow(
        m=m,
        eps=eps,
        trial=trial,
        seed=seed,
        err_scaled=errs.err_scaled,
        err_normalized=errs.err_normalized,
        lam=cell["lam"],
        alpha_mc=cell["alpha_mc"],
        alpha_bound=cell["alpha_bound"],
        width_mean=width_mean,
        psi2_a=cell["psi2_a"],
        psi2_y=cell["psi2_y"],
        u=config.u,
        c0=config.c0,
        bound_value=bound_value,
        runtime_ms=(time.perf_counter() - start) * 1e3,
    )


def run_sweep(config: ExperimentConfig, threads: int = 1):
    """All trials of the sweep; returns (rows, summary dict).

    Rows come back canonically sorted by (m, eps, trial) and are identical
    for any thread count: every trial's randomness flows from its own
    derived seed, and reductions avoid thread-sensitive BLAS paths.
    """
    x = build_signal(config.x)
    width = _width_for(config, x.size)
    cells = {}
    for eps in config.eps_grid:
        cell = _cell_population(config, eps)
        cell["width"] = width
        cells[eps] = cell

    tasks = [
        (m, eps, trial)
        for m in config.m_grid
        for eps in config.eps_grid
        for trial in range(config.n_trials)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(
                pool.map(lambda t: _run_trial(config, cells[t[1]], *t), tasks)
            )
    else:
        rows = [_run_trial(config, cells[eps], m, eps, trial) for m, eps, trial in tasks]
    rows.sort(key=lambda r: (r.m, r.eps, r.trial))

    gate = min_samples(width)
    cell_summaries = []
    for m in config.m_grid:
        for eps in config.eps_grid:
            sub = [r for r in rows if r.m == m and r.eps == eps]
            errs = np.array([r.err_scaled for r in sub])
            errs_n = np.array([r.err_normalized for r in sub])
            cell_summaries.append(
                {
                    "m": m,
                    "eps": eps,
                    "n_trials": len(sub),
                    "admissible": m >= gate,
                    "min_samples": gate,
                    "mean_err_scaled": float(np.mean(errs)),
                    "q10_err_scaled": float(np.quantile(errs, 0.10)),
                    "q50_err_scaled": float(np.quantile(errs, 0.50)),
                    "q90_err_scaled": float(np.quantile(errs, 0.90)),
                    "mean_err_normalized": float(np.mean(errs_n)),
                    "lambda": cells[eps]["lam"],
                    "alpha_mc": cells[eps]["alpha_mc"],
                    "alpha_bound": cells[eps]["alpha_bound"],
                    "psi2_a": cells[eps]["psi2_a"],
                    "psi2_y": cells[eps]["psi2_y"],
                    "mean_runtime_ms": float(np.mean([r.runtime_ms for r in sub])),
                    "notes": list(cells[eps]["notes"]),
                }
            )
    summary = {
        "schema": SCHEMA,
        "config": config.to_dict(),
        "width": width.to_dict(),
        "cells": cell_summaries,
    }
    return rows, summary


def _format_value(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def rows_to_csv(rows) -> str:
    """Render rows as CSV text; floats use shortest round-trip formatting."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_format_value(v) for v in row.csv_values()))
    return "\n".join(lines) + "\n"


def parse_rows(text: str):
    """Inverse of rows_to_csv (runtime_ms is not persisted, so it reads 0)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split(",") != list(CSV_COLUMNS):
        raise ConfigError("unrecognized CSV header; expected a sweep rows file")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ConfigError(f"malformed CSV line: {ln!r}")
        try:
            rows.append(
                TrialRow(
                    m=int(parts[0]),
                    eps=float(parts[1]),
                    trial=int(parts[2]),
                    seed=int(parts[3]),
                    err_scaled=float(parts[4]),
                    err_normalized=float(parts[5]),
                    lam=float(parts[6]),
                    alpha_mc=float(parts[7]),
                    alpha_bound=float(parts[8]),
                    width_mean=float(parts[9]),
                    psi2_a=float(parts[10]),
                    psi2_y=float(parts[11]),
                    u=float(parts[12]),
                    c0=float(parts[13]),
                    bound_value=float(parts[14]),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"malformed CSV line: {ln!r} ({exc})") from exc
    return rows


@dataclasses.dataclass(frozen=True)
class FitResult:
    group: tuple
    slope: float | None
    n_points: int
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "group": list(self.group),
            "slope": self.slope,
            "n_points": self.n_points,
            "reason": self.reason,
        }


def fit_rate(rows, group_keys=("eps",)):
    """Log-log slope of the alpha-adjusted mean error against m, per group.

    The fitted quantity is mean err_scaled minus twice the best available
    alpha estimate (the closed-form bound when finite, else the Monte Carlo
    value); groups where that residual is not strictly positive at every m
    are skipped with a reason. Needs at least 4 distinct m values.
    """
    groups: dict = {}
    for row in rows:
        key = tuple(getattr(row, k if k != "lambda" else "lam") for k in group_keys)
        groups.setdefault(key, []).append(row)
    results = []
    for key in sorted(groups):
        sub = groups[key]
        ms = sorted({r.m for r in sub})
        if len(ms) < 4:
            raise ValueError(
                f"fit_rate needs >= 4 distinct m values, group {key} has {len(ms)}"
            )
        resid = []
        for m in ms:
            cell = [r for r in sub if r.m == m]
            ab = cell[0].alpha_bound
            amc = cell[0].alpha_mc
            alpha_hat = min(ab, amc) if math.isfinite(ab) else amc
            resid.append(float(np.mean([r.err_scaled for r in cell])) - 2.0 * alpha_hat)
        if min(resid) <= 0.0:
            results.append(
                FitResult(
                    group=key, slope=None, n_points=len(ms),
                    reason="alpha-adjusted residual is nonpositive at some m",
                )
            )
            continue
        slope = float(np.polyfit(np.log(ms), np.log(resid), 1)[0])
        results.append(FitResult(group=key, slope=slope, n_points=len(ms)))
    return results


@dataclasses.dataclass(frozen=True)
class BoundReport:
    """Empirical-vs-bound comparison for one (m, eps) cell."""

    m: int
    eps: float
    n_trials: int
    violations_scaled: int
    violation_fraction: float
    expected_fraction: float
    calibrated_c0: float
    violations_normalized: int | None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def bound_report(rows) -> BoundReport:
    """Check the concentration bound on one cell's rows.

    Counts trials with err_scaled above bound_value (expected fraction at
    most 4 e^{-u}) and reports the minimal c0 that would cover every
    observed trial. The normalized comparison (against 4 alpha / lambda +
    2 c0 (...) / (lambda sqrt(m))) runs only when lambda > 0.
    """
    if not rows:
        raise ValueError("bound_report needs at least one row")
    keys = {(r.m, r.eps) for r in rows}
    if len(keys) != 1:
        raise ValueError(f"bound_report expects rows from a single cell, got {sorted(keys)}")
    m, eps = next(iter(keys))
    r0 = rows[0]
    tail = (r0.psi2_a**2 + r0.psi2_y**2) * (r0.width_mean + r0.u) / math.sqrt(m)
    violations = sum(1 for r in rows if r.err_scaled > r.bound_value)
    needed = [(r.err_scaled - 2.0 * r.alpha_mc) / tail for r in rows]
    calibrated = max(0.0, max(needed))
    if r0.lam > 0.0:
        normalized_bound = (4.0 * r0.alpha_mc + 2.0 * r0.c0 * tail) / r0.lam
        violations_n = sum(1 for r in rows if r.err_normalized > normalized_bound)
    else:
        violations_n = None
    return BoundReport(
        m=m,
        eps=eps,
        n_trials=len(rows),
        violations_scaled=violations,
        violation_fraction=violations / len(rows),
        expected_fraction=min(1.0, 4.0 * math.exp(-r0.u)),
        calibrated_c0=calibrated,
        violations_normalized=violations_n,
    )


def summary_to_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"
