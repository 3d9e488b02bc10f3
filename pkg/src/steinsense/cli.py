"""Command-line entry point: stein-sense <subcommand>.

Subcommands: discrepancy, contaminate, alpha, recover, width, sweep,
report. Inputs come from JSON config files (--config) or a few direct
flags; outputs are JSON on stdout or files under --out. Exit codes: 0 on
success, 2 on configuration problems, 3 when --strict turns a failed
precondition into an error.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

from ._util import ConfigError, PreconditionError, derive_seed
from .bench import (
    ExperimentConfig,
    bound_report,
    fit_rate,
    parse_rows,
    rows_to_csv,
    run_sweep,
    summary_to_json,
    build_signal,
    SCHEMA,
)
from .contamination import ContaminationModel, contaminated_alpha_bounds, contaminated_gamma, contaminated_gamma_bound, contaminated_law
from .distributions import from_spec, make_distribution
from .geometry import min_samples, width_descent_cone_sparse_proxy, width_sparse_sphere
from .link_model import (
    Channel,
    SensingModel,
    alpha_bound_c2,
    alpha_bound_lipschitz,
    alpha_bound_sign,
    link_from_dict,
    population_summary,
)
from .recovery import (
    ConstraintSet,
    estimate,
    generate,
    load_dataset,
    normalize,
    recovery_error,
    save_dataset,
)
from .zero_bias import discrepancy_report

__all__ = ["main"]


def _load_config(path) -> dict:
    if path is None:
        raise ConfigError("this subcommand needs --config FILE")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from None


def _emit(args, obj, filename: str) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if args.out:
        out_dir = pathlib.Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / filename).write_text(text, encoding="utf-8")
        print(out_dir / filename)
    else:
        sys.stdout.write(text)


def _cmd_discrepancy(args) -> int:
    if args.dist:
        dist = make_distribution(args.dist)
    else:
        dist = from_spec(_load_config(args.config)["dist"])
    _emit(args, discrepancy_report(dist).to_dict(), "discrepancy.json")
    return 0


def _cmd_contaminate(args) -> int:
    cfg = _load_config(args.config)
    model = ContaminationModel.from_dict(cfg)
    out = {
        "model": model.to_dict(),
        "gamma": contaminated_gamma(model),
        "gamma_bound": contaminated_gamma_bound(model),
    }
    if "link" in cfg:
        link = link_from_dict(cfg["link"])
        x_infnorm = float(cfg.get("x_infnorm", 0.5))
        if args.strict:
            formulas = [
                name
                for name, ok in (
                    ("lipschitz", link.lipschitz_const is not None),
                    ("c2", link.second_deriv_bound is not None),
                    ("sign", link.is_sign),
                )
                if ok
            ]
            bounds = contaminated_alpha_bounds(model, link, x_infnorm, formulas=formulas)
        else:
            bounds = contaminated_alpha_bounds(model, link, x_infnorm)
        out["alpha_bounds"] = bounds.to_dict()
    _emit(args, out, "contaminate.json")
    return 0


def _build_model(cfg: dict) -> SensingModel:
    if "contamination" in cfg:
        cont = cfg["contamination"]
        law = contaminated_law(
            ContaminationModel(
                mode=cont["mode"],
                eps=float(cont["eps"]),
                contaminant=from_spec(cont["contaminant"]),
            )
        )
    else:
        law = from_spec(cfg["dist"])
    return SensingModel(
        dist=law,
        link=link_from_dict(cfg["link"]),
        x=build_signal(cfg["x"]),
        channel=Channel.from_dict(cfg.get("channel", {"kind": "exact"})),
    )


def _applicable_bounds(model: SensingModel, strict: bool) -> dict:
    out: dict = {}
    link = model.link
    if link.lipschitz_const is not None:
        try:
            out["lipschitz"] = link.lipschitz_const * alpha_bound_lipschitz(model.dist)
        except PreconditionError as err:
            if strict:
                raise
            out["lipschitz"] = None
            out.setdefault("reasons", {})["lipschitz"] = str(err)
    if link.second_deriv_bound is not None:
        out["c2"] = alpha_bound_c2(model.dist, link)
    if link.is_sign:
        try:
            out["sign"] = alpha_bound_sign(model.dist, model.x)
        except PreconditionError as err:
            if strict:
                raise
            out["sign"] = None
            out.setdefault("reasons", {})["sign"] = str(err)
    return out


def _cmd_alpha(args) -> int:
    cfg = _load_config(args.config)
    model = _build_model(cfg)
    n = int(cfg.get("n", 200_000))
    summary = population_summary(model, n, args.seed)
    out = summary.to_dict()
    out["n"] = n
    out["bounds"] = _applicable_bounds(model, args.strict)
    _emit(args, out, "alpha.json")
    return 0


def _cmd_recover(args) -> int:
    cfg = _load_config(args.config)
    model = _build_model(cfg)
    constraint_spec = dict(cfg["constraint"])
    constraint_spec.setdefault("dim", model.dim)
    constraint = ConstraintSet.from_dict(constraint_spec)
    if "load_dataset" in cfg:
        dataset = load_dataset(cfg["load_dataset"])
    else:
        dataset = generate(model, int(cfg["m"]), args.seed)
    if "save_dataset" in cfg:
        save_dataset(cfg["save_dataset"], dataset)
    x_hat = estimate(dataset, constraint)
    lam = population_summary(
        model, int(cfg.get("n_population", 100_000)), derive_seed(args.seed, "population")
    ).lam
    errs = recovery_error(x_hat, model, lam)
    if args.format == "csv":
        lines = ["index,x_hat,x_hat_normalized"]
        unit = normalize(x_hat)
        for i, (a, b) in enumerate(zip(x_hat.tolist(), unit.tolist())):
            lines.append(f"{i},{a!r},{b!r}")
        text = "\n".join(lines) + "\n"
        out_dir = pathlib.Path(args.out or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "recover.csv"
        path.write_text(text, encoding="utf-8")
        print(path)
        return 0
    out = {
        "m": dataset.m,
        "lambda": lam,
        "x_hat": x_hat.tolist(),
        "x_hat_normalized": normalize(x_hat).tolist(),
        "err_scaled": errs.err_scaled,
        "err_normalized": errs.err_normalized,
    }
    _emit(args, out, "recover.json")
    return 0


def _cmd_width(args) -> int:
    if args.config:
        cfg = _load_config(args.config)
        d, s = int(cfg["d"]), int(cfg["s"])
        n = int(cfg.get("n_samples", 10_000))
        proxy = bool(cfg.get("descent_cone_proxy", False))
    else:
        if args.d is None or args.s is None:
            raise ConfigError("width needs --config or both --d and --s")
        d, s, n, proxy = args.d, args.s, args.samples, args.proxy
    fn = width_descent_cone_sparse_proxy if proxy else width_sparse_sphere
    est = fn(d, s, n, args.seed)
    out = est.to_dict()
    out["min_samples"] = min_samples(est)
    _emit(args, out, "width.json")
    return 0


def _cmd_sweep(args) -> int:
    cfg_dict = _load_config(args.config)
    if args.seed is not None:
        cfg_dict["base_seed"] = args.seed
    config = ExperimentConfig.from_dict(cfg_dict)
    rows, summary = run_sweep(config, threads=args.threads)
    out_dir = pathlib.Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    rows_path = out_dir / "rows.csv"
    rows_path.write_text(rows_to_csv(rows), encoding="utf-8")
    (out_dir / "summary.json").write_text(summary_to_json(summary), encoding="utf-8")
    print(f"{rows_path} ({len(rows)} rows)")
    return 0


def _cmd_report(args) -> int:
    if args.rows is None:
        raise ConfigError("report needs --rows FILE (a sweep rows.csv)")
    try:
        text = pathlib.Path(args.rows).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read rows file: {err}") from None
    rows = parse_rows(text)
    cells = sorted({(r.m, r.eps) for r in rows})
    reports = [
        bound_report([r for r in rows if (r.m, r.eps) == cell]).to_dict()
        for cell in cells
    ]
    keys = tuple(args.group_keys.split(",")) if args.group_keys else ("eps",)
    try:
        rates = [fit.to_dict() for fit in fit_rate(rows, keys)]
        rate_error = None
    except ValueError as err:
        rates = []
        rate_error = str(err)
    out = {"schema": SCHEMA, "cells": reports, "rates": rates}
    if rate_error:
        out["rate_error"] = rate_error
    _emit(args, out, "report.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stein-sense",
        description="Recovery experiments for nonlinear sensing with non-gaussian rows",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (default: print to stdout)")
        p.add_argument("--seed", type=int, default=0, help="base seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument(
            "--strict", action="store_true",
            help="turn failed preconditions into exit code 3",
        )

    p = sub.add_parser("discrepancy", help="distance-to-normal report for a law")
    common(p)
    p.add_argument("--dist", help="built-in law name (shortcut for --config)")
    p.set_defaults(fn=_cmd_discrepancy)

    p = sub.add_parser("contaminate", help="contaminated-law gamma and alpha bounds")
    common(p)
    p.set_defaults(fn=_cmd_contaminate)

    p = sub.add_parser("alpha", help="population lambda, v_x, alpha, and bounds")
    common(p)
    p.set_defaults(fn=_cmd_alpha)

    p = sub.add_parser("recover", help="one dataset, one projection estimate")
    common(p)
    p.set_defaults(fn=_cmd_recover)

    p = sub.add_parser("width", help="gaussian mean width of sparse spheres")
    common(p)
    p.add_argument("--d", type=int, help="ambient dimension")
    p.add_argument("--s", type=int, help="sparsity")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--proxy", action="store_true", help="descent-cone proxy (2s-sparse)")
    p.set_defaults(fn=_cmd_width)

    p = sub.add_parser("sweep", help="run a full experiment sweep")
    common(p)
    p.set_defaults(fn=_cmd_sweep, seed=None)

    p = sub.add_parser("report", help="bound violations and rate fits from rows.csv")
    common(p)
    p.add_argument("--rows", help="rows.csv produced by sweep")
    p.add_argument("--group-keys", help="comma-separated TrialRow fields (default eps)")
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except PreconditionError as err:
        print(f"precondition failed: {err}", file=sys.stderr)
        return 3 if getattr(args, "strict", False) else 2
    except (KeyError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
