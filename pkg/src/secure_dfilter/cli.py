"""Command-line entry points.

    secure-dfilter analyze  <config.json> [--out DIR]
    secure-dfilter simulate <config.json> [--out DIR] [--seed S] [--runs R] [--workers W]
    secure-dfilter detect   <config.json> [--out DIR] [--seed S] [--runs R] [--workers W]
    secure-dfilter reproduce <figure> --out DIR [--seed S] [--runs R]

Exit codes: 0 success, 1 configuration error, 2 runtime invariant violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, harness
from .detector import convergence_certificate, w_bound
from .errors import (BudgetExceeded, CombinatorialBlowup, ConfigError,
                     DivergentGeometry, GammaBarEmpty, InvariantViolation,
                     NotInGamma, SecureDFilterError, UnknownFigure,
                     UnknownScenario)
from .graph import min_consensus_steps, spectral_params


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secure-dfilter",
        description="Distributed filtering under sparse sensor-observation attacks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("config", help="experiment config JSON")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--runs", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--traces", action="store_true",
                       help="also write traces.csv (states and observed streams)")

    common(sub.add_parser("analyze", help="offline bounds and feasibility report"))
    common(sub.add_parser("simulate", help="Monte Carlo runs of the filter or a baseline"))
    common(sub.add_parser("detect", help="Monte Carlo runs of the filter with detection"))
    repro = sub.add_parser("reproduce", help="emit a benchmark figure-data bundle")
    repro.add_argument("figure", help="fig3 | fig5 | fig6 | fig7 | resilience")
    repro.add_argument("--out", required=True)
    repro.add_argument("--seed", type=int, default=2024)
    repro.add_argument("--runs", type=int, default=100)
    return parser


def _load_config(args) -> harness.ExperimentConfig:
    cfg = harness.config_from_file(args.config)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.runs is not None:
        updates["runs"] = args.runs
    if args.workers is not None:
        updates["workers"] = args.workers
    if getattr(args, "traces", False):
        updates["traces"] = True
    return replace(cfg, **updates) if updates else cfg


def _analyze_report(cfg: harness.ExperimentConfig) -> dict:
    sys_, g = cfg.system, cfg.graph
    s = cfg.scenario.s
    fp = cfg.filter_params
    sp = spectral_params(g)
    lam0 = analysis.lambda0(sys_.C, s)
    feas = analysis.search_feasible_params(sys_, g, s)

    report: dict = {
        "lambda0": lam0,
        "feasible": feas.found_params is not None,
        "witness": None if feas.found_params is None else {
            "beta": feas.found_params[0], "eta0": feas.found_params[1],
            "L": feas.found_params[2]},
        "feasibility_reason": feas.reason,
        "epsilon": feas.epsilon,
        "spectral": {"lambda2": sp.lambda2, "lambda_max": sp.lambda_max,
                     "alpha": sp.alpha, "gamma": sp.gamma,
                     "min_consensus_steps": min_consensus_steps(g, sys_.norm_A)},
        "bounds": {"thm1": {}, "thm3": {}},
    }

    try:
        bparams = analysis.bound_params_for(sys_, g, fp.beta, fp.L, s)
        seq = analysis.rho_sequence(bparams, cfg.horizon)
        inequality = analysis.check_parameter_inequality(bparams)
        thm1 = {"condition_holds": inequality.holds, "condition_slack": inequality.slack,
                "p0": bparams.p0, "q0": bparams.q0,
                "rho_settled": seq.settled, "horizon": seq.horizon}
        if inequality.holds:
            thm1["uniform"] = analysis.bound_uniform(seq, 1)
            thm1["limsup"] = analysis.bound_limsup(seq)
            thm1["realtime_final"] = analysis.bound_realtime(seq, 1, cfg.horizon)
        report["bounds"]["thm1"] = thm1
        vp = analysis.varpi(sys_.A, sys_.C, s)
        thm3 = {"varpi": vp}
        if inequality.holds:
            unsat = analysis.bound_unsaturated(seq, 1, vp)
            thm3["condition_holds"] = unsat.condition_holds
            thm3["limsup"] = unsat.limsup
            if inequality.holds and 1 in seq.gamma_set:
                wb = w_bound(seq, s, min(cfg.horizon - 1, 1))
                report["w_bound_all_detected"] = wb.value
        report["bounds"]["thm3"] = thm3
    except (DivergentGeometry, NotInGamma, GammaBarEmpty, CombinatorialBlowup) as exc:
        report["bounds"]["note"] = str(exc)

    try:
        report["sparse_observability"] = {
            "s": s,
            "s_sparse_observable": analysis.sparse_observable(sys_.A, sys_.C, s),
            "one_step_s_sparse": analysis.one_step_sparse_observable(sys_.C, s),
            "one_step_2s_sparse": analysis.one_step_sparse_observable(sys_.C, 2 * s)
            if 2 * s < sys_.n_sensors else False,
            "lambda0_gt_s_implies_2s": analysis.check_observability_implication(sys_.C, s),
        }
    except CombinatorialBlowup as exc:
        report["sparse_observability"] = {"note": str(exc)}

    report["resilience_curve"] = {
        str(k): v for k, v in analysis.resilience_curve(
            sys_, g, fp.beta, fp.L, range(0, s + 1)).items()
    }

    if cfg.scenario.is_static and cfg.scenario.attacked_set(1):
        cert = convergence_certificate(sys_, g, fp, cfg.scenario.attacked_set(1))
        report["convergence_certificate"] = {
            "spectral_radius": cert.spectral_radius,
            "schur_stable": cert.schur_stable,
        }
    return report


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, frozenset):
        return sorted(value)
    raise TypeError(f"not JSON serializable: {type(value)}")


def _write_report(out_dir: Path, payload: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(
        json.dumps(payload, indent=2, default=_json_default) + "\n")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out_dir = Path(args.out)
    try:
        if args.command == "analyze":
            cfg = _load_config(args)
            report = _analyze_report(cfg)
            _write_report(out_dir, report)
            curve = report["resilience_curve"]
            lines = ["s,f_s"] + [f"{k},{repr(float(v))}" for k, v in curve.items()]
            (out_dir / "resilience_curve.csv").write_text("\n".join(lines) + "\n")
        elif args.command in ("simulate", "detect"):
            cfg = _load_config(args)
            if args.command == "detect":
                cfg = replace(cfg, algorithm="alg2", record_steps=True)
            table = harness.run_experiment(cfg)
            out_dir.mkdir(parents=True, exist_ok=True)
            table.to_csv(out_dir / "metrics.csv")
            if cfg.traces:
                harness.write_traces_csv(cfg, table, out_dir / "traces.csv")
            if args.command == "detect":
                harness.write_detections_csv(cfg, table, out_dir / "detections.csv")
            summary = {
                "algorithm": cfg.algorithm,
                "runs": cfg.runs,
                "horizon": cfg.horizon,
                "seed": cfg.seed,
                "eta_final": float(table.eta[-1]),
                "eta_max": float(table.eta.max()),
                "bound_checks": table.bound_checks,
                "runtime_seconds": table.runtime_seconds,
            }
            if table.detection is not None:
                summary["detection"] = {
                    "all_detected_fraction": table.detection.all_detected_fraction,
                    "mean_detected_final": float(table.detection.mean_d_curve[-1]),
                }
            _write_report(out_dir, summary)
        elif args.command == "reproduce":
            harness.reproduce(args.figure, out_dir, seed=args.seed, runs=args.runs)
    except (ConfigError, UnknownScenario, UnknownFigure, FileNotFoundError, KeyError,
            ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (InvariantViolation, BudgetExceeded) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except SecureDFilterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
