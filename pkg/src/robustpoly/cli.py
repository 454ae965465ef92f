"""Command-line interface: fit, simulate, sweep, verify-norms, lowerbound.

Configuration comes from an optional JSON file overridden by flags; every
output artifact gets a JSON sidecar echoing the resolved configuration and
seed.  Exit codes: 0 success, 1 numerical failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import lowerbounds as lb
from . import norms_analysis as na
from .lp_core import LpError
from .polynomial import (
    MultiPoly,
    poly_from_json,
    poly_to_json,
    random_poly,
    sub,
    sup_norm,
)
from .regression import (
    FitReport,
    RecoveryConfig,
    RecoveryError,
    chebyshev_sample_size,
    finite_precision_recover,
    median_recover,
    median_recover_with_l1,
    uniform_sample_size,
)
from .sampling import (
    ConstBlowup,
    NoiseModel,
    SampleSet,
    draw_points,
    label_points,
    load_csv,
    round_bits,
    save_csv,
)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2


@dataclass
class RunConfig:
    command: str = ""
    degree: Optional[int] = None
    dim: Optional[int] = None
    eps: float = 0.5
    eta: float = 0.01
    sigma: float = 0.1
    rho: float = 0.0
    dist: str = "chebyshev"
    bits: Optional[int] = None
    variant: str = "plain"
    seed: int = 0
    trials: int = 20
    m: Optional[int] = None
    samples: Optional[int] = None
    samples_grid: Optional[list[int]] = None
    delta: float = 0.1
    outlier_magnitude: Optional[float] = None
    approx_factor: float = 1.5
    experiment: str = "pair"
    count: int = 200
    input: Optional[str] = None
    out: str = "out"
    figures: bool = True
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.degree is None or self.dim is None:
            raise ValueError("--degree and --dim are required")
        if self.dist not in ("uniform", "chebyshev"):
            raise ValueError(f"unknown distribution {self.dist!r}")
        if self.variant not in ("plain", "l1", "fp"):
            raise ValueError(f"unknown variant {self.variant!r}")


_VARIANT_MAP = {"plain": "plain", "l1": "with_l1", "fp": "finite_precision"}


def _recovery_config(cfg: RunConfig) -> RecoveryConfig:
    return RecoveryConfig(
        d=cfg.degree,
        n=cfg.dim,
        eps=cfg.eps,
        eta=cfg.eta,
        rho=cfg.rho,
        m_override=cfg.m,
        variant=_VARIANT_MAP[cfg.variant],
        precision_bits=cfg.bits,
    )


def _recover(sample: SampleSet, cfg: RunConfig) -> FitReport:
    rc = _recovery_config(cfg)
    if rc.variant == "with_l1":
        return median_recover_with_l1(sample, rc)
    if rc.variant == "finite_precision":
        return finite_precision_recover(sample, rc)
    return median_recover(sample, rc)


def _echo_config(cfg: RunConfig, path: Path) -> None:
    payload = asdict(cfg)
    path.with_suffix(path.suffix + ".config.json").write_text(json.dumps(payload, indent=2))


def _report_json(report: FitReport, cfg: RunConfig) -> str:
    return json.dumps(
        {
            "p_hat": json.loads(poly_to_json(report.p_hat)),
            "errors": report.errors,
            "iterations": report.iterations,
            "m": report.m,
            "cells_skipped": report.cells_skipped,
            "lp_stats": report.lp_stats,
            "seconds": report.seconds,
            "cap_hit": report.cap_hit,
            "samples_used": report.samples_used,
            "config": asdict(cfg),
        },
        indent=2,
    )


def _write_error_trace(report: FitReport, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "sup_error"])
        for t, e in enumerate(report.errors):
            w.writerow([t, f"{e:.12g}"])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_fit(cfg: RunConfig) -> int:
    if not cfg.input:
        print(json.dumps({"error": "fit requires --input CSV"}), file=sys.stderr)
        return EXIT_INPUT
    try:
        sample = load_csv(cfg.input)
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    if sample.n != cfg.dim:
        print(
            json.dumps({"error": f"CSV has {sample.n} coordinates, --dim is {cfg.dim}"}),
            file=sys.stderr,
        )
        return EXIT_INPUT
    report = _recover(sample, cfg)
    out = Path(cfg.out)
    out.with_suffix(".poly.json").write_text(poly_to_json(report.p_hat))
    out.with_suffix(".report.json").write_text(_report_json(report, cfg))
    if report.errors:
        _write_error_trace(report, out.with_suffix(".trace.csv"))
    print(f"fit: wrote {out.with_suffix('.poly.json')} and {out.with_suffix('.report.json')}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    target = random_poly(cfg.dim, cfg.degree, rng)
    M = cfg.samples or chebyshev_sample_size(
        cfg.m or RecoveryConfig(d=cfg.degree, n=cfg.dim, eps=cfg.eps).grid_size(),
        cfg.dim,
        cfg.rho,
        cfg.delta,
    )
    pts = draw_points(cfg.dist, M, cfg.dim, rng)
    model = NoiseModel(
        sigma=cfg.sigma,
        rho=cfg.rho,
        adversary=ConstBlowup(cfg.outlier_magnitude) if cfg.outlier_magnitude else ConstBlowup.for_poly(target),
        precision_bits=cfg.bits,
    )
    sample = label_points(pts, target, model, rng)
    if cfg.bits is not None:
        sample = round_bits(sample, cfg.bits)
    out = Path(cfg.out)
    save_csv(sample, out)
    out.with_suffix(out.suffix + ".truth.json").write_text(poly_to_json(target))
    _echo_config(cfg, out)
    print(f"simulate: wrote {M} samples to {out}")
    return EXIT_OK


def _sample_grid(cfg: RunConfig) -> list[int]:
    if cfg.samples_grid:
        return cfg.samples_grid
    m = cfg.m or _recovery_config(cfg).grid_size()
    size = chebyshev_sample_size if cfg.dist == "chebyshev" else uniform_sample_size
    base = size(m, cfg.dim, cfg.rho, cfg.delta)
    return [max(10, base // 4), max(10, base // 2), base]


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.trials < 1:
        print(json.dumps({"error": "trials must be >= 1"}), file=sys.stderr)
        return EXIT_INPUT
    grid = _sample_grid(cfg)
    target_bound = (2.0 + cfg.eps) * cfg.sigma + cfg.eta
    rows = []
    root = np.random.SeedSequence(cfg.seed)
    for M in grid:
        successes = 0
        errs = []
        for ss in root.spawn(cfg.trials):
            rng = np.random.default_rng(ss)
            target = random_poly(cfg.dim, cfg.degree, rng)
            pts = draw_points(cfg.dist, M, cfg.dim, rng)
            model = NoiseModel(sigma=cfg.sigma, rho=cfg.rho, adversary=ConstBlowup.for_poly(target))
            sample = label_points(pts, target, model, rng)
            try:
                report = _recover(sample, cfg)
            except (RecoveryError, LpError):
                errs.append(float("inf"))
                continue
            err = sup_norm(sub(target, report.p_hat))
            errs.append(err)
            if err <= target_bound:
                successes += 1
        rate = successes / cfg.trials
        se = math.sqrt(max(rate * (1 - rate), 0.0) / cfg.trials)
        finite = [e for e in errs if math.isfinite(e)]
        rows.append(
            {
                "M": M,
                "success_rate": rate,
                "mean_error": sum(finite) / len(finite) if finite else float("nan"),
                "ci_low": max(0.0, rate - 1.96 * se),
                "ci_high": min(1.0, rate + 1.96 * se),
            }
        )
        print(f"sweep: M={M} success_rate={rate:.3f}")
    out = Path(cfg.out)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["M", "success_rate", "mean_error", "ci_low", "ci_high"])
        for r in rows:
            w.writerow(
                [r["M"], f"{r['success_rate']:.6g}", f"{r['mean_error']:.6g}",
                 f"{r['ci_low']:.6g}", f"{r['ci_high']:.6g}"]
            )
    _echo_config(cfg, out)
    if cfg.figures:
        from .plotting import plot_sweep

        fig = plot_sweep(rows, f"recovery sweep (d={cfg.degree}, n={cfg.dim}, {cfg.dist})",
                         out.with_suffix(".png"))
        print(f"sweep: wrote {out} and {fig}")
    else:
        print(f"sweep: wrote {out}")
    return EXIT_OK


def cmd_verify_norms(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    checks: list[tuple[str, bool, str]] = []

    reports = na.sandwich_sweep(cfg.count, max_d=5, max_n=3, seed=cfg.seed)
    n_fail = sum(not r.passed for r in reports)
    checks.append(("sandwich_random", n_fail == 0, f"{len(reports) - n_fail}/{len(reports)} pass"))
    na.write_sandwich_csv(reports, out.with_suffix(".sandwich.csv"))

    tight_rows = []
    ok_tight = True
    for d in (3, 5, 7):
        for n in (1, 2):
            p, exact = na.tightness_family(d, n)
            rep = na.check_sandwich(p, descriptor=f"tightness(d={d}, n={n})")
            rel = abs(rep.ratio - exact) / exact
            ok = rel <= 1e-5 and rep.passed
            ok_tight &= ok
            tight_rows.append((d, n, rep.ratio, exact, rel))
    checks.append(("tightness_family", ok_tight, "ratios match ((m+1)(m+2)/2)^n"))
    with open(out.with_suffix(".tightness.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "n", "ratio", "exact", "rel_err"])
        for row in tight_rows:
            w.writerow([row[0], row[1], f"{row[2]:.12g}", f"{row[3]:.12g}", f"{row[4]:.3g}"])

    from .polynomial import chebyshev_t

    windows_ok = all(
        na.check_univariate_window(chebyshev_t(d))["holds"] for d in (1, 2, 4, 6, 8)
    )
    checks.append(("univariate_window", windows_ok, "T_d family"))

    rng = np.random.default_rng(cfg.seed + 1)
    grad_ok = True
    from .polynomial import eval_grid, partial_derivative

    for _ in range(25):
        d = int(rng.integers(1, 6))
        n = int(rng.integers(1, 4))
        p = random_poly(n, d, rng)
        ax = np.linspace(-1, 1, 41)
        g2 = sum(eval_grid(partial_derivative(p, i), [ax] * n) ** 2 for i in range(n))
        grad_ok &= bool(np.sqrt(g2.max()) <= 2 * d * d * sup_norm(p) * (1 + 1e-6))
    checks.append(("gradient_bound", grad_ok, "||grad p|| <= 2 d^2 ||p||"))

    all_ok = all(ok for _, ok, _ in checks)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name:>20}  {detail}")
    _echo_config(cfg, out)
    if cfg.figures:
        from .plotting import plot_sandwich

        fig = plot_sandwich(reports, out.with_suffix(".png"))
        print(f"verify-norms: wrote {out.with_suffix('.sandwich.csv')} and {fig}")
    else:
        print(f"verify-norms: wrote {out.with_suffix('.sandwich.csv')}")
    return EXIT_OK if all_ok else EXIT_NUMERICAL


def _default_estimator(cfg: RunConfig):
    def estimate(sample: SampleSet) -> MultiPoly:
        rc = RecoveryConfig(
            d=cfg.degree, n=cfg.dim, eps=cfg.eps, eta=max(cfg.eta, 1e-3),
            m_override=cfg.m or (cfg.degree + 1), max_iters=8,
        )
        try:
            return median_recover(sample, rc).p_hat
        except (RecoveryError, LpError):
            return MultiPoly.zero(cfg.dim, cfg.degree)

    return estimate


def cmd_lowerbound(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    rows = []
    if cfg.experiment == "pair":
        pair = lb.build_uniform_adversary(cfg.degree, cfg.dim, cfg.approx_factor)
        alpha = 4.0 * math.sqrt(cfg.approx_factor)
        m_theory = int((1.0 / 3.0) * (2.0 * cfg.degree**2 / alpha) ** cfg.dim)
        grid = cfg.samples_grid or sorted({max(0, m_theory - 1), max(1, m_theory // 2), 2 * m_theory})
        estimator = _default_estimator(cfg)
        for M in grid:
            res = lb.run_indistinguishability_experiment(pair, M, cfg.trials, estimator, seed=cfg.seed)
            rows.append((M, res))
            print(f"lowerbound pair: M={M} failure_rate={res.failure_rate:.3f} "
                  f"all_avoid={res.all_avoid_rate:.3f}")
    elif cfg.experiment == "linear":
        grid = cfg.samples_grid or [5, 10, 20, 40]
        for M in grid:
            res = lb.run_linear_lb_experiment(
                cfg.dim, cfg.sigma, cfg.approx_factor, M, cfg.trials, seed=cfg.seed
            )
            rows.append((M, res))
            print(f"lowerbound linear: M={M} all_bad={res.extra['all_bad_rate']:.3f} "
                  f"bound={res.extra['hoeffding_bound']:.3f}")
    else:
        print(json.dumps({"error": f"unknown experiment {cfg.experiment!r}"}), file=sys.stderr)
        return EXIT_INPUT
    lb.write_failure_csv(rows, out)
    _echo_config(cfg, out)
    if cfg.figures:
        from .plotting import plot_failure_rates

        fig = plot_failure_rates(rows, f"lower-bound experiment ({cfg.experiment})",
                                 out.with_suffix(".png"))
        print(f"lowerbound: wrote {out} and {fig}")
    else:
        print(f"lowerbound: wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="robustpoly",
        description="Robust multivariate polynomial regression toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with defaults for any flag")
        p.add_argument("--degree", type=int, help="individual degree d")
        p.add_argument("--dim", type=int, help="number of variables n")
        p.add_argument("--eps", type=float)
        p.add_argument("--eta", type=float)
        p.add_argument("--sigma", type=float)
        p.add_argument("--rho", type=float)
        p.add_argument("--dist", choices=["uniform", "chebyshev"])
        p.add_argument("--bits", type=int, help="precision bits N")
        p.add_argument("--variant", choices=["plain", "l1", "fp"])
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--m", type=int, help="grid cells per axis override")
        p.add_argument("--samples", type=int, help="sample count M")
        p.add_argument("--samples-grid", help="comma-separated M values")
        p.add_argument("--delta", type=float)
        p.add_argument("--out")
        p.add_argument("--no-figures", action="store_true")

    p_fit = sub.add_parser("fit", help="recover a polynomial from a sample CSV")
    common(p_fit)
    p_fit.add_argument("--input", help="sample CSV path")

    p_sim = sub.add_parser("simulate", help="generate a noisy sample CSV")
    common(p_sim)
    p_sim.add_argument("--outlier-magnitude", type=float)

    common(sub.add_parser("sweep", help="success-rate sweep over sample counts"))

    p_vn = sub.add_parser("verify-norms", help="run the norm-comparison checks")
    common(p_vn)
    p_vn.add_argument("--count", type=int, help="random polynomials to test")

    p_lb = sub.add_parser("lowerbound", help="indistinguishability experiments")
    common(p_lb)
    p_lb.add_argument("--experiment", choices=["pair", "linear"])
    p_lb.add_argument("--approx-factor", type=float)
    return ap


def _merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        for key, val in loaded.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key {key!r}")
            setattr(cfg, key, val)
    for key, val in vars(args).items():
        if key in ("config", "no_figures") or val is None:
            continue
        name = key.replace("-", "_")
        if name == "samples_grid" and isinstance(val, str):
            val = [int(v) for v in val.split(",") if v]
        if hasattr(cfg, name):
            setattr(cfg, name, val)
    if getattr(args, "no_figures", False):
        cfg.figures = False
    return cfg


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _merge_config(args)
        cfg.validate()
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    handlers = {
        "fit": cmd_fit,
        "simulate": cmd_simulate,
        "sweep": cmd_sweep,
        "verify-norms": cmd_verify_norms,
        "lowerbound": cmd_lowerbound,
    }
    try:
        return handlers[cfg.command](cfg)
    except (RecoveryError, LpError) as exc:
        print(json.dumps({"error": str(exc), "kind": "numerical"}), file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": str(exc), "kind": "input"}), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
