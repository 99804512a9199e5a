"""
irsa_toolkit.py
---------------
Entry point for the IRSA / K-MPR design and evaluation toolkit.

Lifecycle
---------
1.  Parse the command and flags, or read them from a `--manifest` JSON file
    (flags given on the command line override manifest values).
2.  Validate the parameters against the command's schema; nothing is
    computed before validation passes.
3.  Run the command:
      a. design      - a* search, truncated-exponential distribution, load bound, DE threshold (JSON)
      b. threshold   - bisected load threshold with its certificate (JSON)
      c. plr-curve   - Monte Carlo PLR over a list of loads (CSV)
      d. simulate    - Monte Carlo PLR at one load (CSV)
      e. energy      - energy / efficiency sweep over L with L* marked (CSV)
      f. table1      - ladder values dA_L / |dB_L| against the published ones (CSV)
      g. stop-curve  - approximated vs exact stop function (CSV)
4.  Write the result to `--out` (relative paths land in IRSA_OUTPUT_DIR)
    or to stdout.

Exit codes
----------
0 success, 2 invalid parameters, 3 file I/O, 4 numerical non-convergence,
1 anything unexpected.
"""

from __future__ import annotations

# std modules
import argparse
import sys
from pathlib import Path
from typing import Any, Mapping, Sequence

from dotenv import load_dotenv

# Setup path and load environment
sys.path.append(str(Path(__file__).parent.resolve()))
sys.path.append(str(Path(__file__).parent.parent.resolve()))
load_dotenv(Path(__file__).parent.parent / ".env", override=True)

# universal imports
from utils.config import logger

# local imports
from config import Config, load_var
from degree_dist import DegreeDistribution, load_distribution, mean_degree, to_json_obj
from density_evolution import (
    EvolutionParams,
    certify_no_fixed_point,
    largest_root,
    threshold_report,
)
from design import SearchConfig, design_outcome, find_a_star, build_theorem1_dist, stop_curve
from energy import PowerModel, delta_ratio, energy_sweep, table1_report
from errors import IrsaError
from manifest import COMMANDS, ExperimentManifest, build_manifest, read_manifest_file
from result_writer import emit, render_csv, render_json
from sic_sim import SimConfig, SimReport, plr_curve

# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

# flag dest -> manifest parameter name
FLAG_PARAMS = (
    "k", "eps", "l", "dist", "loads", "load", "users", "trials", "threads",
    "ptx", "pc", "noise", "g_tol", "l_max", "a_star", "points",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsa_toolkit",
        description="Design and evaluate IRSA transmission distributions under K-packet MPR.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    parser.add_argument("--manifest", type=Path, help="experiment manifest JSON")

    parser.add_argument("--k", help="MPR capability K")
    parser.add_argument("--eps", help="target precision of the a* search")
    parser.add_argument("--l", help="maximum repetition rate L")
    parser.add_argument("--a-star", dest="a_star", help="exponential parameter a*")
    parser.add_argument("--dist", help="distribution JSON file")
    parser.add_argument("--g-tol", dest="g_tol", help="threshold bisection tolerance")

    parser.add_argument("--loads", help="comma-separated loads G")
    parser.add_argument("--load", help="single load G")
    parser.add_argument("--users", help="users per frame M")
    parser.add_argument("--trials", help="frames per load point")
    parser.add_argument("--threads", help="worker processes for the Monte Carlo trials (never changes results)")
    parser.add_argument("--seed", help="64-bit seed")

    parser.add_argument("--ptx", help="transmit power per slot (W)")
    parser.add_argument("--pc", help="circuit power per slot (W)")
    parser.add_argument("--noise", help="noise power sigma^2 (W)")
    parser.add_argument("--l-max", dest="l_max", help="largest L in sweeps")
    parser.add_argument("--points", help="rows of the stop-curve table")

    parser.add_argument("--out", type=Path, help="output file (stdout when absent)")
    return parser


def resolve_manifest(args: argparse.Namespace, config: Config) -> ExperimentManifest:
    flags = {name: getattr(args, name) for name in FLAG_PARAMS if getattr(args, name) is not None}

    if args.manifest is None:
        return build_manifest(args.command, flags, args.out, args.seed, config)

    raw = read_manifest_file(args.manifest)
    command = raw["command"]
    if args.command is not None and args.command != command:
        logger.warning(f"Command '{args.command}' overrides manifest command '{command}'")
        command = args.command

    return build_manifest(
        command,
        {**raw["parameters"], **flags},
        args.out if args.out is not None else raw["output_path"],
        args.seed if args.seed is not None else raw["seed"],
        config,
    )


def output_target(manifest: ExperimentManifest, config: Config) -> Path | None:
    if manifest.output_path is None or manifest.output_path.is_absolute():
        return manifest.output_path
    return config.output_dir / manifest.output_path


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _source_distribution(params: Mapping[str, Any], config: Config) -> DegreeDistribution:
    path = params.get("dist")
    if path is not None:
        # bare names fall back to the bundled distributions
        if not path.is_absolute() and not path.exists():
            path = config.distributions_dir / path
        return load_distribution(path)
    return build_theorem1_dist(params["a_star"], params["l"])


def cmd_design(params: Mapping[str, Any], config: Config) -> str:
    mpr = params["k"]
    search = SearchConfig(
        epsilon_init=max(config.epsilon_init, params["eps"]),
        epsilon_target=params["eps"],
        mpr=mpr,
        scan_points=config.scan_points,
        scan_upper=config.p_scan_upper,
        refine_steps=config.refine_steps,
        fd_step=config.fd_step,
    )
    a_star = find_a_star(search)
    outcome = design_outcome(a_star, params["l"])
    report = threshold_report(
        outcome.dist, mpr, params["g_tol"],
        g_lo=config.g_lo,
        steps=config.bisection_steps,
        max_iters=config.de_max_iters,
        tol=config.de_tol,
        decode_tolerance=config.decode_tolerance,
    )
    return render_json({
        "command":      "design",
        "k":            mpr,
        "eps":          params["eps"],
        "l":            outcome.truncation,
        "a_star":       outcome.a_star,
        "distribution": to_json_obj(outcome.dist),
        "load_bound":   outcome.load_bound,
        "mean_degree":  mean_degree(outcome.dist),
        "de_threshold": report.g_star,
    })


def cmd_threshold(params: Mapping[str, Any], config: Config) -> str:
    dist = _source_distribution(params, config)
    mpr = params["k"]
    g_tol = params["g_tol"]
    report = threshold_report(
        dist, mpr, g_tol,
        g_lo=config.g_lo,
        steps=config.bisection_steps,
        max_iters=config.de_max_iters,
        tol=config.de_tol,
        decode_tolerance=config.decode_tolerance,
    )
    certified_load = max(report.g_star - g_tol, config.g_lo)
    certificate = certify_no_fixed_point(
        EvolutionParams(load=certified_load, mpr=mpr, dist=dist),
        points=config.scan_points,
        refine_steps=config.refine_steps,
    )
    if not certificate.certified:
        logger.warning(
            f"Grid certificate failed at G={certified_load:.6f}: "
            f"min residual {certificate.min_residual:.3e} at p={certificate.argmin_p:.4f}"
        )

    return render_json({
        "command":      "threshold",
        "k":            mpr,
        "g_tol":        g_tol,
        "distribution": to_json_obj(dist),
        "g_star":       report.g_star,
        "bracket":      [report.g_lo, report.g_hi],
        "bisection_steps": report.steps,
        "certificate": {
            "load":         certified_load,
            "min_residual": certificate.min_residual,
            "argmin_p":     certificate.argmin_p,
            "roots":        list(certificate.roots),
            "certified":    certificate.certified,
        },
        "below": {
            "p_star":     report.below.p_star,
            "iterations": report.below.iterations,
            "converged":  report.below.converged,
        },
        "above": {
            "p_star":     report.above.p_star,
            "plr":        report.above.plr,
            "iterations": report.above.iterations,
            "converged":  report.above.converged,
        },
    })


PLR_HEADER = ("G", "realized_G", "plr", "ci_low", "ci_high", "throughput",
              "trials", "M", "K", "seed", "plr_theory")


def _plr_rows(reports: Sequence[SimReport], dist: DegreeDistribution, config: Config) -> list[tuple]:
    rows = []
    for r in reports:
        theory = largest_root(
            EvolutionParams(load=r.load, mpr=r.mpr, dist=dist),
            config.de_max_iters, config.de_tol, config.decode_tolerance,
        )
        rows.append((
            r.load, r.realized_load, r.plr_estimate, r.plr_ci_low, r.plr_ci_high,
            r.throughput, r.trials, r.num_users, r.mpr, r.seed, theory.plr,
        ))
    return rows


def _simulate(params: Mapping[str, Any], loads: Sequence[float], seed: int, config: Config) -> str:
    dist = _source_distribution(params, config)
    template = SimConfig(
        dist=dist,
        mpr=params["k"],
        num_users=params["users"],
        load=min(loads),
        trials=params["trials"],
        seed=seed,
    )
    reports = plr_curve(template, loads, threads=params["threads"])
    return render_csv(PLR_HEADER, _plr_rows(reports, dist, config))


def cmd_plr_curve(params: Mapping[str, Any], seed: int, config: Config) -> str:
    return _simulate(params, params["loads"], seed, config)


def cmd_simulate(params: Mapping[str, Any], seed: int, config: Config) -> str:
    return _simulate(params, [params["load"]], seed, config)


def cmd_energy(params: Mapping[str, Any], config: Config) -> str:
    model = PowerModel(
        p_tx=params["ptx"],
        p_c=params["pc"],
        noise_power=params["noise"],
        num_users=params["users"],
    )
    sweep = energy_sweep(model, params["a_star"], params["l_max"])
    logger.info(f"L* = {sweep.choice.l_star} for M*P_c/P_tx = {model.ratio:.4g}")
    rows = [
        (
            p.truncation, p.coeff_a, p.coeff_b, p.consumption, p.efficiency,
            delta_ratio(p.truncation, params["a_star"]),
            p.truncation == sweep.choice.l_star,
        )
        for p in sweep.profiles
    ]
    return render_csv(("L", "A", "B", "E", "Gamma", "ratio", "is_optimal"), rows)


def cmd_table1(params: Mapping[str, Any], config: Config) -> str:
    rows = [
        (row.truncation, row.ratio, row.published, row.relative_delta)
        for row in table1_report(params["a_star"], params["l_max"])
    ]
    return render_csv(("L", "ratio", "published", "relative_delta"), rows)


def cmd_stop_curve(params: Mapping[str, Any], config: Config) -> str:
    curve = stop_curve(params["a_star"], params["l"], points=params["points"])
    return render_csv(("p", "tilde_f", "f"), zip(curve.p, curve.tilde_f, curve.f))


def run_command(manifest: ExperimentManifest, config: Config) -> str:
    params = manifest.parameters
    logger.info(f"Running {manifest.command} with {dict(params)} (seed {manifest.seed})")

    handlers = {
        "design":     lambda: cmd_design(params, config),
        "threshold":  lambda: cmd_threshold(params, config),
        "plr-curve":  lambda: cmd_plr_curve(params, manifest.seed, config),
        "simulate":   lambda: cmd_simulate(params, manifest.seed, config),
        "energy":     lambda: cmd_energy(params, config),
        "table1":     lambda: cmd_table1(params, config),
        "stop-curve": lambda: cmd_stop_curve(params, config),
    }
    return handlers[manifest.command]()


# ---------------------------------------------------------------------------
# Main
# ---------------------------------------------------------------------------

def main(argv: Sequence[str] | None = None, config: Config | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    config = config or load_var()
    try:
        manifest = resolve_manifest(args, config)
        text = run_command(manifest, config)
        emit(text, output_target(manifest, config))
    except IrsaError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception:
        logger.exception("Unexpected error in IRSA toolkit")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
