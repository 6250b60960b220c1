"""Batch experiment runner: configure, simulate, reconstruct, report.

Subcommands:

    roundtrip     forward-simulate the correlations and reconstruct the state
    oracle-check  compare the analytic correlations against the grid oracle
    sweep         repeat the roundtrip over one swept parameter, emit CSV
    quasiprob     dump the quasi-probability table of the configured state

Exit codes: 0 success, 2 config error, 3 numerical or physicality failure,
4 singular-coupling failure.  All outputs are JSON or CSV files in the
output directory, written atomically, and deterministic given the config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    SWEEPABLE_PARAMETERS,
    ExperimentConfig,
    build_basis_pair,
    build_meters,
    build_state,
    load_config,
)
from .errors import (
    ConfigError,
    DegenerateRecoveryError,
    SeqtomoError,
    StrongCouplingSingularError,
)
from .forward import CorrelationSet, correlation_set
from .hilbert import trace_distance
from .meters import GaussianMeter, lambda_response, lambda_tilde
from .oracle import oracle_correlation_set
from .quasiprob import quasiprob_of_state
from .reconstruct import noisy_reconstruct, reconstruct

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_SINGULAR = 4


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, payload: dict):
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _complex_pair(z: complex) -> list:
    return [z.real, z.imag]


def _simulate(config: ExperimentConfig):
    pair = build_basis_pair(config)
    rho = build_state(config)
    meter1, meter2 = build_meters(config)
    corr = correlation_set(rho, pair, meter1, meter2, config.eps1, config.eps2)
    return pair, rho, meter1, meter2, corr


def _reconstruct_with_noise(config: ExperimentConfig, corr: CorrelationSet, pair, rho):
    """Run the reconstruction (noisy trials when configured) and report."""
    flags: list[str] = []
    if config.noise_sigma > 0:
        flags += ["noisy", "projected"]
        distances = []
        first = None
        for trial in range(config.trials):
            rho_hat, _ = noisy_reconstruct(corr, pair, config.noise_sigma, config.seed + trial)
            if first is None:
                first = rho_hat
            distances.append(trace_distance(rho_hat, rho))
        return first, distances, flags
    rho_hat = reconstruct(corr, pair)
    return rho_hat, [trace_distance(rho_hat, rho)], flags


def run_roundtrip(config: ExperimentConfig, out_dir: Path) -> int:
    pair, rho, _, _, corr = _simulate(config)
    rho_hat, distances, flags = _reconstruct_with_noise(config, corr, pair, rho)
    _write_json(out_dir / "correlations.json", corr.to_json())
    _write_json(
        out_dir / "reconstruction.json",
        {
            "rho": rho_hat.to_json(),
            "trace_distance_to_reference": distances[0],
            "flags": flags,
        },
    )
    _write_json(
        out_dir / "summary.json",
        {
            "config": config.to_json(),
            "lambda": _complex_pair(corr.lambda_eps1),
            "lambda_tilde": _complex_pair(corr.lambda_tilde_eps1),
            "trial_trace_distances": distances,
            "mean_trace_distance": float(np.mean(distances)),
            "flags": flags,
        },
    )
    print(f"roundtrip: trace distance to reference = {distances[0]:.3e} (flags: {flags})")
    return EXIT_OK


def run_oracle_check(config: ExperimentConfig, out_dir: Path) -> int:
    if config.dim > 4:
        raise ConfigError("oracle-check supports dim <= 4 (grid cost)")
    pair, rho, meter1, meter2, corr = _simulate(config)
    n1_base = config.oracle.get("n1")
    report = {
        "dim": config.dim,
        "eps1": config.eps1,
        "eps2": config.eps2,
        "analytic": {
            "x": corr.to_json()["x"],
            "y_tilde": corr.to_json()["y_tilde"],
        },
    }
    # A grid meter carries its own grid, so the quadrupled-resolution pass
    # only makes sense for a Gaussian meter 1.
    grids = [("default", n1_base)]
    if isinstance(meter1, GaussianMeter):
        grids.append(("fine", 4 * (n1_base or 1024)))
    deviations = {}
    for label, n1 in grids:
        oracle_corr = oracle_correlation_set(
            rho, pair, meter1, meter2, config.eps1, config.eps2, n1=n1
        )
        deviation = max(
            float(np.max(np.abs(oracle_corr.x - corr.x))),
            float(np.max(np.abs(oracle_corr.y_tilde - corr.y_tilde))),
        )
        deviations[label] = deviation
        report[f"oracle_{label}"] = {
            "n1": n1 if n1 is not None else 1024,
            "x": oracle_corr.to_json()["x"],
            "y_tilde": oracle_corr.to_json()["y_tilde"],
            "max_abs_deviation": deviation,
        }
    if "fine" in deviations:
        # At fine grids both runs can sit at the numerical floor, so
        # shrinkage is only required above it.
        report["convergence_ok"] = bool(
            deviations["fine"] <= deviations["default"] or deviations["fine"] < 1e-9
        )
    else:
        report["convergence_ok"] = None
    _write_json(out_dir / "oracle_check.json", report)
    summary = " ".join(f"{label}={value:.3e}" for label, value in deviations.items())
    print(f"oracle-check: max deviation {summary} convergence_ok={report['convergence_ok']}")
    return EXIT_OK


def _sweep_configs(config: ExperimentConfig, param: str, values: list[float]):
    for value in values:
        if param == "eps1":
            yield value, replace(config, eps1=value)
        elif param == "noise_sigma":
            yield value, replace(config, noise_sigma=value)
        elif param == "sigma_p":
            if config.meter1.get("type") != "gaussian":
                raise ConfigError("sigma_p sweeps require a gaussian meter1")
            yield value, replace(config, meter1={"type": "gaussian", "sigma_p": value})
        else:
            raise ConfigError(
                f"unknown sweep parameter {param!r}; choose from {SWEEPABLE_PARAMETERS}"
            )


def run_sweep(config: ExperimentConfig, param: str, values: list[float], out_dir: Path) -> int:
    rows = []
    for value, point in _sweep_configs(config, param, values):
        pair, rho, _, _, corr = _simulate(point)
        _, distances, flags = _reconstruct_with_noise(point, corr, pair, rho)
        rows.append(
            (
                value,
                corr.lambda_eps1,
                corr.lambda_tilde_eps1,
                float(np.mean(distances)),
                ";".join(flags),
            )
        )
    lines = ["parameter,value,lambda_re,lambda_im,lambda_tilde_re,lambda_tilde_im,trace_distance,flags"]
    for value, lam, lam_t, distance, flags in rows:
        lines.append(
            f"{param},{value!r},{lam.real!r},{lam.imag!r},"
            f"{lam_t.real!r},{lam_t.imag!r},{distance!r},{flags}"
        )
    _write_text(out_dir / "sweep.csv", "\n".join(lines) + "\n")
    print(f"sweep: wrote {len(rows)} rows for parameter {param} to {out_dir / 'sweep.csv'}")
    return EXIT_OK


def run_quasiprob(config: ExperimentConfig, out_dir: Path) -> int:
    pair = build_basis_pair(config)
    rho = build_state(config)
    meter1, _ = build_meters(config)
    lam = lambda_response(meter1, config.eps1)
    table = quasiprob_of_state(rho, pair, lam)
    payload = table.to_json()
    payload["eps1"] = config.eps1
    payload["lambda_tilde"] = _complex_pair(lambda_tilde(meter1, config.eps1))
    _write_json(out_dir / "quasiprob.json", payload)
    _write_text(out_dir / "quasiprob.csv", table.to_csv())
    print(f"quasiprob: wrote table for dim={config.dim} at lambda={lam:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqtomo",
        description="successive-measurement tomography runner",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("roundtrip", "simulate correlations and reconstruct the state"),
        ("oracle-check", "compare analytic correlations against the grid oracle"),
        ("sweep", "roundtrip over a swept parameter, emitting CSV"),
        ("quasiprob", "dump the quasi-probability table of the configured state"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the JSON config")
        cmd.add_argument("--out", default=None, help="output directory (overrides config)")
        cmd.add_argument("--seed", type=int, default=None, help="noise seed (overrides config)")
        if name == "sweep":
            cmd.add_argument(
                "--param", required=True, choices=SWEEPABLE_PARAMETERS,
                help="parameter to sweep",
            )
            cmd.add_argument(
                "--values", required=True,
                help="comma-separated list of parameter values",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out_dir: Path | None = Path(args.out) if args.out is not None else None
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.out is not None:
            config = replace(config, output_dir=args.out)
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "roundtrip":
            return run_roundtrip(config, out_dir)
        if args.command == "oracle-check":
            return run_oracle_check(config, out_dir)
        if args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"sweep values must be numbers: {exc}") from exc
            if not values:
                raise ConfigError("sweep needs at least one value")
            return run_sweep(config, args.param, values, out_dir)
        if args.command == "quasiprob":
            return run_quasiprob(config, out_dir)
        raise ConfigError(f"unknown command {args.command!r}")
    except SeqtomoError as exc:
        code = _exit_code_for(exc)
        _report_failure(out_dir, exc, code)
        return code
    except (AssertionError, ValueError) as exc:
        _report_failure(out_dir, exc, EXIT_NUMERICAL)
        return EXIT_NUMERICAL


def _exit_code_for(exc: SeqtomoError) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (StrongCouplingSingularError, DegenerateRecoveryError)):
        return EXIT_SINGULAR
    return EXIT_NUMERICAL


def _report_failure(out_dir: Path | None, exc: BaseException, code: int):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if out_dir is not None:
        try:
            _write_json(out_dir / "error.json", payload)
        except OSError:
            pass
    print(f"error[{code}] {type(exc).__name__}: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
