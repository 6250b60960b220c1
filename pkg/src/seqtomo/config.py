"""Experiment configuration: one JSON document drives a whole run.

All randomness flows from explicit seeds in the document, so any emitted
file is reproducible from the config alone.  Validation happens up front,
against the same preconditions the modules enforce, so a bad document
fails before any computation starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    ConfigError,
    NonComplementaryPairError,
    PhysicalityError,
    SeqtomoError,
)
from .hilbert import (
    BasisPair,
    DensityMatrix,
    OrthonormalBasis,
    complex_matrix_from_json,
    fourier_pair,
    random_density_matrix,
)
from .meters import Meter, meter_from_config, validate_meter

SWEEPABLE_PARAMETERS = ("eps1", "noise_sigma", "sigma_p")


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int
    basis_pair: object
    state: dict
    meter1: dict
    meter2: dict
    eps1: float
    eps2: float
    noise_sigma: float = 0.0
    trials: int = 1
    seed: int = 0
    output_dir: str = "out"
    interaction_windows: dict | None = None
    oracle: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "dim": self.dim,
            "basis_pair": self.basis_pair,
            "state": self.state,
            "meter1": self.meter1,
            "meter2": self.meter2,
            "eps1": self.eps1,
            "eps2": self.eps2,
            "noise_sigma": self.noise_sigma,
            "trials": self.trials,
            "seed": self.seed,
            "output_dir": self.output_dir,
        }
        if self.interaction_windows is not None:
            out["interaction_windows"] = self.interaction_windows
        if self.oracle:
            out["oracle"] = self.oracle
        return out


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config document must be a JSON object")
    missing = [key for key in ("dim", "basis_pair", "state", "meter1", "meter2", "eps1", "eps2") if key not in raw]
    if missing:
        raise ConfigError(f"config is missing required fields: {', '.join(missing)}")
    known = {
        "dim", "basis_pair", "state", "meter1", "meter2", "eps1", "eps2",
        "noise_sigma", "trials", "seed", "output_dir", "interaction_windows", "oracle",
    }
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"config has unknown fields: {', '.join(unknown)}")
    config = ExperimentConfig(
        dim=raw["dim"],
        basis_pair=raw["basis_pair"],
        state=raw["state"],
        meter1=raw["meter1"],
        meter2=raw["meter2"],
        eps1=raw["eps1"],
        eps2=raw["eps2"],
        noise_sigma=raw.get("noise_sigma", 0.0),
        trials=raw.get("trials", 1),
        seed=raw.get("seed", 0),
        output_dir=raw.get("output_dir", "out"),
        interaction_windows=raw.get("interaction_windows"),
        oracle=raw.get("oracle", {}),
    )
    validate_config(config)
    return config


def validate_config(config: ExperimentConfig):
    """Check every module precondition that is knowable before running."""
    if not isinstance(config.dim, int) or config.dim < 2:
        raise ConfigError("dim must be an integer >= 2")
    if not (isinstance(config.eps1, (int, float)) and config.eps1 > 0):
        raise ConfigError("eps1 must be a positive number")
    if not (isinstance(config.eps2, (int, float)) and config.eps2 > 0):
        raise ConfigError("eps2 must be a positive number")
    if not (isinstance(config.noise_sigma, (int, float)) and config.noise_sigma >= 0):
        raise ConfigError("noise_sigma must be non-negative")
    if not isinstance(config.trials, int) or config.trials < 1:
        raise ConfigError("trials must be an integer >= 1")
    if not isinstance(config.seed, int):
        raise ConfigError("seed must be an integer")
    _validate_windows(config.interaction_windows)
    try:
        build_basis_pair(config)
        build_state(config)
        meter1, meter2 = build_meters(config)
    except (SeqtomoError, ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    for label, meter in (("meter1", meter1), ("meter2", meter2)):
        report = validate_meter(meter)
        if not report.passed:
            raise ConfigError(f"{label} violates the validity conditions: {report.to_json()}")


def _validate_windows(windows: dict | None):
    if windows is None:
        return
    try:
        first = [float(v) for v in windows["first"]]
        second = [float(v) for v in windows["second"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(
            "interaction_windows must hold 'first' and 'second' as [start, end] pairs"
        ) from exc
    if len(first) != 2 or len(second) != 2:
        raise ConfigError("interaction windows must be [start, end] pairs")
    if not (first[0] < first[1] and second[0] < second[1]):
        raise ConfigError("interaction windows must have start < end")
    if first[1] > second[0]:
        raise ConfigError(
            "interaction windows overlap: the first interaction must finish "
            "before the second starts"
        )


def build_basis_pair(config: ExperimentConfig) -> BasisPair:
    spec = config.basis_pair
    if spec == "fourier":
        return fourier_pair(config.dim)
    if isinstance(spec, dict) and "first" in spec and "second" in spec:
        try:
            first = OrthonormalBasis(complex_matrix_from_json(spec["first"]))
            second = OrthonormalBasis(complex_matrix_from_json(spec["second"]))
            pair = BasisPair(first, second, eta=float(spec.get("eta", 1e-8)))
        except (ValueError, NonComplementaryPairError) as exc:
            raise ConfigError(f"explicit basis pair invalid: {exc}") from exc
        if pair.dim != config.dim:
            raise ConfigError("explicit basis pair dimension differs from dim")
        return pair
    raise ConfigError("basis_pair must be 'fourier' or {'first': ..., 'second': ...}")


def build_state(config: ExperimentConfig) -> DensityMatrix:
    spec = config.state
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("state must be an object with a 'kind' field")
    if spec["kind"] == "random":
        purity = spec.get("purity", "mixed")
        if purity not in ("pure", "mixed"):
            raise ConfigError("state purity must be 'pure' or 'mixed'")
        return random_density_matrix(config.dim, int(spec.get("seed", 0)), purity)
    if spec["kind"] == "explicit":
        try:
            rho = DensityMatrix(complex_matrix_from_json(spec["elements"]))
        except (ValueError, PhysicalityError) as exc:
            raise ConfigError(f"explicit state invalid: {exc}") from exc
        if rho.dim != config.dim:
            raise ConfigError("explicit state dimension differs from dim")
        return rho
    raise ConfigError("state kind must be 'random' or 'explicit'")


def build_meters(config: ExperimentConfig) -> tuple[Meter, Meter]:
    meters = []
    for label, block in (("meter1", config.meter1), ("meter2", config.meter2)):
        try:
            meters.append(meter_from_config(block))
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"{label} configuration invalid: {exc}") from exc
    return meters[0], meters[1]


def default_qubit_config(output_dir: str = "out") -> dict:
    """A ready-to-run two-level example document."""
    return {
        "dim": 2,
        "basis_pair": "fourier",
        "state": {"kind": "random", "seed": 7, "purity": "mixed"},
        "meter1": {"type": "gaussian", "sigma_p": 1.0},
        "meter2": {"type": "gaussian", "sigma_p": 1.0},
        "eps1": 0.5,
        "eps2": 1.0,
        "noise_sigma": 0.0,
        "trials": 1,
        "seed": 0,
        "output_dir": output_dir,
    }
