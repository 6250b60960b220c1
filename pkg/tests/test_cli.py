import json
import subprocess
import sys

import numpy as np
import pytest

from seqtomo.cli import main
from seqtomo.config import config_from_dict, default_qubit_config, load_config
from seqtomo.errors import ConfigError
from seqtomo.forward import CorrelationSet
from seqtomo.hilbert import DensityMatrix, random_density_matrix, trace_distance


def write_config(tmp_path, overrides=None, name="config.json"):
    cfg = default_qubit_config(str(tmp_path / "out"))
    cfg.update(overrides or {})
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2))
    return path


def test_roundtrip_default_qubit(tmp_path):
    path = write_config(tmp_path)
    assert main(["roundtrip", "--config", str(path)]) == 0
    report = json.loads((tmp_path / "out" / "reconstruction.json").read_text())
    assert set(report) == {"rho", "trace_distance_to_reference", "flags"}
    assert report["trace_distance_to_reference"] < 1e-9
    assert report["flags"] == []
    corr = CorrelationSet.from_json(
        json.loads((tmp_path / "out" / "correlations.json").read_text())
    )
    rho = DensityMatrix.from_json(report["rho"])
    reference = random_density_matrix(2, seed=7, purity="mixed")
    assert trace_distance(rho, reference) < 1e-9
    assert abs(np.sum(corr.x) - 1.0) < 1e-10


def test_roundtrip_singular_coupling_exits_4(tmp_path):
    path = write_config(tmp_path, {"eps1": 8.0})
    assert main(["roundtrip", "--config", str(path)]) == 4
    error = json.loads((tmp_path / "out" / "error.json").read_text())
    assert error["error"] == "StrongCouplingSingularError"


def test_overlapping_windows_exit_2(tmp_path):
    path = write_config(
        tmp_path,
        {"interaction_windows": {"first": [0.0, 1.0], "second": [0.5, 1.5]}},
    )
    assert main(["roundtrip", "--config", str(path)]) == 2


def test_disjoint_windows_accepted(tmp_path):
    path = write_config(
        tmp_path,
        {"interaction_windows": {"first": [0.0, 0.4], "second": [0.6, 1.0]}},
    )
    assert main(["roundtrip", "--config", str(path)]) == 0


@pytest.mark.parametrize(
    "overrides",
    [
        {"dim": 1},
        {"eps1": -0.5},
        {"trials": 0},
        {"state": {"kind": "unknown"}},
        {"meter1": {"type": "banana"}},
        {"basis_pair": "hadamard"},
        {"surprise": 1},
    ],
)
def test_bad_configs_exit_2(tmp_path, overrides):
    path = write_config(tmp_path, overrides)
    assert main(["roundtrip", "--config", str(path)]) == 2


def test_missing_config_file_exit_2(tmp_path):
    assert main(["roundtrip", "--config", str(tmp_path / "nope.json")]) == 2


def test_oracle_check(tmp_path):
    path = write_config(tmp_path, {"oracle": {"n1": 512}})
    assert main(["oracle-check", "--config", str(path)]) == 0
    report = json.loads((tmp_path / "out" / "oracle_check.json").read_text())
    assert report["oracle_default"]["max_abs_deviation"] < 1e-4
    assert report["oracle_fine"]["max_abs_deviation"] < 1e-4
    assert report["convergence_ok"] is True


def test_oracle_check_rejects_large_dim(tmp_path):
    path = write_config(tmp_path, {"dim": 5, "state": {"kind": "random", "seed": 1, "purity": "mixed"}})
    assert main(["oracle-check", "--config", str(path)]) == 2


def test_oracle_check_grid_safety_exit_3(tmp_path):
    # eps1 = 3 shifts the first meter by 3 > extent/4 = 2.5
    path = write_config(tmp_path, {"eps1": 3.0, "oracle": {"n1": 256}})
    assert main(["oracle-check", "--config", str(path)]) == 3
    error = json.loads((tmp_path / "out" / "error.json").read_text())
    assert error["error"] == "GridSafetyError"


def test_sweep_eps1_with_noise_degrades(tmp_path):
    path = write_config(tmp_path, {"noise_sigma": 1e-5, "trials": 8})
    assert main(
        ["sweep", "--config", str(path), "--param", "eps1", "--values", "0.2,1.0,2.0,3.0"]
    ) == 0
    lines = (tmp_path / "out" / "sweep.csv").read_text().strip().split("\n")
    assert lines[0].startswith("parameter,value,lambda_re")
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 4
    lambdas = [float(r[2]) for r in rows]
    distances = [float(r[6]) for r in rows]
    assert lambdas[0] > lambdas[-1]
    assert distances[-1] > distances[0]
    assert all(r[7] == "noisy;projected" for r in rows)


def test_sweep_noise_sigma_monotone(tmp_path):
    path = write_config(tmp_path, {"trials": 8})
    assert main(
        ["sweep", "--config", str(path), "--param", "noise_sigma", "--values", "1e-8,1e-4,1e-2"]
    ) == 0
    lines = (tmp_path / "out" / "sweep.csv").read_text().strip().split("\n")
    distances = [float(line.split(",")[6]) for line in lines[1:]]
    assert distances[0] < distances[1] < distances[2]


def test_sweep_single_value_matches_roundtrip(tmp_path):
    path = write_config(tmp_path)
    assert main(["roundtrip", "--config", str(path), "--out", str(tmp_path / "rt")]) == 0
    assert main(
        [
            "sweep", "--config", str(path), "--param", "eps1", "--values", "0.5",
            "--out", str(tmp_path / "sw"),
        ]
    ) == 0
    summary = json.loads((tmp_path / "rt" / "summary.json").read_text())
    row = (tmp_path / "sw" / "sweep.csv").read_text().strip().split("\n")[1].split(",")
    assert float(row[6]) == summary["mean_trace_distance"]
    assert float(row[2]) == summary["lambda"][0]


def test_sweep_sigma_p_requires_gaussian(tmp_path):
    grid_meter = {
        "type": "grid",
        "n_points": 64,
        "extent": 16.0,
        "components": [
            {"weight": 1.0, "psi": list(np.exp(-np.linspace(-8, 8, 64, endpoint=False) ** 2))}
        ],
    }
    path = write_config(tmp_path, {"meter1": grid_meter})
    assert main(
        ["sweep", "--config", str(path), "--param", "sigma_p", "--values", "0.5,1.0"]
    ) == 2


def test_sweep_sigma_p(tmp_path):
    path = write_config(tmp_path)
    assert main(
        ["sweep", "--config", str(path), "--param", "sigma_p", "--values", "0.5,1.0,2.0"]
    ) == 0
    lines = (tmp_path / "out" / "sweep.csv").read_text().strip().split("\n")
    lambdas = [float(line.split(",")[2]) for line in lines[1:]]
    # lambda = exp(-eps1^2 sigma_p^2 / 2) falls as sigma_p grows
    assert lambdas[0] > lambdas[1] > lambdas[2]


def test_quasiprob_outputs(tmp_path):
    path = write_config(tmp_path)
    assert main(["quasiprob", "--config", str(path)]) == 0
    data = json.loads((tmp_path / "out" / "quasiprob.json").read_text())
    assert data["dim"] == 2
    assert data["eps1"] == 0.5
    csv_lines = (tmp_path / "out" / "quasiprob.csv").read_text().strip().split("\n")
    assert csv_lines[0] == "mu,k,re,im"
    assert len(csv_lines) == 5


def test_outputs_deterministic(tmp_path):
    path = write_config(tmp_path, {"noise_sigma": 1e-4, "trials": 3})
    assert main(["roundtrip", "--config", str(path), "--out", str(tmp_path / "a")]) == 0
    assert main(["roundtrip", "--config", str(path), "--out", str(tmp_path / "b")]) == 0
    for name in ("correlations.json", "reconstruction.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_override_changes_noise(tmp_path):
    path = write_config(tmp_path, {"noise_sigma": 1e-3})
    assert main(["roundtrip", "--config", str(path), "--out", str(tmp_path / "a")]) == 0
    assert main(
        ["roundtrip", "--config", str(path), "--out", str(tmp_path / "b"), "--seed", "99"]
    ) == 0
    a = json.loads((tmp_path / "a" / "reconstruction.json").read_text())
    b = json.loads((tmp_path / "b" / "reconstruction.json").read_text())
    assert a["rho"] != b["rho"]


def test_explicit_state_and_basis_config(tmp_path):
    rho = random_density_matrix(2, seed=5, purity="mixed")
    hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    overrides = {
        "state": {"kind": "explicit", "elements": rho.to_json()["elements"]},
        "basis_pair": {
            "first": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
            "second": [[[v.real, v.imag] for v in row] for row in hadamard],
        },
    }
    path = write_config(tmp_path, overrides)
    assert main(["roundtrip", "--config", str(path)]) == 0
    report = json.loads((tmp_path / "out" / "reconstruction.json").read_text())
    assert report["trace_distance_to_reference"] < 1e-9


def test_config_loader_validation_helpers(tmp_path):
    cfg = default_qubit_config(str(tmp_path))
    config = config_from_dict(cfg)
    assert config.dim == 2
    with pytest.raises(ConfigError):
        config_from_dict({"dim": 2})
    path = write_config(tmp_path)
    assert load_config(path).eps1 == 0.5


def test_console_entry_point(tmp_path):
    path = write_config(tmp_path)
    result = subprocess.run(
        [sys.executable, "-m", "seqtomo.cli", "roundtrip", "--config", str(path)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "trace distance" in result.stdout
