import numpy as np
import pytest

from seqtomo.errors import GridSafetyError, InvalidMeterError
from seqtomo.meters import (
    GaussianMeter,
    GridMeter,
    MeterResponse,
    g_function,
    gaussian_grid_meter,
    h_function,
    lambda_response,
    lambda_tilde,
    meter_from_config,
    meter_response,
    meter_to_config,
    validate_meter,
)

from conftest import (
    asymmetric_meter,
    centered_grid,
    double_hump_meter,
    even_odd_mixture_meter,
    quad_g_gaussian,
    quad_h_gaussian,
    skewed_momentum_meter,
)


def grid_meter_zoo():
    return [
        gaussian_grid_meter(1.0),
        gaussian_grid_meter(0.5),
        double_hump_meter(),
        even_odd_mixture_meter(),
        skewed_momentum_meter(),
    ]


def test_gaussian_g_closed_form_and_quadrature():
    meter = GaussianMeter(1.0)
    assert g_function(meter, 0.0) == 1.0
    # frozen from the quadrature oracle; equals exp(-1/2)
    assert abs(g_function(meter, 1.0) - 0.6065306597126334) < 1e-12
    for beta in np.linspace(-3, 3, 13):
        assert abs(g_function(meter, beta) - quad_g_gaussian(1.0, beta)) < 1e-10


def test_gaussian_h_vanishes():
    meter = GaussianMeter(1.0)
    assert h_function(meter, 0.7) == 0
    assert abs(quad_h_gaussian(1.0, 0.7)) < 1e-12


@pytest.mark.parametrize("meter", grid_meter_zoo())
def test_g_conjugate_symmetry(meter):
    for beta in (0.4, 1.3, 2.2):
        assert abs(np.conj(g_function(meter, beta)) - g_function(meter, -beta)) < 1e-12


@pytest.mark.parametrize("meter", grid_meter_zoo())
def test_h_antisymmetry_and_zero(meter):
    assert h_function(meter, 0.0) == 0
    for beta in (0.5, 1.7):
        assert abs(np.conj(h_function(meter, beta)) + h_function(meter, -beta)) < 1e-12


@pytest.mark.parametrize("meter", grid_meter_zoo() + [GaussianMeter(0.8)])
def test_lambda_is_g_plus_2h(meter):
    for beta in (0.0, 0.6, -1.4):
        lam = lambda_response(meter, beta)
        assert abs(lam - (g_function(meter, beta) + 2 * h_function(meter, beta))) < 1e-14


@pytest.mark.parametrize("meter", grid_meter_zoo() + [GaussianMeter(1.0)])
def test_responses_at_zero(meter):
    resp = meter_response(meter, 0.0)
    assert abs(resp.g - 1) < 1e-12
    assert abs(resp.h) < 1e-12
    assert abs(resp.lam - 1) < 1e-12
    assert abs(resp.lam_tilde - 1) < 1e-12


def test_gaussian_lambda_tilde_equals_lambda():
    meter = GaussianMeter(1.0)
    for beta in np.linspace(-3, 3, 13):
        expected = np.exp(-0.5 * beta**2)
        assert abs(lambda_response(meter, beta) - expected) < 1e-12
        assert abs(lambda_tilde(meter, beta) - expected) < 1e-12
        assert abs(lambda_response(meter, beta) - quad_g_gaussian(1.0, beta)) < 1e-10


def test_grid_gaussian_matches_closed_form():
    closed = GaussianMeter(1.0)
    # Minimum grid from the module contract; stay inside the wrap-around
    # safety margin (the box edge is what limits accuracy at extent/4).
    grid = gaussian_grid_meter(1.0, n_points=512, extent_sigmas=16)
    for beta in np.linspace(-1.5, 1.5, 9):
        assert abs(grid.g(beta) - closed.g(beta)) < 1e-8
        assert abs(grid.lam(beta) - closed.lam(beta)) < 1e-8
        assert abs(grid.lam_tilde(beta) - closed.lam_tilde(beta)) < 1e-8
    default = gaussian_grid_meter(1.0)
    for beta in np.linspace(-2, 2, 9):
        assert abs(default.g(beta) - closed.g(beta)) < 1e-10
        assert abs(default.lam_tilde(beta) - closed.lam_tilde(beta)) < 1e-10


def test_skewed_meter_has_complex_responses():
    meter = skewed_momentum_meter()
    report = validate_meter(meter)
    assert report.passed
    assert not report.real_lambda_mode
    third_moment = meter._momentum_moment(3)
    assert abs(third_moment) > 0.1
    beta = 1e-3
    slope = lambda_tilde(meter, beta).imag / beta
    assert abs(slope + third_moment / (2 * meter.sigma_p_sq)) < 1e-4


@pytest.mark.parametrize(
    "meter", [gaussian_grid_meter(1.0, 2048, 48.0), double_hump_meter(), even_odd_mixture_meter()]
)
def test_real_parity_meters_have_real_responses(meter):
    assert validate_meter(meter).real_lambda_mode
    for beta in np.linspace(-5, 5, 11):
        assert abs(lambda_response(meter, beta).imag) < 1e-10
        assert abs(lambda_tilde(meter, beta).imag) < 1e-10


def test_validate_gaussian():
    report = validate_meter(GaussianMeter(1.0))
    assert report.passed
    assert report.real_lambda_mode
    assert report.sigma_p_sq == 1.0
    assert abs(report.sigma_q_sq - 0.25) < 1e-15


def test_validate_asymmetric_meter_fails():
    meter = asymmetric_meter()
    report = validate_meter(meter)
    assert not report.passed
    # <Q> of (1+Q) exp(-Q^2/2) is exactly 2/3
    assert abs(report.mean_q - 2.0 / 3.0) < 1e-8
    with pytest.raises(InvalidMeterError):
        g_function(meter, 0.3)
    with pytest.raises(InvalidMeterError):
        lambda_tilde(meter, 0.3)


def test_even_odd_mixture_passes():
    report = validate_meter(even_odd_mixture_meter())
    assert report.passed
    assert report.real_lambda_mode


def test_grid_meter_constructor_checks():
    with pytest.raises(ValueError):
        GridMeter(1000, 10.0, [(1.0, np.ones(1000))])  # not a power of two
    with pytest.raises(ValueError):
        GridMeter(64, 10.0, [(0.4, np.ones(64))])  # weights must sum to 1
    q = centered_grid(64, 10.0)
    with pytest.raises(ValueError):
        GridMeter(64, 10.0, [(1.0, np.exp(-q**2)), (1.0, np.exp(-q**2))])


def test_grid_meter_normalizes_components():
    q = centered_grid(256, 16.0)
    meter = GridMeter(256, 16.0, [(1.0, 5.0 * np.exp(-q**2 / 2))])
    norm = np.sum(np.abs(meter.psis[0]) ** 2) * meter.dq
    assert abs(norm - 1.0) < 1e-12


def test_grid_safety_bound():
    meter = gaussian_grid_meter(1.0)  # extent 10, bound 2.5
    with pytest.raises(GridSafetyError):
        g_function(meter, 3.0)


def test_meter_response_validates():
    with pytest.raises(ValueError):
        MeterResponse(beta=0.0, g=1 + 0j, h=0j, lam=0.9 + 0j, lam_tilde=1 + 0j, sigma_p_sq=1.0)
    with pytest.raises(ValueError):
        MeterResponse(beta=0.0, g=1 + 0j, h=0j, lam=1 + 0j, lam_tilde=1 + 0j, sigma_p_sq=0.0)


def test_meter_config_roundtrip():
    gauss = GaussianMeter(0.7)
    assert meter_from_config(meter_to_config(gauss)).sigma_p == 0.7
    grid = skewed_momentum_meter()
    again = meter_from_config(meter_to_config(grid))
    assert again.n_points == grid.n_points
    assert again.extent == grid.extent
    assert np.max(np.abs(again.psis[0] - grid.psis[0])) < 1e-15
    with pytest.raises(ValueError):
        meter_from_config({"type": "banana"})


def test_grid_meter_accepts_real_psi_lists():
    q = centered_grid(128, 12.0)
    meter = meter_from_config(
        {
            "type": "grid",
            "n_points": 128,
            "extent": 12.0,
            "components": [{"weight": 1.0, "psi": list(np.exp(-q**2 / 2))}],
        }
    )
    assert validate_meter(meter).passed
