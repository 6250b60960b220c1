"""Shared helpers: independent quadrature oracles and stock test meters."""

from __future__ import annotations

import numpy as np

from seqtomo.hilbert import ObservableSpectral
from seqtomo.meters import GridMeter

trapezoid = getattr(np, "trapezoid", None) or np.trapz


def gaussian_psi(q: np.ndarray, sigma_p: float) -> np.ndarray:
    """Minimum-uncertainty Gaussian wavefunction with momentum spread sigma_p."""
    sigma_q = 1.0 / (2.0 * sigma_p)
    return (2 * np.pi * sigma_q**2) ** (-0.25) * np.exp(-(q**2) / (4 * sigma_q**2))


def quad_g_gaussian(sigma_p: float, beta: float, half_width: float = 30.0, n: int = 40001) -> complex:
    """<exp(-i beta P)> by direct position-space quadrature.

    Uses the analytic translated wavefunction, so it shares nothing with
    the FFT evaluation inside the meters module.
    """
    q = np.linspace(-half_width, half_width, n)
    integrand = np.conj(gaussian_psi(q, sigma_p)) * gaussian_psi(q - beta, sigma_p)
    return complex(trapezoid(integrand, q))


def quad_h_gaussian(sigma_p: float, beta: float, half_width: float = 30.0, n: int = 40001) -> complex:
    """(1/beta) <exp(-i beta P/2) Q exp(-i beta P/2)> by quadrature."""
    if beta == 0.0:
        return 0j
    q = np.linspace(-half_width, half_width, n)
    integrand = np.conj(gaussian_psi(q + beta / 2, sigma_p)) * q * gaussian_psi(q - beta / 2, sigma_p)
    return complex(trapezoid(integrand, q) / beta)


def quad_mean_q(shape, half_width: float = 30.0, n: int = 40001) -> float:
    """<Q> of an (unnormalized) real wavefunction shape, by quadrature."""
    q = np.linspace(-half_width, half_width, n)
    density = np.abs(shape(q)) ** 2
    return float(trapezoid(q * density, q) / trapezoid(density, q))


def centered_grid(n: int, extent: float) -> np.ndarray:
    return (np.arange(n) - n // 2) * (extent / n)


def double_hump_meter(n: int = 2048, extent: float = 24.0, separation: float = 1.5) -> GridMeter:
    """Even two-peak pure state; real with definite parity."""
    q = centered_grid(n, extent)
    psi = np.exp(-((q - separation) ** 2) / 2) + np.exp(-((q + separation) ** 2) / 2)
    return GridMeter(n, extent, [(1.0, psi)])


def even_odd_mixture_meter(n: int = 2048, extent: float = 24.0) -> GridMeter:
    """Equal mixture of an even Gaussian and an odd first-excited shape."""
    q = centered_grid(n, extent)
    even = np.exp(-(q**2) / 2)
    odd = q * np.exp(-(q**2) / 2)
    return GridMeter(n, extent, [(0.5, even), (0.5, odd)])


def skewed_momentum_meter(n: int = 1024, extent: float = 40.0) -> GridMeter:
    """Complex pure state with <P> = 0 but <P^3> != 0.

    Built from a real two-hump momentum profile (real momentum wavefunction
    gives <Q> = <QP+PQ> = 0 identically); the relative hump weight is tuned
    so the first momentum moment vanishes exactly on the grid.
    """
    dq = extent / n
    p = 2 * np.pi * np.fft.fftfreq(n, d=dq)
    hump_plus = np.exp(-((p - 1.2) ** 2) / (2 * 0.3**2))
    hump_minus = np.exp(-((p + 0.4) ** 2) / (2 * 0.3**2))
    a = np.sum(p * hump_plus**2)
    b = np.sum(p * hump_plus * hump_minus)
    c = np.sum(p * hump_minus**2)
    weight = (-b + np.sqrt(b * b - a * c)) / c
    psi = np.roll(np.fft.ifft(hump_plus + weight * hump_minus), n // 2)
    return GridMeter(n, extent, [(1.0, psi)])


def asymmetric_meter(n: int = 1024, extent: float = 24.0) -> GridMeter:
    """(1 + Q) Gaussian shape: normalizable but <Q> = 2/3, so invalid."""
    q = centered_grid(n, extent)
    return GridMeter(n, extent, [(1.0, (1 + q) * np.exp(-(q**2) / 2))])


def random_hermitian(d: int, seed: int, unit_spectrum: bool = True) -> np.ndarray:
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (h + h.conj().T) / 2
    if unit_spectrum:
        h /= np.max(np.abs(np.linalg.eigvalsh(h)))
    return h


def random_observable(d: int, seed: int) -> ObservableSpectral:
    """Random nondegenerate observable with spectrum inside [-1, 1]."""
    return ObservableSpectral.from_matrix(random_hermitian(d, seed))
