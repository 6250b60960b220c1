"""Pointer-state models and their response functions.

A meter is a one-dimensional continuous system (position Q, momentum P,
hbar = 1) whose translation under exp(-i*beta*P) encodes the measured
eigenvalue.  What the correlation formulas need from the meter are the
response functions

    g(beta)            = <exp(-i beta P)>
    h(beta)            = (1/beta) <exp(-i beta P / 2) Q exp(-i beta P / 2)>
    lambda(beta)       = g(beta) + 2 h(beta)
    lambda_tilde(beta) = [(1/beta) dg/dbeta] / [-sigma_P^2]

together with the second momentum moment sigma_P^2.  Two models are
provided: a pure Gaussian state (everything closed-form) and a uniform
position grid holding an arbitrary mixture of wavefunctions, evaluated
spectrally through the FFT (exact translations, no differencing).

Validity conditions <Q> = <P> = <QP+PQ> = 0 are prerequisites for the
correlation formulas; response evaluation refuses meters that violate
them beyond 1e-8.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridSafetyError, InvalidMeterError

VALIDITY_TOL = 1e-8
REAL_MODE_TOL = 1e-10

DEFAULT_GRID_POINTS = 1024
DEFAULT_EXTENT_SIGMAS = 20.0


@dataclass(frozen=True)
class MeterValidity:
    """Report of the meter validity conditions at tolerance 1e-8."""

    mean_q: float
    mean_p: float
    mean_qp_plus_pq: float
    sigma_p_sq: float
    sigma_q_sq: float
    real_lambda_mode: bool

    @property
    def passed(self) -> bool:
        return (
            abs(self.mean_q) <= VALIDITY_TOL
            and abs(self.mean_p) <= VALIDITY_TOL
            and abs(self.mean_qp_plus_pq) <= VALIDITY_TOL
            and self.sigma_p_sq > 0.0
        )

    def to_json(self) -> dict:
        return {
            "mean_q": self.mean_q,
            "mean_p": self.mean_p,
            "mean_qp_plus_pq": self.mean_qp_plus_pq,
            "sigma_p_sq": self.sigma_p_sq,
            "sigma_q_sq": self.sigma_q_sq,
            "real_lambda_mode": self.real_lambda_mode,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class MeterResponse:
    """Bundle of all response values at one beta."""

    beta: float
    g: complex
    h: complex
    lam: complex
    lam_tilde: complex
    sigma_p_sq: float

    def __post_init__(self):
        if self.lam != self.g + 2 * self.h:
            raise ValueError("lambda must equal g + 2h exactly")
        if self.sigma_p_sq <= 0:
            raise ValueError("sigma_p_sq must be positive")


@dataclass(frozen=True)
class GaussianMeter:
    """Pure minimum-uncertainty Gaussian pointer with momentum spread sigma_p.

    Closed forms: g(beta) = exp(-beta^2 sigma_p^2 / 2), h = 0, and
    lambda = lambda_tilde = g.  All validity conditions hold exactly.
    """

    sigma_p: float

    def __post_init__(self):
        if self.sigma_p <= 0:
            raise ValueError("sigma_p must be positive")

    @property
    def sigma_q(self) -> float:
        return 1.0 / (2.0 * self.sigma_p)

    @property
    def sigma_p_sq(self) -> float:
        return self.sigma_p**2

    def g(self, beta: float) -> complex:
        return complex(np.exp(-0.5 * beta**2 * self.sigma_p**2))

    def h(self, beta: float) -> complex:
        return 0j

    def lam(self, beta: float) -> complex:
        return self.g(beta)

    def lam_tilde(self, beta: float) -> complex:
        return self.g(beta)

    def validity(self) -> MeterValidity:
        return MeterValidity(0.0, 0.0, 0.0, self.sigma_p_sq, self.sigma_q**2, True)

    def position_wavefunction(self, q: np.ndarray) -> np.ndarray:
        sq = self.sigma_q
        return (2 * np.pi * sq**2) ** (-0.25) * np.exp(-(q**2) / (4 * sq**2))


class GridMeter:
    """Mixture of wavefunctions sampled on a uniform position grid.

    The grid spans [-extent/2, extent/2) with n_points samples (a power of
    two).  Components are (weight, psi) pairs; weights must sum to one and
    each psi is normalized on construction.  Wavefunctions may be complex;
    the "real-lambda mode" of the validity report records whether every
    component is real-valued with definite parity, which is what makes
    lambda and lambda_tilde real.

    Translations are evaluated in momentum space, so g, h and the
    lambda-bar derivative are spectrally exact for the sampled state.
    Requested shifts beyond extent/4 raise GridSafetyError because the
    periodic translation would wrap meaningful amplitude around the box.
    """

    def __init__(self, n_points: int, extent: float, components):
        if n_points < 2 or (n_points & (n_points - 1)) != 0:
            raise ValueError("n_points must be a power of two")
        if extent <= 0:
            raise ValueError("extent must be positive")
        self.n_points = int(n_points)
        self.extent = float(extent)
        self.dq = self.extent / self.n_points
        self.positions = (np.arange(self.n_points) - self.n_points // 2) * self.dq
        self.momenta = 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dq)
        weights = []
        psis = []
        for weight, psi in components:
            w = float(weight)
            if w <= 0:
                raise ValueError("component weights must be positive")
            arr = np.asarray(psi, dtype=complex)
            if arr.shape != (self.n_points,):
                raise ValueError("psi length must equal n_points")
            norm = np.sqrt(np.sum(np.abs(arr) ** 2) * self.dq)
            if norm == 0:
                raise ValueError("psi must not vanish identically")
            psis.append(arr / norm)
            weights.append(w)
        total = sum(weights)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"component weights sum to {total}, expected 1")
        self.weights = tuple(weights)
        self.psis = tuple(psis)
        for p in self.psis:
            p.setflags(write=False)
        self.positions.setflags(write=False)
        self.momenta.setflags(write=False)

    @cached_property
    def _momentum_probs(self) -> tuple:
        # P(p_k) = |fft(psi)_k|^2 * dq / n, normalized like |psi|^2 dq.
        return tuple(
            np.abs(np.fft.fft(psi)) ** 2 * self.dq / self.n_points for psi in self.psis
        )

    def _momentum_moment(self, order: int) -> float:
        return float(
            sum(
                w * np.sum(self.momenta**order * probs)
                for w, probs in zip(self.weights, self._momentum_probs)
            )
        )

    @cached_property
    def sigma_p_sq(self) -> float:
        return self._momentum_moment(2)

    @cached_property
    def validity_report(self) -> MeterValidity:
        mean_q = 0.0
        mean_q2 = 0.0
        mean_sym = 0.0
        real_mode = True
        for w, psi in zip(self.weights, self.psis):
            dens = np.abs(psi) ** 2 * self.dq
            mean_q += w * float(np.sum(self.positions * dens))
            mean_q2 += w * float(np.sum(self.positions**2 * dens))
            p_psi = np.fft.ifft(self.momenta * np.fft.fft(psi))
            mean_sym += w * 2.0 * float(
                np.real(np.sum(np.conj(self.positions * psi) * p_psi) * self.dq)
            )
            real_mode = real_mode and self._is_real_definite_parity(psi)
        mean_p = self._momentum_moment(1)
        return MeterValidity(
            mean_q=mean_q,
            mean_p=mean_p,
            mean_qp_plus_pq=mean_sym,
            sigma_p_sq=self.sigma_p_sq,
            sigma_q_sq=mean_q2 - mean_q**2,
            real_lambda_mode=real_mode,
        )

    def _is_real_definite_parity(self, psi: np.ndarray) -> bool:
        scale = float(np.max(np.abs(psi)))
        if float(np.max(np.abs(psi.imag))) > REAL_MODE_TOL * scale:
            return False
        reflected = np.roll(psi[::-1], 1)
        even = float(np.max(np.abs(reflected - psi)))
        odd = float(np.max(np.abs(reflected + psi)))
        return min(even, odd) <= REAL_MODE_TOL * scale

    def _require_valid(self):
        if not self.validity_report.passed:
            raise InvalidMeterError(
                f"meter violates validity conditions: {self.validity_report.to_json()}"
            )

    def _check_shift(self, shift: float):
        if abs(shift) > self.extent / 4:
            raise GridSafetyError(
                f"translation {shift} exceeds extent/4 = {self.extent / 4}; "
                "periodic wrap-around would corrupt the result"
            )

    def translate(self, psi: np.ndarray, shift: float) -> np.ndarray:
        """exp(-i*shift*P) psi, i.e. psi displaced by +shift in position."""
        self._check_shift(shift)
        return np.fft.ifft(np.fft.fft(psi) * np.exp(-1j * shift * self.momenta))

    def g(self, beta: float) -> complex:
        self._require_valid()
        self._check_shift(beta)
        return complex(
            sum(
                w * np.sum(np.exp(-1j * beta * self.momenta) * probs)
                for w, probs in zip(self.weights, self._momentum_probs)
            )
        )

    def h(self, beta: float) -> complex:
        self._require_valid()
        if beta == 0.0:
            # Series limit: h(0) = <Q>/beta - (i/2)<QP+PQ> with both terms
            # zero under the validity conditions just enforced.
            return 0j
        self._check_shift(beta)
        total = 0j
        for w, psi in zip(self.weights, self.psis):
            left = self.translate(psi, -beta / 2)
            right = self.translate(psi, beta / 2)
            total += w * np.sum(np.conj(left) * self.positions * right) * self.dq
        return complex(total / beta)

    def lam(self, beta: float) -> complex:
        return self.g(beta) + 2 * self.h(beta)

    def lam_tilde(self, beta: float) -> complex:
        self._require_valid()
        if self.sigma_p_sq <= 0:
            raise InvalidMeterError("sigma_p_sq must be positive for lambda_tilde")
        if beta == 0.0:
            return 1 + 0j
        self._check_shift(beta)
        # (1/beta) dg/dbeta evaluated as <-i P exp(-i beta P)>/beta, a
        # momentum-space moment (analytic differentiation, no differencing).
        deriv = sum(
            w * np.sum(-1j * self.momenta * np.exp(-1j * beta * self.momenta) * probs)
            for w, probs in zip(self.weights, self._momentum_probs)
        )
        return complex(deriv / beta / (-self.sigma_p_sq))

    def validity(self) -> MeterValidity:
        return self.validity_report


Meter = GaussianMeter | GridMeter


def g_function(meter: Meter, beta: float) -> complex:
    """<exp(-i beta P)> over the meter state; g(0) = 1, g*(beta) = g(-beta)."""
    _require_valid(meter)
    return meter.g(beta)


def h_function(meter: Meter, beta: float) -> complex:
    """(1/beta) <exp(-i beta P/2) Q exp(-i beta P/2)>, with h(0) = 0."""
    _require_valid(meter)
    return meter.h(beta)


def lambda_response(meter: Meter, beta: float) -> complex:
    """g(beta) + 2 h(beta); equals 1 at beta = 0."""
    _require_valid(meter)
    return meter.lam(beta)


def lambda_tilde(meter: Meter, beta: float) -> complex:
    """Normalized derivative response [(1/beta) dg/dbeta] / (-sigma_P^2)."""
    _require_valid(meter)
    return meter.lam_tilde(beta)


def validate_meter(meter: Meter) -> MeterValidity:
    """Evaluate the validity conditions; failures are reported, not raised."""
    return meter.validity()


def meter_response(meter: Meter, beta: float) -> MeterResponse:
    """All response values at one beta as a single record."""
    _require_valid(meter)
    g = meter.g(beta)
    h = meter.h(beta)
    return MeterResponse(
        beta=beta,
        g=g,
        h=h,
        lam=g + 2 * h,
        lam_tilde=meter.lam_tilde(beta),
        sigma_p_sq=float(meter.sigma_p_sq),
    )


def _require_valid(meter: Meter):
    report = meter.validity()
    if not report.passed:
        raise InvalidMeterError(f"meter violates validity conditions: {report.to_json()}")


def gaussian_grid_meter(
    sigma_p: float,
    n_points: int = DEFAULT_GRID_POINTS,
    extent_sigmas: float = DEFAULT_EXTENT_SIGMAS,
) -> GridMeter:
    """Discretize a Gaussian pointer onto its default grid.

    The extent is measured in units of the position spread, so the default
    box spans 20 sigma_q and tails are negligible at double precision.
    """
    gauss = GaussianMeter(sigma_p)
    extent = extent_sigmas * gauss.sigma_q
    dq = extent / n_points
    q = (np.arange(n_points) - n_points // 2) * dq
    return GridMeter(n_points, extent, [(1.0, gauss.position_wavefunction(q))])


def meter_to_config(meter: Meter) -> dict:
    if isinstance(meter, GaussianMeter):
        return {"type": "gaussian", "sigma_p": meter.sigma_p}
    return {
        "type": "grid",
        "n_points": meter.n_points,
        "extent": meter.extent,
        "components": [
            {
                "weight": w,
                "psi": [[float(z.real), float(z.imag)] for z in psi],
            }
            for w, psi in zip(meter.weights, meter.psis)
        ],
    }


def meter_from_config(config: dict) -> Meter:
    """Build a meter from its JSON configuration block.

    Grid psi entries may be plain reals or [re, im] pairs.
    """
    kind = config.get("type")
    if kind == "gaussian":
        return GaussianMeter(float(config["sigma_p"]))
    if kind == "grid":
        components = []
        for comp in config["components"]:
            raw = comp["psi"]
            arr = np.array(raw, dtype=float)
            if arr.ndim == 2 and arr.shape[1] == 2:
                psi = arr[:, 0] + 1j * arr[:, 1]
            elif arr.ndim == 1:
                psi = arr.astype(complex)
            else:
                raise ValueError("psi must be a list of reals or [re, im] pairs")
            components.append((float(comp["weight"]), psi))
        return GridMeter(int(config["n_points"]), float(config["extent"]), components)
    raise ValueError(f"unknown meter type {kind!r}")
