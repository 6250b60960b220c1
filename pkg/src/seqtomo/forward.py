"""Analytic forward model for two successive meter-mediated measurements.

The first observable couples the system to meter 1 with strength eps1, the
second to meter 2 with strength eps2, both impulsively.  The meter
correlations are then fixed by a complex table W indexed by the two
outcome labels: the position-position correlation reads off its real part
and the momentum-position correlation the imaginary part of its
lambda_tilde-weighted variant.  For the tomography scheme both observables
are rank-one projectors, one from each basis of a complementary pair, and
only the joint outcome-(1,1) cell is consumed downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidMeterError
from .hilbert import BasisPair, DensityMatrix, ObservableSpectral
from .meters import Meter, lambda_response, lambda_tilde, validate_meter

W_SUM_TOL = 1e-10


@dataclass(frozen=True)
class SuccessiveSetup:
    """A system state, two spectrally-decomposed observables and two meters."""

    rho: DensityMatrix
    first_observable: ObservableSpectral
    second_observable: ObservableSpectral
    meter1: Meter
    meter2: Meter
    eps1: float
    eps2: float

    def __post_init__(self):
        d = self.rho.dim
        if self.first_observable.dim != d or self.second_observable.dim != d:
            raise DimensionMismatchError("observable dimensions differ from the state")
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("coupling strengths must be positive")
        for meter in (self.meter1, self.meter2):
            report = validate_meter(meter)
            if not report.passed:
                raise InvalidMeterError(
                    f"meter violates validity conditions: {report.to_json()}"
                )


@dataclass(frozen=True)
class WTable:
    """Complex table over (second outcome m, first outcome n).

    variant "plain" weights the eigenvalue-difference response with
    lambda, "tilde" with lambda_tilde.  Both tables sum to one because the
    projector families are complete and the response is 1 at zero
    argument.
    """

    values: np.ndarray
    variant: str
    eps1: float
    first_eigenvalues: np.ndarray
    second_eigenvalues: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.variant not in ("plain", "tilde"):
            raise ValueError(f"unknown variant {self.variant!r}")
        total = complex(np.sum(v))
        if abs(total - 1.0) > W_SUM_TOL:
            raise ValueError(f"W table sums to {total}, expected 1 within 1e-10")


def _response(meter: Meter, variant: str, beta: float) -> complex:
    if variant == "plain":
        return lambda_response(meter, beta)
    return lambda_tilde(meter, beta)


def _w_values(
    rho: np.ndarray,
    obs_a: ObservableSpectral,
    obs_b: ObservableSpectral,
    meter1: Meter,
    eps1: float,
    variant: str,
) -> np.ndarray:
    """values[m, n] = sum_p resp(eps1*(a_n - a_p)) tr(rho P_p Q_m P_n)."""
    a = obs_a.eigenvalues
    pa = np.stack(obs_a.projectors)
    pb = np.stack(obs_b.projectors)
    # traces[p, m, n] = tr(rho P_p Q_m P_n) = tr(P_n rho P_p Q_m)
    left = np.einsum("nij,jk->nik", pa, rho)
    traces = np.einsum("nik,pkl,mli->pmn", left, pa, pb, optimize=True)
    # Response at every distinct eigenvalue difference; for the projector
    # scheme this set is just {0, +eps1, -eps1}.
    resp_cache: dict[float, complex] = {}
    resp = np.empty((len(a), len(a)), dtype=complex)
    for n in range(len(a)):
        for p in range(len(a)):
            beta = eps1 * (a[n] - a[p])
            if beta not in resp_cache:
                resp_cache[beta] = _response(meter1, variant, beta)
            resp[n, p] = resp_cache[beta]
    return np.einsum("np,pmn->mn", resp, traces)


def w_general(setup: SuccessiveSetup, variant: str = "plain") -> WTable:
    """Full outcome table for arbitrary (possibly degenerate) observables."""
    values = _w_values(
        setup.rho.elements,
        setup.first_observable,
        setup.second_observable,
        setup.meter1,
        setup.eps1,
        variant,
    )
    return WTable(
        values=values,
        variant=variant,
        eps1=setup.eps1,
        first_eigenvalues=setup.first_observable.eigenvalues,
        second_eigenvalues=setup.second_observable.eigenvalues,
    )


def corr_qq(setup: SuccessiveSetup) -> float:
    """Position-position meter correlation <Q1 Q2> after both interactions."""
    table = w_general(setup, "plain")
    weighted = np.einsum(
        "m,n,mn->", table.second_eigenvalues, table.first_eigenvalues, table.values
    )
    return setup.eps1 * setup.eps2 * float(np.real(weighted))


def corr_pq(setup: SuccessiveSetup) -> float:
    """Momentum-position meter correlation <P1 Q2> after both interactions."""
    table = w_general(setup, "tilde")
    weighted = np.einsum(
        "m,n,mn->", table.second_eigenvalues, table.first_eigenvalues, table.values
    )
    sigma_sq = float(setup.meter1.sigma_p_sq)
    return setup.eps1 * setup.eps2 * 2.0 * sigma_sq * float(np.imag(weighted))


def w11_projector(
    rho: DensityMatrix,
    pair: BasisPair,
    k: int,
    mu: int,
    meter1: Meter,
    eps1: float,
    variant: str = "plain",
) -> complex:
    """Joint outcome-(1,1) cell for the projector pair (k from the first
    basis measured first, mu from the second basis measured second).

    Evaluated through the general table on the two-eigenvalue observables
    so there is a single audited implementation of the outcome sum.
    """
    obs_a = ObservableSpectral.rank_one_projector(pair.first.vector(k))
    obs_b = ObservableSpectral.rank_one_projector(pair.second.vector(mu))
    values = _w_values(rho.elements, obs_a, obs_b, meter1, eps1, variant)
    # rank_one_projector orders eigenvalues (1, 0), so the (1,1) joint
    # outcome sits at index [0, 0].
    return complex(values[0, 0])


@dataclass(frozen=True)
class CorrelationSet:
    """The 2 d^2 normalized correlations of the full projector scheme.

    ``x[mu][k]`` is <Q1 Q2>/(eps1*eps2) and ``y_tilde[mu][k]`` is
    <P1 Q2>/(2*sigma_p1_sq*eps1*eps2); both are real by construction.
    The meter responses at eps1 ride along because the recovery step
    needs them, and they are known once the first meter state is known.
    """

    dim: int
    x: np.ndarray
    y_tilde: np.ndarray
    eps1: float
    eps2: float
    lambda_eps1: complex
    lambda_tilde_eps1: complex
    sigma_p1_sq: float

    def __post_init__(self):
        for name in ("x", "y_tilde"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.dim, self.dim):
                raise ValueError(f"{name} must have shape ({self.dim}, {self.dim})")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def population_column_sums(self) -> np.ndarray:
        """sum_mu x[mu][k], which equals the k-th population of the state."""
        return self.x.sum(axis=0)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "eps1": self.eps1,
            "eps2": self.eps2,
            "sigma_p1_sq": self.sigma_p1_sq,
            "lambda": [self.lambda_eps1.real, self.lambda_eps1.imag],
            "lambda_tilde": [self.lambda_tilde_eps1.real, self.lambda_tilde_eps1.imag],
            "x": [[float(v) for v in row] for row in self.x],
            "y_tilde": [[float(v) for v in row] for row in self.y_tilde],
        }

    @classmethod
    def from_json(cls, data: dict) -> CorrelationSet:
        return cls(
            dim=int(data["dim"]),
            x=np.array(data["x"], dtype=float),
            y_tilde=np.array(data["y_tilde"], dtype=float),
            eps1=float(data["eps1"]),
            eps2=float(data["eps2"]),
            lambda_eps1=complex(data["lambda"][0], data["lambda"][1]),
            lambda_tilde_eps1=complex(data["lambda_tilde"][0], data["lambda_tilde"][1]),
            sigma_p1_sq=float(data["sigma_p1_sq"]),
        )


def correlation_set(
    rho: DensityMatrix,
    pair: BasisPair,
    meter1: Meter,
    meter2: Meter,
    eps1: float,
    eps2: float,
) -> CorrelationSet:
    """Simulate the full scheme: both correlations for every (mu, k) pair.

    Meter 2 must satisfy the validity conditions but its state and eps2
    drop out of the normalized correlations, which is what makes the
    downstream reconstruction independent of the second interaction.
    """
    for meter in (meter1, meter2):
        report = validate_meter(meter)
        if not report.passed:
            raise InvalidMeterError(
                f"meter violates validity conditions: {report.to_json()}"
            )
    d = pair.dim
    if rho.dim != d:
        raise DimensionMismatchError("state and basis pair dimensions differ")
    x = np.empty((d, d))
    y_tilde = np.empty((d, d))
    for mu in range(d):
        for k in range(d):
            x[mu, k] = w11_projector(rho, pair, k, mu, meter1, eps1, "plain").real
            y_tilde[mu, k] = w11_projector(rho, pair, k, mu, meter1, eps1, "tilde").imag
    populations = np.real(np.diag(pair.first.vectors.conj().T @ rho.elements @ pair.first.vectors))
    if np.max(np.abs(x.sum(axis=0) - populations)) > W_SUM_TOL:
        raise AssertionError("column sums of x do not reproduce the populations")
    if abs(x.sum() - 1.0) > W_SUM_TOL:
        raise AssertionError("x entries do not sum to the unit trace")
    return CorrelationSet(
        dim=d,
        x=x,
        y_tilde=y_tilde,
        eps1=eps1,
        eps2=eps2,
        lambda_eps1=lambda_response(meter1, eps1),
        lambda_tilde_eps1=lambda_tilde(meter1, eps1),
        sigma_p1_sq=float(meter1.sigma_p_sq),
    )
