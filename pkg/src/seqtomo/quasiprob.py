"""Joint quasi-probability representation over a complementary basis pair.

The outcome-(1,1) table of the projector scheme is a function of the state
alone once the coupling response lambda is fixed, so it can be treated as
a quasi-probability representation: complex-valued, with column marginals
equal to the populations in the first basis and total sum one.  Each
observable gets a matching transform such that summing table times
transform over both labels reproduces the quantum expectation value.
Every complementary pair and every coupling value defines one member of
this family of representations.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, StrongCouplingSingularError
from .hilbert import BasisPair, DensityMatrix, complex_matrix_to_json

SINGULAR_LAMBDA_TOL = 1e-10
MARGINAL_TOL = 1e-10


@dataclass(frozen=True)
class QuasiProbTable:
    """Complex d x d table indexed by (mu, k); mu runs over the second
    basis (measured last), k over the first (measured first)."""

    dim: int
    values: np.ndarray
    lam: complex
    eps1: float | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.dim, self.dim):
            raise ValueError(f"values must have shape ({self.dim}, {self.dim})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def column_marginals(self) -> np.ndarray:
        """sum_mu values[mu][k]; real and equal to the populations."""
        return self.values.sum(axis=0)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "eps1": self.eps1,
            "lambda": [self.lam.real, self.lam.imag],
            "values": complex_matrix_to_json(self.values),
        }

    def to_csv(self) -> str:
        """Rows (mu, k, re, im), one line per cell, '.' decimal separator."""
        buf = io.StringIO()
        buf.write("mu,k,re,im\n")
        for mu in range(self.dim):
            for k in range(self.dim):
                z = complex(self.values[mu, k])
                buf.write(f"{mu},{k},{z.real!r},{z.imag!r}\n")
        return buf.getvalue()


def coupling_matrix(d: int, lam: complex) -> np.ndarray:
    """G[k'][k] = 1 on the diagonal, lambda off it."""
    return lam * np.ones((d, d), dtype=complex) + (1.0 - lam) * np.eye(d)


def w11_kernel(matrix: np.ndarray, pair: BasisPair, lam: complex) -> np.ndarray:
    """The linear map from a (not necessarily physical) Hermitian matrix to
    the outcome-(1,1) table at response value lambda."""
    first = pair.first.vectors
    rep = first.conj().T @ matrix @ first
    weighted = rep * coupling_matrix(pair.dim, lam)
    inner = weighted @ pair.overlaps.conj().T  # inner[k, mu]
    return pair.overlaps * inner.T


def quasiprob_of_state(rho: DensityMatrix, pair: BasisPair, lam: complex) -> QuasiProbTable:
    """Evaluate the table directly from the state; no meter involved,
    lambda is a free parameter of the representation."""
    if rho.dim != pair.dim:
        raise DimensionMismatchError("state and basis pair dimensions differ")
    values = w11_kernel(rho.elements, pair, lam)
    populations = np.real(
        np.diag(pair.first.vectors.conj().T @ rho.elements @ pair.first.vectors)
    )
    marginals = values.sum(axis=0)
    if np.max(np.abs(marginals - populations)) > MARGINAL_TOL:
        raise AssertionError("column marginals do not reproduce the populations")
    return QuasiProbTable(dim=pair.dim, values=values, lam=complex(lam))


def transform_observable(
    obs: np.ndarray, pair: BasisPair, lam: complex, mu: int, k: int
) -> complex:
    """Transform value of a Hermitian observable at one (mu, k) cell."""
    return complex(transform_table(obs, pair, lam)[mu, k])


def transform_table(obs: np.ndarray, pair: BasisPair, lam: complex) -> np.ndarray:
    """All transform values: (1 - 1/lambda) <k|O|k> + (1/lambda) <mu|O|k>/<mu|k>."""
    if abs(lam) <= SINGULAR_LAMBDA_TOL:
        raise StrongCouplingSingularError(
            "observable transform is singular at |lambda| ~ 0"
        )
    obs = np.asarray(obs, dtype=complex)
    if obs.shape != (pair.dim, pair.dim):
        raise DimensionMismatchError("observable and basis pair dimensions differ")
    first = pair.first.vectors
    diag = np.diag(first.conj().T @ obs @ first)
    cross = pair.second.vectors.conj().T @ obs @ first
    return (1.0 - 1.0 / lam) * diag[np.newaxis, :] + (cross / pair.overlaps) / lam


def expectation_via_quasiprob(
    rho: DensityMatrix, obs: np.ndarray, pair: BasisPair, lam: complex
) -> complex:
    """sum_{mu,k} table * transform; equals tr(rho obs) for Hermitian obs.

    The (tiny) imaginary part is kept for diagnostics rather than dropped.
    """
    table = quasiprob_of_state(rho, pair, lam)
    return complex(np.sum(table.values * transform_table(obs, pair, lam)))
