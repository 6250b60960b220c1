"""Inversion of measured meter correlations into the density matrix.

The pipeline has two stages.  First the full complex outcome table is
recovered from the two real correlation tables: the position-position
values are its real part directly, and for each (mu, k) cell the three
unknowns (the real and imaginary parts of the off-diagonal trace sum and
the sought imaginary part) satisfy a linear system whose determinant is
Re{lambda * conj(lambda_tilde)}.  Second, the table is inverted through
the coupling matrix G to the matrix elements of the state in the first
basis.  A two-level specialization reconstructs the state from just three
independent correlations, and an independence report measures how many of
the 2 d^2 correlations carry independent information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateRecoveryError,
    DimensionMismatchError,
    PhysicalityError,
    StrongCouplingSingularError,
)
from .forward import CorrelationSet
from .hilbert import BasisPair, DensityMatrix, trace_distance
from .quasiprob import SINGULAR_LAMBDA_TOL, coupling_matrix, w11_kernel

DEGENERATE_RECOVERY_TOL = 1e-10
RANK_THRESHOLD = 1e-8


@dataclass(frozen=True)
class RecoveredW:
    """Outcome table rebuilt from measured correlations.

    ``r0`` holds the diagonal traces, ``r + i s`` the off-diagonal trace
    sums, and ``w11 = r0 + lambda (r + i s)`` reassembles the table.  The
    response values used in the recovery ride along for reassembly with
    either response variant.
    """

    w11: np.ndarray
    r: np.ndarray
    s: np.ndarray
    r0: np.ndarray
    lam: complex
    lam_tilde: complex

    def __post_init__(self):
        for name in ("w11", "r", "s", "r0"):
            arr = np.array(getattr(self, name), dtype=complex if name == "w11" else float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.max(np.abs(self.w11 - self.assemble(self.lam))) > 1e-12:
            raise AssertionError("w11 does not reassemble from r0 + lambda (r + i s)")

    def assemble(self, response: complex) -> np.ndarray:
        """r0 + response * (r + i s); the tilde table uses lambda_tilde."""
        return self.r0 + response * (self.r + 1j * self.s)

    @property
    def total(self) -> complex:
        return complex(np.sum(self.w11))


def recover_w11(corr: CorrelationSet, pair: BasisPair) -> RecoveredW:
    """Rebuild the complex outcome table from the measured correlations.

    Raises DegenerateRecoveryError when Re{lambda conj(lambda_tilde)} is
    numerically zero, in which case the per-cell linear system is singular
    and the imaginary part cannot be recovered.
    """
    if corr.dim != pair.dim:
        raise DimensionMismatchError("correlation set and basis pair dimensions differ")
    lam = corr.lambda_eps1
    lam_t = corr.lambda_tilde_eps1
    det = (lam * np.conj(lam_t)).real
    if abs(det) < DEGENERATE_RECOVERY_TOL:
        raise DegenerateRecoveryError(
            f"Re(lambda * conj(lambda_tilde)) = {det:.3e} is below 1e-10"
        )
    x = corr.x
    y_t = corr.y_tilde
    r0 = np.abs(pair.overlaps) ** 2 * x.sum(axis=0)[np.newaxis, :]
    diff = x - r0
    r = (lam_t.real * diff + lam.imag * y_t) / det
    s = (-lam_t.imag * diff + lam.real * y_t) / det
    y = lam.imag * r + lam.real * s
    return RecoveredW(w11=x + 1j * y, r=r, s=s, r0=r0, lam=lam, lam_tilde=lam_t)


def _invert_w11(
    w11: np.ndarray,
    pair: BasisPair,
    response: complex,
    project: bool,
    trace_tol: float,
) -> DensityMatrix:
    if abs(response) <= SINGULAR_LAMBDA_TOL:
        raise StrongCouplingSingularError(
            "response is numerically zero: the first measurement fully decoheres "
            "the state and only populations remain recoverable"
        )
    w11 = np.asarray(w11, dtype=complex)
    d = pair.dim
    if w11.shape != (d, d):
        raise DimensionMismatchError("table and basis pair dimensions differ")
    ratio = w11 / pair.overlaps  # [mu, k]
    rep = (ratio.T @ pair.overlaps) / coupling_matrix(d, response)
    rep = (rep + rep.conj().T) / 2
    matrix = pair.first.vectors @ rep @ pair.first.vectors.conj().T
    if project:
        return project_to_physical(matrix)
    tr = np.trace(matrix)
    if abs(tr - 1.0) > trace_tol:
        raise PhysicalityError(
            f"reconstructed trace {tr} is off unity beyond {trace_tol}; "
            "the input table is inconsistent"
        )
    return DensityMatrix(matrix / tr.real)


def rho_from_w11(
    w11: np.ndarray,
    pair: BasisPair,
    lambda_eps1: complex,
    project: bool = False,
    trace_tol: float = 1e-6,
) -> DensityMatrix:
    """Invert the plain outcome table into the state.

    With ``project=True`` the result is pushed onto the physical set
    (Hermitize, clip negative eigenvalues, renormalize the trace), which
    is the right mode for noisy tables; otherwise physicality violations
    raise.
    """
    return _invert_w11(w11, pair, lambda_eps1, project, trace_tol)


def rho_from_w11_tilde(
    w11_tilde: np.ndarray,
    pair: BasisPair,
    lambda_tilde_eps1: complex,
    project: bool = False,
    trace_tol: float = 1e-6,
) -> DensityMatrix:
    """Invert the tilde-variant table; identical formula with the
    derivative response in the coupling matrix."""
    return _invert_w11(w11_tilde, pair, lambda_tilde_eps1, project, trace_tol)


def project_to_physical(matrix: np.ndarray) -> DensityMatrix:
    """Hermitize, clip negative eigenvalues to zero, renormalize trace."""
    m = np.asarray(matrix, dtype=complex)
    m = (m + m.conj().T) / 2
    evals, evecs = np.linalg.eigh(m)
    clipped = np.clip(evals, 0.0, None)
    total = clipped.sum()
    if total <= 0:
        raise PhysicalityError("matrix has no positive spectral weight to keep")
    clipped /= total
    return DensityMatrix((evecs * clipped) @ evecs.conj().T)


def populations_from_correlations(corr: CorrelationSet) -> np.ndarray:
    """Populations in the first basis, readable at any coupling strength.

    This is the diagonal-only partial result that survives the strong
    coupling limit where the full inversion is singular.
    """
    return corr.population_column_sums()


def reconstruct(corr: CorrelationSet, pair: BasisPair, project: bool = False) -> DensityMatrix:
    """Full pipeline: recover the complex table, then invert it."""
    if abs(corr.lambda_eps1) <= SINGULAR_LAMBDA_TOL:
        # Diagnose the root cause before the recovery determinant also
        # degenerates: at |lambda| ~ 0 only populations survive; see
        # populations_from_correlations for the partial result.
        raise StrongCouplingSingularError(
            "lambda is numerically zero at this coupling; only populations "
            "are recoverable"
        )
    recovered = recover_w11(corr, pair)
    return rho_from_w11(recovered.w11, pair, corr.lambda_eps1, project=project)


def qubit_reconstruct(
    x_p0: float,
    x_m0: float,
    yt_m0: float,
    lam: float,
    lam_tilde: float,
) -> DensityMatrix:
    """Two-level state from the three independent correlations.

    Arguments are x[mu=0][k=0], x[mu=1][k=0] and y_tilde[mu=1][k=0] of a
    Fourier-pair correlation set, plus the (real) response values.  The
    populations come from the two position-position correlations and the
    coherence from their difference and the momentum-position value.
    """
    for name, value in (("lam", lam), ("lam_tilde", lam_tilde)):
        if abs(complex(value).imag) > 1e-10:
            raise ValueError(f"{name} must be real for the two-level formulas")
    lam = float(np.real(lam))
    lam_tilde = float(np.real(lam_tilde))
    if abs(lam) <= SINGULAR_LAMBDA_TOL or abs(lam_tilde) <= SINGULAR_LAMBDA_TOL:
        raise StrongCouplingSingularError("response is numerically zero")
    rho00 = x_p0 + x_m0
    rho01 = (x_p0 - x_m0) / lam - 2j * yt_m0 / lam_tilde
    matrix = np.array([[rho00, rho01], [np.conj(rho01), 1.0 - rho00]])
    try:
        return DensityMatrix(matrix)
    except PhysicalityError as exc:
        raise PhysicalityError(f"inconsistent qubit correlations: {exc}") from exc


@dataclass(frozen=True)
class NoisyReconstructionReport:
    noise_sigma: float
    seed: int
    trace_distance_to_noiseless: float
    flags: tuple

    def to_json(self) -> dict:
        return {
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
            "trace_distance_to_noiseless": self.trace_distance_to_noiseless,
            "flags": list(self.flags),
        }


def perturb_correlations(corr: CorrelationSet, noise_sigma: float, seed: int) -> CorrelationSet:
    """Add independent Gaussian noise to every stored correlation entry.

    Each entry draws from its own generator seeded by (seed, table, mu, k)
    so concurrent and serial evaluation orders agree bit for bit.
    """
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    d = corr.dim
    x = corr.x.copy()
    y_t = corr.y_tilde.copy()
    for mu in range(d):
        for k in range(d):
            x[mu, k] += np.random.default_rng([seed, 0, mu, k]).normal(0.0, noise_sigma)
            y_t[mu, k] += np.random.default_rng([seed, 1, mu, k]).normal(0.0, noise_sigma)
    return CorrelationSet(
        dim=d,
        x=x,
        y_tilde=y_t,
        eps1=corr.eps1,
        eps2=corr.eps2,
        lambda_eps1=corr.lambda_eps1,
        lambda_tilde_eps1=corr.lambda_tilde_eps1,
        sigma_p1_sq=corr.sigma_p1_sq,
    )


def noisy_reconstruct(
    corr: CorrelationSet,
    pair: BasisPair,
    noise_sigma: float,
    seed: int,
) -> tuple[DensityMatrix, NoisyReconstructionReport]:
    """Reconstruct from noise-perturbed correlations with physicality
    projection, and report the distance to the noiseless reconstruction."""
    noiseless = reconstruct(corr, pair, project=True)
    noisy_corr = perturb_correlations(corr, noise_sigma, seed)
    rho = reconstruct(noisy_corr, pair, project=True)
    flags = ["projected"]
    if noise_sigma > 0:
        flags.insert(0, "noisy")
    report = NoisyReconstructionReport(
        noise_sigma=noise_sigma,
        seed=seed,
        trace_distance_to_noiseless=trace_distance(rho, noiseless),
        flags=tuple(flags),
    )
    return rho, report


@dataclass(frozen=True)
class IndependenceReport:
    """Numerical rank of the map from state parameters to correlations."""

    dim: int
    rank: int
    n_parameters: int
    lam: complex
    lam_tilde: complex
    singular_values: np.ndarray
    independent_subset: tuple

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "rank": self.rank,
            "n_parameters": self.n_parameters,
            "lambda": [self.lam.real, self.lam.imag],
            "lambda_tilde": [self.lam_tilde.real, self.lam_tilde.imag],
            "singular_values": [float(v) for v in self.singular_values],
            "independent_subset": [list(entry) for entry in self.independent_subset],
        }


def _traceless_hermitian_basis(d: int) -> list[np.ndarray]:
    basis = []
    for i in range(d):
        for j in range(i + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[i, j] = sym[j, i] = 1.0
            basis.append(sym)
            asym = np.zeros((d, d), dtype=complex)
            asym[i, j] = -1j
            asym[j, i] = 1j
            basis.append(asym)
    for l in range(d - 1):
        diag = np.zeros((d, d), dtype=complex)
        diag[l, l] = 1.0
        diag[l + 1, l + 1] = -1.0
        basis.append(diag)
    return basis


def _correlation_vector(matrix: np.ndarray, pair: BasisPair, lam: complex, lam_t: complex) -> np.ndarray:
    x = np.real(w11_kernel(matrix, pair, lam))
    y_t = np.imag(w11_kernel(matrix, pair, lam_t))
    return np.concatenate([x.ravel(), y_t.ravel()])


def independence_report(
    corr: CorrelationSet,
    pair: BasisPair,
    step: float = 1e-4,
) -> IndependenceReport:
    """Rank of the Jacobian from the d^2 - 1 real state parameters to the
    2 d^2 stored correlations, at the response values carried by ``corr``.

    The subset is certified by QR column pivoting on the correlation rows
    with the standard threshold of 1e-8 times the top singular value.
    Columns are assembled by finite perturbations of the maximally mixed
    state along a traceless Hermitian basis (the map is linear, so the
    step size only has to keep the perturbed matrices physical).
    """
    if corr.dim != pair.dim:
        raise DimensionMismatchError("correlation set and basis pair dimensions differ")
    d = corr.dim
    lam, lam_t = corr.lambda_eps1, corr.lambda_tilde_eps1
    reference = np.eye(d, dtype=complex) / d
    base = _correlation_vector(reference, pair, lam, lam_t)
    directions = _traceless_hermitian_basis(d)
    jac = np.empty((2 * d * d, len(directions)))
    for col, direction in enumerate(directions):
        shifted = _correlation_vector(reference + step * direction, pair, lam, lam_t)
        jac[:, col] = (shifted - base) / step
    singular = scipy.linalg.svdvals(jac)
    threshold = RANK_THRESHOLD * (singular[0] if singular.size else 0.0)
    rank = int(np.sum(singular > threshold))
    _, _, pivots = scipy.linalg.qr(jac.T, pivoting=True)
    labels = [("x", mu, k) for mu in range(d) for k in range(d)]
    labels += [("y_tilde", mu, k) for mu in range(d) for k in range(d)]
    subset = tuple(labels[p] for p in pivots[:rank])
    return IndependenceReport(
        dim=d,
        rank=rank,
        n_parameters=d * d - 1,
        lam=lam,
        lam_tilde=lam_t,
        singular_values=singular,
        independent_subset=subset,
    )
