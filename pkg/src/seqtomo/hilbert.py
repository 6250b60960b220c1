"""Finite-dimensional complex linear algebra for the tomography scheme.

States are density matrices, measurements are projector families, and the
two measurement bases are bundled into a :class:`BasisPair` that carries
the overlap matrix consumed by the forward model and the reconstruction.
All containers are immutable after construction and all operations are
pure functions, so everything here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, NonComplementaryPairError, PhysicalityError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
UNITARY_TOL = 1e-12
PSD_SLACK = 1e-10
DEGENERACY_REL_TOL = 1e-9
DEFAULT_ETA = 1e-8


def _as_complex_matrix(elements, name: str) -> np.ndarray:
    m = np.array(elements, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    m.setflags(write=False)
    return m


def complex_matrix_to_json(matrix: np.ndarray) -> list:
    """Row-major nested arrays of [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix)]


def complex_matrix_from_json(data) -> np.ndarray:
    arr = np.array(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("expected nested arrays of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True)
class DensityMatrix:
    """A d x d Hermitian, positive-semidefinite, unit-trace matrix.

    Construction validates all three invariants (Hermiticity and trace at
    1e-12, least eigenvalue >= -1e-10 to absorb eigensolver round-off).
    """

    elements: np.ndarray

    def __post_init__(self):
        m = _as_complex_matrix(self.elements, "elements")
        object.__setattr__(self, "elements", m)
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise PhysicalityError("density matrix is not Hermitian within 1e-12")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise PhysicalityError(f"density matrix trace {tr} differs from 1 beyond 1e-12")
        if np.min(np.linalg.eigvalsh(m)) < -PSD_SLACK:
            raise PhysicalityError("density matrix has an eigenvalue below -1e-10")

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def to_json(self) -> dict:
        return {"dim": self.dim, "elements": complex_matrix_to_json(self.elements)}

    @classmethod
    def from_json(cls, data: dict) -> DensityMatrix:
        m = complex_matrix_from_json(data["elements"])
        if m.shape[0] != data["dim"]:
            raise ValueError("dim field inconsistent with elements shape")
        return cls(m)


@dataclass(frozen=True)
class OrthonormalBasis:
    """An orthonormal basis stored as the columns of a d x d matrix."""

    vectors: np.ndarray

    def __post_init__(self):
        v = _as_complex_matrix(self.vectors, "vectors")
        object.__setattr__(self, "vectors", v)
        gram = v.conj().T @ v
        if np.max(np.abs(gram - np.eye(v.shape[0]))) > UNITARY_TOL:
            raise ValueError("basis vectors are not orthonormal within 1e-12")

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def vector(self, i: int) -> np.ndarray:
        return self.vectors[:, i]

    @classmethod
    def standard(cls, d: int) -> OrthonormalBasis:
        return cls(np.eye(d, dtype=complex))


@dataclass(frozen=True)
class BasisPair:
    """Two orthonormal bases with no mutually orthogonal vectors.

    ``overlaps[mu][k]`` holds <mu|k>, the inner product of the mu-th vector
    of the second basis with the k-th vector of the first.  Complementarity
    requires every overlap modulus to be at least ``eta``; the overlap
    matrix is unitary by construction and re-checked at 1e-12.
    """

    first: OrthonormalBasis
    second: OrthonormalBasis
    eta: float = DEFAULT_ETA
    overlaps: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.first.dim != self.second.dim:
            raise DimensionMismatchError("basis dimensions differ")
        ov = self.second.vectors.conj().T @ self.first.vectors
        ov.setflags(write=False)
        object.__setattr__(self, "overlaps", ov)
        d = self.first.dim
        if np.max(np.abs(ov.conj().T @ ov - np.eye(d))) > UNITARY_TOL:
            raise ValueError("overlap matrix is not unitary within 1e-12")
        smallest = np.min(np.abs(ov))
        if smallest < self.eta:
            raise NonComplementaryPairError(
                f"overlap modulus {smallest:.3e} below threshold eta={self.eta:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.first.dim


def fourier_pair(d: int, eta: float = DEFAULT_ETA) -> BasisPair:
    """Standard basis paired with its discrete-Fourier partner.

    The second basis has components <k|mu> = exp(2*pi*i*k*mu/d)/sqrt(d),
    so every overlap has modulus 1/sqrt(d) and the pair is complementary
    for every d >= 2.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    k = np.arange(d)
    second = np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)
    return BasisPair(OrthonormalBasis.standard(d), OrthonormalBasis(second), eta=eta)


def random_density_matrix(d: int, seed: int, purity: str = "mixed") -> DensityMatrix:
    """Deterministic random test state: rank one for "pure", generically
    full rank for "mixed" (normalized G G^dag with complex-normal G)."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    rng = np.random.default_rng(seed)
    if purity == "pure":
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
    elif purity == "mixed":
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
    else:
        raise ValueError(f"unknown purity {purity!r}, expected 'pure' or 'mixed'")
    rho = (rho + rho.conj().T) / 2
    rho /= np.trace(rho).real
    return DensityMatrix(rho)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the sum of absolute eigenvalues of a - b."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions differ: {a.dim} vs {b.dim}")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a.elements - b.elements))))


@dataclass(frozen=True)
class ObservableSpectral:
    """A Hermitian observable as distinct eigenvalues plus eigenprojectors.

    Projectors may have rank above one (degenerate eigenvalues).  The
    family must be orthogonal and complete at 1e-12; both are re-checked
    on construction because the downstream sums are indexed by
    eigenprojector, not by eigenvector.
    """

    eigenvalues: np.ndarray
    projectors: tuple

    def __post_init__(self):
        vals = np.array(self.eigenvalues, dtype=float)
        vals.setflags(write=False)
        projs = tuple(_as_complex_matrix(p, "projector") for p in self.projectors)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "projectors", projs)
        if len(projs) != len(vals) or len(vals) == 0:
            raise ValueError("need one projector per eigenvalue")
        if len(np.unique(vals)) != len(vals):
            raise ValueError("eigenvalues must be distinct")
        d = projs[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for i, p in enumerate(projs):
            if p.shape[0] != d:
                raise DimensionMismatchError("projector dimensions differ")
            for j, q in enumerate(projs):
                expect = p if i == j else 0.0
                if np.max(np.abs(p @ q - expect)) > 1e-12:
                    raise ValueError("projectors are not mutually orthogonal within 1e-12")
            total += p
        if np.max(np.abs(total - np.eye(d))) > 1e-12:
            raise ValueError("projectors do not sum to the identity within 1e-12")

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def matrix(self) -> np.ndarray:
        """Reassemble sum_n a_n P_n."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for a, p in zip(self.eigenvalues, self.projectors):
            out += a * p
        return out

    @classmethod
    def from_matrix(cls, matrix, degeneracy_rel_tol: float = DEGENERACY_REL_TOL) -> ObservableSpectral:
        """Spectral decomposition with explicit degeneracy grouping.

        Eigenvalues closer than ``degeneracy_rel_tol`` (relative to the
        spectral scale) are merged into a single projector, since the
        correlation sums depend on the eigenprojector structure.
        """
        m = np.asarray(matrix, dtype=complex)
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("observable must be Hermitian")
        evals, evecs = np.linalg.eigh(m)
        scale = max(1.0, float(np.max(np.abs(evals))))
        gap = degeneracy_rel_tol * scale
        groups: list[list[int]] = [[0]]
        for i in range(1, len(evals)):
            if evals[i] - evals[groups[-1][-1]] <= gap:
                groups[-1].append(i)
            else:
                groups.append([i])
        values = []
        projectors = []
        for idx in groups:
            vecs = evecs[:, idx]
            projectors.append(vecs @ vecs.conj().T)
            values.append(float(np.mean(evals[idx])))
        return cls(np.array(values), tuple(projectors))

    @classmethod
    def rank_one_projector(cls, vector: np.ndarray) -> ObservableSpectral:
        """The two-outcome observable |v><v| with eigenvalues 1 and 0."""
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        p = np.outer(v, v.conj())
        d = len(v)
        return cls(np.array([1.0, 0.0]), (p, np.eye(d, dtype=complex) - p))
