"""Brute-force validation path on a position grid.

Builds the full system x meter1 x meter2 state, applies each impulsive
interaction exp(-i*eps*A (x) P) exactly (projector by projector, with the
meter translation diagonal in momentum space), and reads meter
correlations straight off the evolved state.  Nothing here reuses the
analytic correlation formulas, so agreement between the two paths is a
meaningful end-to-end check.

Mixed states (system or meters) are expanded into weighted pure branches;
the evolution and the expectations are linear in each initial density
operator, so the weighted sum over branches is exact and the memory cost
stays at one wavefunction per branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import DimensionMismatchError, GridSafetyError
from .forward import CorrelationSet
from .hilbert import BasisPair, DensityMatrix, ObservableSpectral
from .meters import (
    DEFAULT_EXTENT_SIGMAS,
    DEFAULT_GRID_POINTS,
    GaussianMeter,
    GridMeter,
    Meter,
    lambda_response,
    lambda_tilde,
)

DEFAULT_METER2_POINTS = 256
BRANCH_WEIGHT_CUTOFF = 1e-12


@dataclass(frozen=True)
class MeterGrid:
    n_points: int
    extent: float

    @property
    def dq(self) -> float:
        return self.extent / self.n_points

    @property
    def positions(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.dq

    @property
    def momenta(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dq)


@dataclass(frozen=True)
class JointState:
    """Weighted pure branches of shape (system_dim, n1, n2)."""

    system_dim: int
    grid1: MeterGrid
    grid2: MeterGrid
    branches: tuple

    def __post_init__(self):
        total_weight = 0.0
        for weight, norm in zip((w for w, _ in self.branches), self.branch_norms()):
            if abs(norm - 1.0) > 1e-10:
                raise ValueError(f"branch norm {norm} differs from 1 beyond 1e-10")
            total_weight += weight
        if abs(total_weight - 1.0) > 1e-10:
            raise ValueError("branch weights must sum to 1")
        shape = (self.system_dim, self.grid1.n_points, self.grid2.n_points)
        for _, amp in self.branches:
            if amp.shape != shape:
                raise ValueError("branch amplitude shape mismatch")

    def branch_norms(self) -> list[float]:
        norm_factor = self.grid1.dq * self.grid2.dq
        return [
            float(np.vdot(amp, amp).real * norm_factor) for _, amp in self.branches
        ]


def _meter_components(meter: Meter, n_points: int | None, extent: float | None, default_points: int):
    """Resolve a meter to (grid, [(weight, psi)]) on its evaluation grid."""
    if isinstance(meter, GridMeter):
        if (n_points is not None and n_points != meter.n_points) or (
            extent is not None and extent != meter.extent
        ):
            raise ValueError("grid meters carry their own grid; do not override it")
        grid = MeterGrid(meter.n_points, meter.extent)
        return grid, list(zip(meter.weights, meter.psis))
    n = n_points if n_points is not None else default_points
    ext = extent if extent is not None else DEFAULT_EXTENT_SIGMAS * meter.sigma_q
    grid = MeterGrid(n, ext)
    psi = meter.position_wavefunction(grid.positions).astype(complex)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dq)
    return grid, [(1.0, psi)]


def joint_state(
    rho: DensityMatrix,
    meter1: Meter,
    meter2: Meter,
    n1: int | None = None,
    extent1: float | None = None,
    n2: int | None = None,
    extent2: float | None = None,
) -> JointState:
    """Initial product state, expanded into pure branches.

    Meter 1 defaults to the fine grid (1024 points over 20 sigma_q for a
    Gaussian); meter 2 may be far coarser (256 points) because only
    functionals linear in its position ever get evaluated.
    """
    grid1, comps1 = _meter_components(meter1, n1, extent1, DEFAULT_GRID_POINTS)
    grid2, comps2 = _meter_components(meter2, n2, extent2, DEFAULT_METER2_POINTS)
    evals, evecs = np.linalg.eigh(rho.elements)
    meter_outer = [
        (w1 * w2, psi1[:, None] * psi2[None, :])
        for w1, psi1 in comps1
        for w2, psi2 in comps2
    ]
    branches = []
    for idx, prob in enumerate(evals):
        if prob < BRANCH_WEIGHT_CUTOFF:
            continue
        system = evecs[:, idx]
        for wm, outer in meter_outer:
            amp = system[:, None, None] * outer[None, :, :]
            branches.append((float(prob * wm), amp))
    total = sum(w for w, _ in branches)
    branches = tuple((w / total, amp) for w, amp in branches)
    return JointState(system_dim=rho.dim, grid1=grid1, grid2=grid2, branches=branches)


def _axis_reshape(values: np.ndarray, axis: int) -> np.ndarray:
    shape = [1, 1, 1]
    shape[axis] = len(values)
    return values.reshape(shape)


def evolve(joint: JointState, observable: ObservableSpectral, meter_index: int, eps: float) -> JointState:
    """Apply exp(-i*eps * observable (x) P_meter) exactly.

    Each eigenprojector component of the system gets its meter wavepacket
    translated by eps times the eigenvalue, implemented as a phase in
    momentum space.  Norm-preserving by completeness of the projectors.
    """
    if meter_index not in (1, 2):
        raise ValueError("meter_index must be 1 or 2")
    if observable.dim != joint.system_dim:
        raise DimensionMismatchError("observable dimension differs from the system")
    grid = joint.grid1 if meter_index == 1 else joint.grid2
    axis = meter_index
    max_shift = abs(eps) * float(np.max(np.abs(observable.eigenvalues)))
    if max_shift > grid.extent / 4:
        raise GridSafetyError(
            f"shift {max_shift} exceeds extent/4 = {grid.extent / 4} on meter {meter_index}; "
            "periodic wrap-around would corrupt the correlations"
        )
    # Rotate the system index into the observable eigenbasis so each row
    # picks up a single translation phase, then rotate back: identical to
    # summing projector components, at two matmuls per branch.
    basis, column_values = _eigenbasis(observable)
    phases = np.exp(-1j * eps * np.outer(column_values, grid.momenta))
    phases = phases[:, :, None] if axis == 1 else phases[:, None, :]
    new_branches = []
    for weight, amp in joint.branches:
        amp_k = scipy.fft.fft(amp, axis=axis)
        rotated = _apply_system_matrix(basis.conj().T, amp_k)
        rotated *= phases
        out = _apply_system_matrix(basis, rotated)
        new_branches.append((weight, scipy.fft.ifft(out, axis=axis)))
    return JointState(
        system_dim=joint.system_dim,
        grid1=joint.grid1,
        grid2=joint.grid2,
        branches=tuple(new_branches),
    )


def _eigenbasis(observable: ObservableSpectral) -> tuple[np.ndarray, np.ndarray]:
    """Unitary whose columns span the eigenprojectors, with one grouped
    eigenvalue per column."""
    columns = []
    values = []
    for value, projector in zip(observable.eigenvalues, observable.projectors):
        evals, evecs = np.linalg.eigh(projector)
        keep = evals > 0.5
        columns.append(evecs[:, keep])
        values.extend([value] * int(np.sum(keep)))
    return np.hstack(columns), np.array(values)


def _apply_system_matrix(matrix: np.ndarray, amp: np.ndarray) -> np.ndarray:
    d = amp.shape[0]
    return (matrix @ amp.reshape(d, -1)).reshape(amp.shape)


def expect_meter_product(joint: JointState, op1: str, op2: str) -> float:
    """Expectation of op1 on meter 1 times op2 on meter 2 (each Q or P).

    Q is diagonal in position; P is evaluated in momentum representation
    (each P axis gets one forward transform and a 1/n Parseval factor).
    The two operators act on different meters and commute, so the product
    is Hermitian; the imaginary residue is asserted tiny and dropped.
    """
    for op in (op1, op2):
        if op not in ("Q", "P"):
            raise ValueError(f"unknown meter operator {op!r}, expected 'Q' or 'P'")
    norm_factor = joint.grid1.dq * joint.grid2.dq
    total = 0j
    for weight, amp in joint.branches:
        work = amp
        factor = weight * norm_factor
        diagonal = np.ones((1, 1, 1))
        for axis, op, grid in ((1, op1, joint.grid1), (2, op2, joint.grid2)):
            if op == "P":
                work = scipy.fft.fft(work, axis=axis)
                factor /= grid.n_points
                diagonal = diagonal * _axis_reshape(grid.momenta, axis)
            else:
                diagonal = diagonal * _axis_reshape(grid.positions, axis)
        total += factor * np.vdot(work, diagonal * work)
    if abs(total.imag) > 1e-10:
        raise AssertionError(f"meter product expectation has imaginary part {total.imag}")
    return float(total.real)


def meter_marginals(joint: JointState) -> dict:
    """Diagnostics dump of both meter marginals (JSON-serializable)."""
    out = {}
    norm_factor = joint.grid1.dq * joint.grid2.dq
    for index, grid in ((1, joint.grid1), (2, joint.grid2)):
        axis = index
        other_axis = 2 if index == 1 else 1
        other_dq = joint.grid2.dq if index == 1 else joint.grid1.dq
        density = np.zeros(grid.n_points)
        mean_p = 0.0
        for weight, amp in joint.branches:
            probs = np.abs(amp) ** 2
            density += weight * probs.sum(axis=(0, other_axis)) * other_dq
            amp_k = scipy.fft.fft(amp, axis=axis)
            momenta = _axis_reshape(grid.momenta, axis)
            mean_p += weight * float(
                np.vdot(amp_k, momenta * amp_k).real * norm_factor / grid.n_points
            )
        mean_q = float(np.sum(grid.positions * density) * grid.dq)
        out[f"meter{index}"] = {
            "positions": [float(q) for q in grid.positions],
            "density": [float(v) for v in density],
            "mean_q": mean_q,
            "mean_p": mean_p,
        }
    return out


def oracle_correlations(
    rho: DensityMatrix,
    first_observable: ObservableSpectral,
    second_observable: ObservableSpectral,
    meter1: Meter,
    meter2: Meter,
    eps1: float,
    eps2: float,
    n1: int | None = None,
    extent1: float | None = None,
    n2: int | None = None,
    extent2: float | None = None,
) -> tuple[float, float]:
    """(<Q1 Q2>, <P1 Q2>) from the evolved joint state."""
    state = joint_state(rho, meter1, meter2, n1=n1, extent1=extent1, n2=n2, extent2=extent2)
    state = evolve(state, first_observable, 1, eps1)
    state = evolve(state, second_observable, 2, eps2)
    return expect_meter_product(state, "Q", "Q"), expect_meter_product(state, "P", "Q")


def oracle_correlation_set(
    rho: DensityMatrix,
    pair: BasisPair,
    meter1: Meter,
    meter2: Meter,
    eps1: float,
    eps2: float,
    n1: int | None = None,
    extent1: float | None = None,
    n2: int | None = None,
    extent2: float | None = None,
) -> CorrelationSet:
    """Measure the full projector scheme on the grid.

    The response metadata still comes from the meter model: the apparatus
    state is known, which is exactly the assumption the recovery step
    makes about real measurements.
    """
    d = pair.dim
    x = np.empty((d, d))
    y_tilde = np.empty((d, d))
    sigma_sq = float(meter1.sigma_p_sq)
    initial = joint_state(rho, meter1, meter2, n1=n1, extent1=extent1, n2=n2, extent2=extent2)
    for k in range(d):
        obs_first = ObservableSpectral.rank_one_projector(pair.first.vector(k))
        after_first = evolve(initial, obs_first, 1, eps1)
        for mu in range(d):
            obs_second = ObservableSpectral.rank_one_projector(pair.second.vector(mu))
            state = evolve(after_first, obs_second, 2, eps2)
            x[mu, k] = expect_meter_product(state, "Q", "Q") / (eps1 * eps2)
            y_tilde[mu, k] = expect_meter_product(state, "P", "Q") / (2 * sigma_sq * eps1 * eps2)
    return CorrelationSet(
        dim=d,
        x=x,
        y_tilde=y_tilde,
        eps1=eps1,
        eps2=eps2,
        lambda_eps1=lambda_response(meter1, eps1),
        lambda_tilde_eps1=lambda_tilde(meter1, eps1),
        sigma_p1_sq=sigma_sq,
    )
