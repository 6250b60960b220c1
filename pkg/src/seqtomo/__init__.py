"""Quantum state tomography from successive projector measurements.

Forward-simulates the meter correlations of the two-meter successive
measurement scheme, validates them against a brute-force grid oracle, and
inverts them back to the density matrix.
"""

from .errors import (
    ConfigError,
    DegenerateRecoveryError,
    DimensionMismatchError,
    GridSafetyError,
    InvalidMeterError,
    NonComplementaryPairError,
    PhysicalityError,
    SeqtomoError,
    StrongCouplingSingularError,
)
from .forward import (
    CorrelationSet,
    SuccessiveSetup,
    WTable,
    corr_pq,
    corr_qq,
    correlation_set,
    w11_projector,
    w_general,
)
from .hilbert import (
    BasisPair,
    DensityMatrix,
    ObservableSpectral,
    OrthonormalBasis,
    fourier_pair,
    random_density_matrix,
    trace_distance,
)
from .meters import (
    GaussianMeter,
    GridMeter,
    MeterResponse,
    MeterValidity,
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
from .oracle import (
    JointState,
    evolve,
    expect_meter_product,
    joint_state,
    meter_marginals,
    oracle_correlation_set,
    oracle_correlations,
)
from .quasiprob import (
    QuasiProbTable,
    expectation_via_quasiprob,
    quasiprob_of_state,
    transform_observable,
    transform_table,
)
from .reconstruct import (
    IndependenceReport,
    NoisyReconstructionReport,
    RecoveredW,
    independence_report,
    noisy_reconstruct,
    populations_from_correlations,
    project_to_physical,
    qubit_reconstruct,
    reconstruct,
    recover_w11,
    rho_from_w11,
    rho_from_w11_tilde,
)

__version__ = "0.1.0"
