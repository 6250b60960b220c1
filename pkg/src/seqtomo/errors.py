"""Exception types shared across the package."""


class SeqtomoError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(SeqtomoError):
    """Operands live in Hilbert spaces of different dimension."""


class NonComplementaryPairError(SeqtomoError):
    """A basis pair has an overlap below the complementarity threshold."""


class InvalidMeterError(SeqtomoError):
    """A meter state violates the validity conditions beyond tolerance."""


class GridSafetyError(SeqtomoError):
    """A requested translation risks periodic wrap-around on the grid."""


class StrongCouplingSingularError(SeqtomoError):
    """The coupling response is (numerically) zero: off-diagonal state
    information is unrecoverable and the inversion is singular."""


class DegenerateRecoveryError(SeqtomoError):
    """Re{lambda * conj(lambda_tilde)} is (numerically) zero: the linear
    system recovering the imaginary part of the quasi-probability from the
    measured correlations is singular."""


class PhysicalityError(SeqtomoError):
    """A matrix fails a density-matrix invariant beyond tolerance."""


class ConfigError(SeqtomoError):
    """An experiment configuration violates a module precondition."""
