"""Exception hierarchy for distribution construction and analysis."""


class PhotonThinError(Exception):
    """Base class for all errors raised by this package."""


class DistributionError(PhotonThinError, ValueError):
    """Invalid distribution data or parameters."""


class NegativeMassError(DistributionError):
    """A probability mass is negative."""


class DuplicateIndexError(DistributionError):
    """The same outcome index appears more than once."""


class NotNormalizedError(DistributionError):
    """Masses (plus tail defect) do not sum to one within tolerance."""


class InvalidParameterError(DistributionError):
    """A parameter is outside its documented domain."""


class ZeroMeanError(DistributionError):
    """The distribution has zero mean, so mean-normalized quantities are undefined."""


class TargetExceedsMeanError(DistributionError):
    """A requested post-attenuation mean exceeds the input mean."""


class TermOverflowError(PhotonThinError, OverflowError):
    """A log-space term exceeds the representable floating-point range."""


class AllVacuumError(DistributionError):
    """All mass sits at zero photons, so conditional risk is undefined."""


class DegenerateLambdaError(DistributionError):
    """The post-attenuation mean is zero, so no reference Poisson exists."""
