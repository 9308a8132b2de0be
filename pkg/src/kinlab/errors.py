"""Exception types shared across the lab."""


class KinlabError(Exception):
    """Base class for every error raised by the package."""


class DegenerateFields(KinlabError):
    """Vacuum or cold macroscopic state (rho = 0 or T = 0)."""


class ZeroMass(KinlabError):
    pass


class QuadratureFailure(KinlabError):
    pass


class UnknownTail(KinlabError):
    """Integrand still growing at the cutoff and no tail exponent was supplied."""


class BadShell(KinlabError):
    pass


class BadTemperature(KinlabError):
    pass


class BadGamma(KinlabError):
    pass


class DomainViolation(KinlabError):
    pass


class IterationBudget(KinlabError):
    pass


class RegimeViolation(KinlabError):
    pass


class BadSigma(KinlabError):
    pass


class MajorantOverflow(KinlabError):
    pass


class ReconstructionFailure(KinlabError):
    pass


class AdmissibilityViolation(KinlabError):
    pass


class ConfigError(KinlabError):
    pass


class MissingArtifact(KinlabError):
    pass
