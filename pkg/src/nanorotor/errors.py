"""Exception types raised across the simulator."""


class NanorotorError(Exception):
    """Base class for all simulator errors."""


class SingularityGuard(NanorotorError):
    """Trajectory approached the beta = 0 or pi coordinate singularity.

    Trapped motion stays near beta = pi/2; hitting the guard means the
    particle is leaving the trap and the Euler-angle description breaks down.
    """


class StepUnderflow(NanorotorError):
    """Adaptive integrator required a step below dt_min."""


class InvalidMaterial(NanorotorError):
    """Refractive index or geometry outside the physical range."""


class RejectionCapExceeded(NanorotorError):
    """Rejection sampler exhausted its proposal budget."""


class FitDegenerate(NanorotorError):
    """Mode or distribution fit is underdetermined or too poor to trust."""


class ParameterOrderViolation(NanorotorError):
    """Librational frequencies supplied in an unsupported order."""


class InsufficientData(NanorotorError):
    """Time series too short for the requested spectral estimate."""


class PeaksNotFound(NanorotorError):
    """Fewer spectral peaks above the noise floor than requested."""


class ExperimentFailed(NanorotorError):
    """More than the tolerated fraction of ensemble trajectories failed."""


class UnknownScenario(NanorotorError):
    """Scenario name not present in the registry."""


class ParseError(NanorotorError):
    """Config file is syntactically invalid or contains unknown keys."""


class ValidationError(NanorotorError):
    """Config values are physically invalid (e.g. theta >= pi/4)."""
