"""Error taxonomy shared by all solver and diagnostic modules.

Every failure mode that callers are expected to handle has its own class so
that tests and the CLI can react to the precise condition rather than pattern
matching on messages.
"""


class MagrelaxError(Exception):
    """Base class for all package errors."""


class UnwrapAmbiguous(MagrelaxError):
    """Adjacent angle samples jump by ~pi, so the branch choice is a coin flip."""


class ZeroModulus(MagrelaxError):
    """Polar decomposition requested where |b| is below the configured floor."""


class JacobianCollapse(MagrelaxError):
    """Characteristic map stopped being a diffeomorphism (min J under floor)."""


class NoConvergence(MagrelaxError):
    """Relaxation did not reach the requested tolerance by t_max."""


class ModulusVanishes(MagrelaxError):
    """Initial field violates the strictly positive modulus hypothesis."""


class SolverSingular(MagrelaxError):
    """Linear system in a semi-implicit step is numerically singular."""


class StabilityViolated(MagrelaxError):
    """Explicit integrator asked to run above its stability bound."""


class BlowupDetected(MagrelaxError):
    """Gradient threshold crossed. A finding, not a failure: normally carried
    in reports rather than raised."""


class NumericalInstability(MagrelaxError):
    """Runtime invariant check tripped during a run that should stay smooth."""


class InsufficientSampling(MagrelaxError):
    """Trajectory recorded too sparsely for the requested check."""


class FitFailed(MagrelaxError):
    """Curve fit under-determined (too short a run, or no decay segment)."""


class SymmetryViolated(MagrelaxError):
    """Evenness drifted beyond tolerance in a symmetry-preserving run."""


class WindowTooShort(MagrelaxError):
    """Requested comparison window exceeds the available lifespan."""


class ConfigError(MagrelaxError):
    """Malformed configuration file or option set (CLI exit code 1)."""
