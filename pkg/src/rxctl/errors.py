"""Exception and warning types shared across the toolkit."""


class RxctlError(Exception):
    """Base class for all toolkit errors."""


# reactor model

class SingularThermalSystem(RxctlError):
    """The steady-state thermal 2x2 solve is degenerate."""


class UnsupportedGroupCount(RxctlError):
    """Linearization only supports a single lumped delayed-neutron group."""


class StepSizeTooLarge(RxctlError):
    """Integration step exceeds the stability margin of the fast mode."""


class NonFiniteState(RxctlError):
    """A state component became inf or NaN during integration."""


class SingularA(RxctlError):
    """The system matrix is not invertible, so no dc gain exists."""


class NumericalConditioning(UserWarning):
    """Polynomial root residual larger than expected for a healthy system."""


# fractional filters

class OrderOutOfRange(RxctlError):
    """Differintegration order outside the supported interval."""


class BadBand(RxctlError):
    """Fit band is empty or inverted (need 0 < omega_b < omega_h)."""


class FrequencyWarpWarning(UserWarning):
    """Sample rate too low for the upper fit frequency; bilinear warping is large."""


# fuzzy engine

class DegenerateAggregate(RxctlError):
    """Aggregated output membership has zero area (guarded; infer returns 0)."""


# controller

class ConfigMismatch(RxctlError):
    """Controller state was built for a different config (orders or dt)."""


# stochastic tools

class LengthMismatch(RxctlError):
    """Delay and signal series must have equal length."""


class SeriesTooShort(RxctlError):
    """Series too short for the requested block sizes."""


class ZeroVariance(RxctlError):
    """Series has no variance; the statistic is undefined."""


# simulation

class DivergedSimulation(RxctlError):
    """Closed-loop state became non-finite.

    Carries the simulation time at which divergence was detected.
    """

    def __init__(self, t: float):
        self.t = t
        super().__init__(f"simulation diverged at t = {t:.6g} s")


class ConfigError(RxctlError):
    """Invalid scenario or tuner configuration."""
