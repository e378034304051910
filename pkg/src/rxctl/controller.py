"""Fuzzy fractional-order PID controller.

The error and its band-limited fractional derivative are scaled, clamped
to the fuzzy universe, pushed through the Mamdani engine, and the engine
output feeds two branches: a fractional integral scaled by K_PI and a
direct path scaled by K_PD. Setting both orders to 1 recovers the
conventional fuzzy PID.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import fracops, fuzzy
from .errors import ConfigMismatch

DEFAULT_DT = 0.002


@dataclass(frozen=True)
class FuzzyFOPIDConfig:
    """The six decision variables plus the controller sample period."""

    K_e: float
    K_d: float
    K_PI: float
    K_PD: float
    lambda_order: float
    mu_order: float
    dt: float = DEFAULT_DT

    def __post_init__(self):
        for name in ("K_e", "K_d", "K_PI", "K_PD"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 < self.lambda_order <= 1:
            raise ValueError("lambda_order must lie in (0, 1]")
        if not 0 < self.mu_order <= 1:
            raise ValueError("mu_order must lie in (0, 1]")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


class ControllerState:
    """Mutable filter memories for one control loop instance."""

    def __init__(self, cfg: FuzzyFOPIDConfig):
        self._key = (cfg.lambda_order, cfg.mu_order, cfg.dt)
        # mu = 1 means a plain backward difference, not a band-limited stage
        self._deriv = (None if cfg.mu_order == 1.0
                       else fracops.frac_derivative_stream(cfg.mu_order, cfg.dt))
        self._integ = fracops.frac_integral_stream(cfg.lambda_order, cfg.dt)
        self._prev_e = 0.0
        self.last_output = 0.0

    def reset(self):
        if self._deriv is not None:
            self._deriv.reset()
        self._integ.reset()
        self._prev_e = 0.0
        self.last_output = 0.0


def new_state(cfg: FuzzyFOPIDConfig) -> ControllerState:
    return ControllerState(cfg)


def step(cfg: FuzzyFOPIDConfig, state: ControllerState, e: float,
         rules: fuzzy.RuleBase = fuzzy.DEFAULT_RULES) -> float:
    """One control update for one error sample."""
    if state._key != (cfg.lambda_order, cfg.mu_order, cfg.dt):
        raise ConfigMismatch("state was built for different orders or dt")
    if state._deriv is None:
        d = (e - state._prev_e) / cfg.dt
        state._prev_e = e
    else:
        d = state._deriv.step(e)
    e_n = min(1.0, max(-1.0, cfg.K_e * e))
    d_n = min(1.0, max(-1.0, cfg.K_d * d))
    v = fuzzy.infer(e_n, d_n, rules)
    u = cfg.K_PI * state._integ.step(v) + cfg.K_PD * v
    state.last_output = u
    return u


def flc_slope(h: float = 1e-3) -> float:
    """Small-signal slope of the fuzzy engine at the origin (central
    finite difference along the error axis)."""
    return (fuzzy.infer(h, 0.0) - fuzzy.infer(-h, 0.0)) / (2 * h)


def small_signal_gains(cfg: FuzzyFOPIDConfig) -> tuple[float, float, float]:
    """Linearized gain analogs (proportional, integral branch, derivative
    branch) obtained by replacing the fuzzy engine with its small-signal
    slope S at the origin."""
    S = flc_slope()
    return (cfg.K_PD * S * cfg.K_e,
            cfg.K_PI * S * cfg.K_e,
            cfg.K_PD * S * cfg.K_d)


# Published tuned parameter sets, keyed by preset name. Deterministic
# presets are named <kind>-<tuning power>; noise-aware presets append the
# noise character they were tuned under. Values are
# (K_e, K_d, K_PI, K_PD, lambda, mu).
PRESETS: dict[str, tuple[float, float, float, float, float, float]] = {
    "fopid-100": (0.3236, 0.0683, 4.557, 0.124, 0.9643, 0.0958),
    "pid-100": (0.9918, 0.0061, 1.2510, 0.001, 1.0, 1.0),
    "fopid-20": (0.6534, 0.3349, 2.189, 0.092, 0.8407, 0.0254),
    "pid-20": (0.9859, 0.0059, 1.876, 0.067, 1.0, 1.0),
    "fopid-100-persistent": (0.1145, 0.0796, 0.9951, 0.0488, 0.9361, 0.0863),
    "pid-100-persistent": (0.9624, 0.0011, 0.1245, 0.0011, 1.0, 1.0),
    "fopid-20-persistent": (0.6436, 0.1946, 1.4269, 0.0514, 0.8779, 0.0569),
    "pid-20-persistent": (0.9708, 0.0021, 0.5439, 0.0019, 1.0, 1.0),
    "fopid-100-white": (0.1674, 0.0010, 1.6514, 0.0361, 0.9408, 0.7431),
    "pid-100-white": (0.3229, 0.0010, 1.1039, 0.0212, 1.0, 1.0),
    "fopid-20-white": (0.5916, 0.1182, 1.0812, 0.0580, 0.8823, 0.0010),
    "pid-20-white": (0.9979, 0.0010, 0.9718, 0.0402, 1.0, 1.0),
    "fopid-100-anti": (0.0802, 0.4775, 0.1638, 0.0075, 0.9866, 0.0148),
    "pid-100-anti": (0.9166, 0.0010, 0.4412, 0.0109, 1.0, 1.0),
    "fopid-20-anti": (0.0928, 0.2729, 0.9870, 0.0122, 0.9875, 0.0036),
    "pid-20-anti": (0.9985, 0.0166, 1.5201, 0.0291, 1.0, 1.0),
}


def preset(name: str, dt: float = DEFAULT_DT) -> FuzzyFOPIDConfig:
    """Look up a named tuned parameter set at the given sample period."""
    try:
        K_e, K_d, K_PI, K_PD, lam, mu = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from "
                       f"{sorted(PRESETS)}") from None
    return FuzzyFOPIDConfig(K_e, K_d, K_PI, K_PD, lam, mu, dt)
