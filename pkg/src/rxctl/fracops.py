"""Band-limited fractional differintegral operators and fGn synthesis.

s^alpha is approximated over a finite frequency band by a recursive
zero-pole ladder, realized in discrete time as a cascade of bilinear
first-order sections. Fractional Gaussian noise is produced by shaping
seeded white Gaussian noise through the same machinery.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import BadBand, FrequencyWarpWarning, OrderOutOfRange

# Default design shared by the controller branches: half-order N = 2
# (5th-order filter) fit on [1e-2, 1e2] rad/s.
DEFAULT_N = 2
DEFAULT_BAND = (1e-2, 1e2)

FGN_WARMUP = 2000  # samples discarded so the shaping filter reaches stationarity


@dataclass(frozen=True)
class OustaloupFilter:
    """Rational band-limited approximation of s^alpha.

    zeros and poles are the (negative real) roots of the rational
    function H(s) = gain * prod (s - z_k) / (s - p_k).
    """

    alpha: float
    N: int
    omega_b: float
    omega_h: float
    zeros: tuple[float, ...]
    poles: tuple[float, ...]
    gain: float


@dataclass
class DiscreteFilter:
    """Sampled cascade of first-order sections.

    Each section is y = b0*x + s, s' = b1*x - a1*y (one delay state per
    section); the overall gain multiplies the cascade output.
    """

    sections: list[tuple[float, float, float]]
    gain: float
    dt: float
    state: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.state:
            self.state = [0.0] * len(self.sections)

    def reset(self):
        self.state = [0.0] * len(self.sections)


def oustaloup_design(alpha: float, N: int = DEFAULT_N,
                     omega_b: float = DEFAULT_BAND[0],
                     omega_h: float = DEFAULT_BAND[1]) -> OustaloupFilter:
    """Recursive zero-pole design of s^alpha over [omega_b, omega_h].

    Corner frequencies are geometrically spaced across the band with the
    zero/pole interleave offset by alpha; gain is omega_h^alpha.
    """
    if not -1.0 <= alpha <= 1.0:
        raise OrderOutOfRange(f"alpha = {alpha} outside [-1, 1]")
    if N < 1 or int(N) != N:
        raise OrderOutOfRange(f"N = {N} must be an integer >= 1")
    if not 0 < omega_b < omega_h:
        raise BadBand(f"need 0 < omega_b < omega_h, got [{omega_b}, {omega_h}]")
    N = int(N)
    ks = np.arange(-N, N + 1)
    ratio = omega_h / omega_b
    pole_freqs = omega_b * ratio ** ((ks + N + 0.5 * (1 + alpha)) / (2 * N + 1))
    zero_freqs = omega_b * ratio ** ((ks + N + 0.5 * (1 - alpha)) / (2 * N + 1))
    return OustaloupFilter(
        alpha=float(alpha), N=N, omega_b=float(omega_b), omega_h=float(omega_h),
        zeros=tuple(-zero_freqs), poles=tuple(-pole_freqs),
        gain=float(omega_h ** alpha))


def freq_response(filt: OustaloupFilter, omega) -> np.ndarray:
    """Complex frequency response H(j*omega) of the analog design."""
    s = 1j * np.atleast_1d(np.asarray(omega, dtype=float))
    H = np.full(s.shape, filt.gain, dtype=complex)
    for z, p in zip(filt.zeros, filt.poles):
        H *= (s - z) / (s - p)
    return H


def analog_dc_gain(filt: OustaloupFilter) -> float:
    """s -> 0 limit of the analog filter."""
    g = filt.gain
    for z, p in zip(filt.zeros, filt.poles):
        g *= z / p
    return g


def discretize(filt: OustaloupFilter, dt: float) -> DiscreteFilter:
    """Bilinear transform of each first-order factor.

    The trapezoidal map preserves stability and maps s = 0 to z = 1
    exactly, so the discrete dc gain equals the analog limit.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt * filt.omega_h >= 2.0:
        warnings.warn("dt * omega_h >= 2; bilinear prewarping error is large "
                      "near the upper band edge", FrequencyWarpWarning)
    c = 2.0 / dt
    sections = []
    for z, p in zip(filt.zeros, filt.poles):
        den = c - p
        sections.append(((c - z) / den, -(c + z) / den, -(c + p) / den))
    return DiscreteFilter(sections=sections, gain=filt.gain, dt=dt)


def apply(filt: DiscreteFilter, sample: float) -> float:
    """Advance the cascade by one sample."""
    x = sample
    st = filt.state
    for i, (b0, b1, a1) in enumerate(filt.sections):
        y = b0 * x + st[i]
        st[i] = b1 * x - a1 * y
        x = y
    return filt.gain * x


def process(filt: DiscreteFilter, samples) -> np.ndarray:
    """Batch version of apply over a 1-D array (same state semantics)."""
    x = np.asarray(samples, dtype=float)
    for i, (b0, b1, a1) in enumerate(filt.sections):
        zi = np.array([filt.state[i]])
        x, zf = lfilter([b0, b1], [1.0, a1], x, zi=zi)
        filt.state[i] = float(zf[0])
    return filt.gain * x


def discrete_freq_response(filt: DiscreteFilter, omega) -> np.ndarray:
    """Frequency response of the cascade at analog frequency omega rad/s."""
    w = np.atleast_1d(np.asarray(omega, dtype=float)) * filt.dt
    q = np.exp(-1j * w)
    H = np.full(q.shape, filt.gain, dtype=complex)
    for b0, b1, a1 in filt.sections:
        H *= (b0 + b1 * q) / (1.0 + a1 * q)
    return H


class FracDerivative:
    """Streaming band-limited fractional derivative of order mu in (0, 1)."""

    def __init__(self, mu: float, dt: float):
        if not 0 < mu < 1:
            raise OrderOutOfRange(f"derivative order {mu} outside (0, 1)")
        self.mu = mu
        self.dt = dt
        self._filt = discretize(oustaloup_design(mu), dt)

    def step(self, x: float) -> float:
        return apply(self._filt, x)

    def process(self, xs) -> np.ndarray:
        return process(self._filt, xs)

    def reset(self):
        self._filt.reset()


class FracIntegral:
    """Streaming fractional integral of order lam in (0, 1].

    Realized as s^(-lam) = s^(-1) * s^(1-lam): an exact trapezoidal
    integrator in series with the band-limited s^(1-lam) stage. The
    explicit pole at zero gives true integral action (no dc droop),
    which a pure band-limited s^(-lam) would lose for lam near 1.
    """

    def __init__(self, lam: float, dt: float):
        if not 0 < lam <= 1:
            raise OrderOutOfRange(f"integral order {lam} outside (0, 1]")
        self.lam = lam
        self.dt = dt
        self._shape = None if lam == 1.0 else discretize(oustaloup_design(1.0 - lam), dt)
        self._acc = 0.0
        self._prev = 0.0

    def step(self, x: float) -> float:
        if self._shape is not None:
            x = apply(self._shape, x)
        self._acc += 0.5 * self.dt * (x + self._prev)
        self._prev = x
        return self._acc

    def process(self, xs) -> np.ndarray:
        out = np.empty(len(xs))
        for i, x in enumerate(xs):
            out[i] = self.step(x)
        return out

    def reset(self):
        if self._shape is not None:
            self._shape.reset()
        self._acc = 0.0
        self._prev = 0.0


def frac_derivative_stream(mu: float, dt: float) -> FracDerivative:
    """Stateful stream transformer realizing d^mu/dt^mu."""
    return FracDerivative(mu, dt)


def frac_integral_stream(lam: float, dt: float) -> FracIntegral:
    """Stateful stream transformer realizing d^-lam/dt^-lam."""
    return FracIntegral(lam, dt)


def generate_fgn(beta_order: float, n_samples: int, sigma: float,
                 dt: float, seed: int) -> np.ndarray:
    """Fractional Gaussian noise via spectral shaping of white noise.

    Seeded white Gaussian samples are filtered through the band-limited
    realization of s^(-beta/2) (the half order shapes the power spectrum
    by 1/f^beta, since power goes as |H|^2). Negative beta_order flips
    the sign of the exponent and yields an anti-persistent series;
    beta_order = 0 returns the white sequence unfiltered. A warm-up
    prefix is generated and discarded so the filter state is stationary.
    """
    if not -1.0 <= beta_order <= 1.0:
        raise OrderOutOfRange(f"beta_order = {beta_order} outside [-1, 1]")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    white = rng.normal(0.0, sigma, n_samples + FGN_WARMUP)
    if beta_order == 0.0:
        return white[FGN_WARMUP:]
    filt = discretize(oustaloup_design(-beta_order / 2.0), dt)
    shaped = process(filt, white)
    return shaped[FGN_WARMUP:]


def theoretical_fgn_acf(H: float, sigma: float, lag: int) -> float:
    """Exact autocovariance of fGn with Hurst exponent H at integer lag."""
    if not 0 < H < 1:
        raise ValueError("H must lie in (0, 1)")
    if lag < 0:
        raise ValueError("lag must be >= 0")
    l = float(lag)
    return 0.5 * sigma ** 2 * (abs(l - 1) ** (2 * H) - 2 * abs(l) ** (2 * H)
                               + abs(l + 1) ** (2 * H))
