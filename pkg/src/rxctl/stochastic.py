"""Self-similar network delay, sensor noise injection and LRD diagnostics.

Delay series are synthesized from fractional Gaussian noise so that the
per-sample delays inherit a target Hurst exponent, then injected on the
feedback path through a zero-order-hold delay line. Diagnostics cover
rescaled-range Hurst estimation, the sample autocorrelation function and
a streaming running variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fracops
from .errors import LengthMismatch, SeriesTooShort, ZeroVariance


@dataclass(frozen=True)
class DelaySpec:
    """Feedback-path delay description."""

    hurst: float = 0.8837
    mean_delay: float = 0.05
    max_delay: float = 0.2
    seed: int | None = None
    source: str = "synthetic"
    trace_path: str | None = None

    def __post_init__(self):
        if not 0 < self.hurst < 1:
            raise ValueError("hurst must lie in (0, 1)")
        if not 0 <= self.mean_delay <= self.max_delay:
            raise ValueError("need 0 <= mean_delay <= max_delay")
        if self.source not in ("synthetic", "trace-file"):
            raise ValueError("source must be 'synthetic' or 'trace-file'")
        if self.source == "trace-file" and not self.trace_path:
            raise ValueError("trace-file source requires trace_path")


@dataclass(frozen=True)
class NoiseSpec:
    """Additive sensor-noise description; beta_order sets the spectral
    character (positive persistent, zero white, negative anti-persistent)."""

    beta_order: float = 0.668
    sigma: float = 0.01
    seed: int | None = None

    def __post_init__(self):
        if not -1 <= self.beta_order <= 1:
            raise ValueError("beta_order must lie in [-1, 1]")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


@dataclass(frozen=True)
class HurstEstimate:
    """Result of a rescaled-range regression."""

    H: float
    intercept: float
    block_sizes: tuple[int, ...]
    r_squared: float
    valid: bool = True  # False when H falls outside (0, 1.5)


def generate_delay_series(spec: DelaySpec, n_samples: int, dt: float) -> np.ndarray:
    """Per-sample delay values in seconds.

    Synthetic mode draws fGn with beta = 2H - 1, standardizes it, maps it
    affinely to the requested mean with spread mean_delay / 2 and clips
    to [0, max_delay]. Trace mode replays a recorded series (one value
    per line), clipped the same way.
    """
    if spec.source == "trace-file":
        vals = np.loadtxt(spec.trace_path, ndmin=1)
        if len(vals) < n_samples:
            raise SeriesTooShort(
                f"trace has {len(vals)} samples, need {n_samples}")
        return np.clip(vals[:n_samples], 0.0, spec.max_delay)
    seed = 0 if spec.seed is None else spec.seed
    beta = 2.0 * spec.hurst - 1.0
    x = fracops.generate_fgn(beta, n_samples, 1.0, dt, seed)
    sd = x.std()
    if sd > 0:
        x = (x - x.mean()) / sd
    else:
        x = np.zeros_like(x)
    d = spec.mean_delay + (spec.mean_delay / 2.0) * x
    return np.clip(d, 0.0, spec.max_delay)


def delay_line(delays: np.ndarray, signal: np.ndarray, dt: float) -> np.ndarray:
    """Apply per-sample transport delays to a signal with zero-order hold.

    Output sample k is the signal at time t_k - d_k, indexed by floor;
    times before zero return the initial sample. Stale packets never
    overwrite newer ones: the source index is forced non-decreasing, so
    a late-arriving old measurement is ignored in favor of the newest
    one already seen.
    """
    delays = np.asarray(delays, dtype=float)
    signal = np.asarray(signal, dtype=float)
    if len(delays) != len(signal):
        raise LengthMismatch(
            f"delay series ({len(delays)}) and signal ({len(signal)}) differ")
    k = np.arange(len(signal))
    src = np.floor(k - delays / dt + 1e-9).astype(int)
    np.clip(src, 0, k, out=src)
    src = np.maximum.accumulate(src)
    return signal[src]


def default_block_sizes(n: int) -> tuple[int, ...]:
    """Powers of two from 16 up to n // 8."""
    sizes = []
    b = 16
    while b <= n // 8:
        sizes.append(b)
        b *= 2
    return tuple(sizes)


def rs_hurst(series: np.ndarray, block_sizes=None) -> HurstEstimate:
    """Rescaled-range Hurst estimate.

    For each block size n the series is cut into consecutive
    non-overlapping blocks; each block contributes the range of its
    cumulative mean-adjusted sums divided by its standard deviation.
    The slope of log mean(R/S) against log n is the Hurst exponent.
    """
    x = np.asarray(series, dtype=float)
    if block_sizes is None:
        block_sizes = default_block_sizes(len(x))
    block_sizes = tuple(int(b) for b in block_sizes)
    if len(block_sizes) < 4:
        raise SeriesTooShort("need at least 4 block sizes for the regression")
    if len(x) < 2 * max(block_sizes):
        raise SeriesTooShort("series shorter than twice the largest block")
    log_n, log_rs = [], []
    for n in block_sizes:
        vals = []
        for start in range(0, len(x) - n + 1, n):
            blk = x[start:start + n]
            s = blk.std()
            if s == 0.0:
                continue  # flat block carries no range information
            dev = np.cumsum(blk - blk.mean())
            vals.append((dev.max() - dev.min()) / s)
        if not vals:
            continue  # every block degenerate; drop this size
        log_n.append(np.log(n))
        log_rs.append(np.log(np.mean(vals)))
    if len(log_n) < 2:
        raise ZeroVariance("too few usable block sizes; series may be constant")
    slope, intercept = np.polyfit(log_n, log_rs, 1)
    fit = slope * np.asarray(log_n) + intercept
    resid = np.asarray(log_rs) - fit
    ss_tot = np.sum((log_rs - np.mean(log_rs)) ** 2)
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    H = float(slope)
    return HurstEstimate(H=H, intercept=float(intercept),
                         block_sizes=tuple(int(round(np.exp(v))) for v in log_n),
                         r_squared=r2, valid=0.0 < H < 1.5)


def sample_acf(series: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased sample autocorrelation, normalized so lag 0 equals 1."""
    x = np.asarray(series, dtype=float)
    if max_lag >= len(x) / 4:
        raise ValueError("max_lag must be below length / 4")
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise ZeroVariance("series is constant; ACF undefined")
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        out[k] = float(xc[:len(x) - k] @ xc[k:]) / denom
    return out


def running_variance(series: np.ndarray) -> np.ndarray:
    """Streaming unbiased sample variance of the first k+1 elements.

    One-pass update (Welford); element 0 is 0 by convention.
    """
    x = np.asarray(series, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least 2 samples")
    out = np.empty(len(x))
    mean = 0.0
    m2 = 0.0
    for k, v in enumerate(x):
        delta = v - mean
        mean += delta / (k + 1)
        m2 += delta * (v - mean)
        out[k] = m2 / k if k > 0 else 0.0
    return out
