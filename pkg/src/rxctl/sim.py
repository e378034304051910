"""Closed-loop scenario wiring: plant + controller + noise + delay.

The loop order is fixed: measure the plant output, corrupt it with the
delayed measurement plus sensor noise, form the error against the
setpoint, run one controller update and hold the control over the next
plant step. The linear plant advances by a precomputed fixed-step RK4
transition (exact polynomial in A dt); the nonlinear plant advances the
point-kinetics model directly.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import controller as ctl
from . import fracops, fuzzy, reactor, stochastic
from .errors import ConfigError, DivergedSimulation

_trapz = getattr(np, "trapezoid", np.trapz)

DEFAULT_DT = 0.002
MAX_DT = 0.02

_SCENARIO_KEYS = {
    "power_percent", "params", "plant_mode", "setpoint", "T", "dt",
    "controller", "noise", "delay", "seed", "rules", "u_max",
}
_SETPOINT_KEYS = {"amplitude", "start"}
_NOISE_KEYS = {"beta_order", "sigma", "seed"}
_DELAY_KEYS = {"hurst", "mean_delay", "max_delay", "seed", "source", "trace_path"}
_CONTROLLER_KEYS = {"K_e", "K_d", "K_PI", "K_PD", "lambda_order", "mu_order"}


@dataclass(frozen=True)
class Scenario:
    """One closed-loop experiment description."""

    power_percent: int = 100
    params: reactor.ReactorParams | None = None  # overrides power_percent
    plant_mode: str = "linear"
    setpoint: tuple = (("amplitude", 1.0), ("start", 1.0))
    T: float = 100.0
    dt: float = DEFAULT_DT
    controller: str | ctl.FuzzyFOPIDConfig = "fopid-100"
    noise: stochastic.NoiseSpec | None = None
    delay: stochastic.DelaySpec | None = None
    seed: int = 0
    rules: fuzzy.RuleBase = fuzzy.DEFAULT_RULES
    u_max: float | None = None

    def __post_init__(self):
        if self.plant_mode not in ("linear", "nonlinear"):
            raise ConfigError("plant_mode must be 'linear' or 'nonlinear'")
        if self.dt <= 0 or self.dt > MAX_DT:
            raise ConfigError(f"dt must lie in (0, {MAX_DT}]")
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigError("dt must divide T")
        if self.params is None and self.power_percent not in reactor.POWER_LEVELS:
            raise ConfigError(f"power_percent must be one of {reactor.POWER_LEVELS}")

    @property
    def setpoint_dict(self) -> dict:
        return dict(self.setpoint)

    def resolve_controller(self) -> ctl.FuzzyFOPIDConfig:
        if isinstance(self.controller, ctl.FuzzyFOPIDConfig):
            if abs(self.controller.dt - self.dt) > 1e-15:
                return replace(self.controller, dt=self.dt)
            return self.controller
        return ctl.preset(self.controller, dt=self.dt)

    def resolve_params(self) -> reactor.ReactorParams:
        if self.params is not None:
            return self.params
        return reactor.params_for_power(self.power_percent)


def scenario_from_dict(d: dict) -> Scenario:
    """Strict scenario parsing: unknown keys are rejected."""
    if not isinstance(d, dict):
        raise ConfigError("scenario must be a JSON object")
    unknown = set(d) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    kw: dict = {}
    for key in ("power_percent", "plant_mode", "T", "dt", "seed", "u_max"):
        if key in d:
            kw[key] = d[key]
    if "params" in d and d["params"] is not None:
        try:
            kw["params"] = reactor.params_from_dict(d["params"])
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"bad custom params: {exc}") from exc
    if "setpoint" in d:
        sp = d["setpoint"]
        unknown = set(sp) - _SETPOINT_KEYS
        if unknown:
            raise ConfigError(f"unknown setpoint keys: {sorted(unknown)}")
        kw["setpoint"] = (("amplitude", float(sp.get("amplitude", 1.0))),
                          ("start", float(sp.get("start", 1.0))))
    if "controller" in d:
        c = d["controller"]
        if isinstance(c, str):
            kw["controller"] = c
        elif isinstance(c, dict):
            unknown = set(c) - _CONTROLLER_KEYS
            if unknown:
                raise ConfigError(f"unknown controller keys: {sorted(unknown)}")
            try:
                kw["controller"] = ctl.FuzzyFOPIDConfig(
                    dt=d.get("dt", DEFAULT_DT), **c)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad controller config: {exc}") from exc
        else:
            raise ConfigError("controller must be a preset name or an object")
    for key, spec_cls, allowed in (("noise", stochastic.NoiseSpec, _NOISE_KEYS),
                                   ("delay", stochastic.DelaySpec, _DELAY_KEYS)):
        if key in d and d[key] is not None:
            obj = d[key]
            unknown = set(obj) - allowed
            if unknown:
                raise ConfigError(f"unknown {key} keys: {sorted(unknown)}")
            try:
                kw[key] = spec_cls(**obj)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad {key} spec: {exc}") from exc
    if "rules" in d and d["rules"] is not None:
        try:
            kw["rules"] = fuzzy.RuleBase.from_labels(d["rules"])
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"bad rule table: {exc}") from exc
    try:
        return Scenario(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return scenario_from_dict(data)


@dataclass
class SimResult:
    """Time series plus summary metrics of one closed-loop run."""

    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    y_fb: np.ndarray
    e: np.ndarray
    u: np.ndarray
    delay: np.ndarray
    noise: np.ndarray
    summary: dict


def _rk4_transition(A: np.ndarray, B: np.ndarray, dt: float):
    """One-step RK4 matrices for dx/dt = A x + B u with u held: the state
    map x' = F x + G u, with F the degree-4 Taylor polynomial of exp(A dt)."""
    n = A.shape[0]
    I = np.eye(n)
    Ad = A * dt
    F = I + Ad @ (I + Ad @ (I + Ad @ (I + Ad / 4.0) / 3.0) / 2.0)
    G = dt * (I + Ad @ (I + Ad @ (I + Ad / 4.0) / 3.0) / 2.0) @ B
    return F, G.ravel()


def run_scenario(scn: Scenario) -> SimResult:
    """Simulate one scenario and return its full time series."""
    params = scn.resolve_params()
    cfg = scn.resolve_controller()
    dt = scn.dt
    n_steps = int(round(scn.T / dt))
    n = n_steps + 1
    t = dt * np.arange(n)
    sp = scn.setpoint_dict
    r = np.where(t >= sp["start"] - 1e-12, sp["amplitude"], 0.0)

    if scn.noise is not None and scn.noise.sigma > 0:
        noise_seed = scn.noise.seed if scn.noise.seed is not None else scn.seed
        noise = fracops.generate_fgn(scn.noise.beta_order, n, scn.noise.sigma,
                                     dt, noise_seed)
    else:
        noise = np.zeros(n)
    if scn.delay is not None:
        dspec = scn.delay
        if dspec.source == "synthetic" and dspec.seed is None:
            dspec = replace(dspec, seed=scn.seed + 1)
        delays = stochastic.generate_delay_series(dspec, n, dt)
    else:
        delays = np.zeros(n)

    state = ctl.new_state(cfg)
    linear = scn.plant_mode == "linear"
    if linear:
        ss = reactor.linearize(params)
        F, G = _rk4_transition(ss.A, ss.B, dt)
        x = np.zeros(ss.A.shape[0])
    else:
        rx = reactor.steady_state(params).copy()
        n_ref = params.n_r0

    y = np.empty(n)
    y_fb = np.empty(n)
    e = np.empty(n)
    u = np.empty(n)
    u_k = 0.0
    for k in range(n):
        y[k] = x[0] if linear else rx.n_r - n_ref
        # feedback-path corruption: transport delay then additive noise
        d_k = delays[k]
        src = int(np.floor(k - d_k / dt + 1e-9))
        if src < 0:
            src = 0
        if k > 0 and src < _src_prev:
            src = _src_prev
        _src_prev = src
        y_fb[k] = y[src] + noise[k]
        e[k] = r[k] - y_fb[k]
        u_k = ctl.step(cfg, state, e[k], scn.rules)
        if scn.u_max is not None:
            u_k = min(scn.u_max, max(-scn.u_max, u_k))
        u[k] = u_k
        if k == n_steps:
            break
        if linear:
            x = F @ x + G * u_k
            ok = np.all(np.isfinite(x))
        else:
            v = rx.as_vector()
            f = lambda vv: reactor.derivatives(
                reactor.ReactorState.from_vector(vv, params.group_count),
                params, u_k)
            k1 = f(v)
            k2 = f(v + 0.5 * dt * k1)
            k3 = f(v + 0.5 * dt * k2)
            k4 = f(v + dt * k3)
            v = v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            ok = np.all(np.isfinite(v))
            if ok:
                rx = reactor.ReactorState.from_vector(v, params.group_count)
        if not ok:
            raise DivergedSimulation(t[k + 1])

    summary = summarize(t, r, y, e, u, sp["amplitude"], sp["start"])
    return SimResult(t=t, r=r, y=y, y_fb=y_fb, e=e, u=u,
                     delay=delays, noise=noise, summary=summary)


def summarize(t, r, y, e, u, amplitude, start) -> dict:
    """Summary metrics on the true plant output (not the corrupted
    measurement): objective value, percent overshoot, 2% settling time
    and terminal tracking error."""
    J = float(_trapz(0.5 * t * e ** 2 + 0.5 * u ** 2, t))
    e_true = r - y
    if amplitude != 0:
        overshoot = max(0.0, float((y.max() - amplitude) / abs(amplitude) * 100.0))
        band = 0.02 * abs(amplitude)
        outside = np.nonzero((np.abs(e_true) > band) & (t >= start))[0]
        if len(outside) == 0:
            settling = float(start)
        elif outside[-1] == len(t) - 1:
            settling = float("nan")  # never settles inside the band
        else:
            settling = float(t[outside[-1] + 1])
    else:
        overshoot = 0.0
        settling = 0.0
    return {
        "J": J,
        "overshoot_pct": overshoot,
        "settling_time_s": settling,
        "steady_state_error": float(e_true[-1]),
    }


CSV_HEADER = ["t", "r", "y", "y_fb", "e", "u", "delay", "noise"]


def write_csv(result: SimResult, path: str):
    """Fixed-format CSV so identical runs are byte-identical."""
    cols = [result.t, result.r, result.y, result.y_fb,
            result.e, result.u, result.delay, result.noise]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for row in zip(*cols):
            fh.write(",".join("%.12g" % v for v in row) + "\n")


def write_summary(result: SimResult, path: str):
    with open(path, "w") as fh:
        json.dump(result.summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


_NOISE_KINDS = {"persistent": 0.668, "white": 0.0, "anti": -0.668}


def reproduce_grid(which: str, outdir: str, seed: int = 0,
                   T: float = 100.0, dt: float = DEFAULT_DT) -> list[dict]:
    """Run one of the canned experiment grids and write per-cell CSVs plus
    a summary CSV. Returns the summary rows. Cell failures are recorded
    and the grid continues."""
    os.makedirs(outdir, exist_ok=True)
    cells = []
    if which == "section-4":
        for name in ("fopid-100", "pid-100", "fopid-20", "pid-20"):
            for power in reactor.POWER_LEVELS:
                cells.append(dict(preset=name, power=power, noise="none",
                                  delay="off"))
    elif which == "section-5":
        for name in ("fopid-100", "pid-100", "fopid-20", "pid-20"):
            for power in reactor.POWER_LEVELS:
                for kind in _NOISE_KINDS:
                    for dly in ("off", "on"):
                        cells.append(dict(preset=name, power=power,
                                          noise=kind, delay=dly))
    elif which == "section-6":
        for kind in _NOISE_KINDS:
            for power in (100, 20):
                for fam in ("fopid", "pid"):
                    cells.append(dict(preset=f"{fam}-{power}-{kind}",
                                      power=power, noise=kind, delay="on"))
    else:
        raise ConfigError("grid selection must be section-4, section-5 or section-6")

    rows = []
    for idx, cell in enumerate(cells):
        noise = (None if cell["noise"] == "none" else
                 stochastic.NoiseSpec(beta_order=_NOISE_KINDS[cell["noise"]]))
        delay = stochastic.DelaySpec() if cell["delay"] == "on" else None
        scn = Scenario(power_percent=cell["power"], controller=cell["preset"],
                       noise=noise, delay=delay, T=T, dt=dt,
                       seed=seed + 1000 * idx)
        row = dict(cell, seed=scn.seed)
        try:
            res = run_scenario(scn)
        except DivergedSimulation as exc:
            row.update(status="diverged", diverged_at=exc.t)
        else:
            row.update(status="ok", **res.summary)
            name = f"{cell['preset']}_p{cell['power']}_{cell['noise']}_d{cell['delay']}.csv"
            write_csv(res, os.path.join(outdir, name))
        rows.append(row)

    fields = sorted({k for r in rows for k in r})
    with open(os.path.join(outdir, "summary.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return rows
