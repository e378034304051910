"""Fuzzy FOPID controller composition and small-signal behavior."""

import numpy as np
import pytest

from rxctl import controller as ctl
from rxctl.controller import FuzzyFOPIDConfig
from rxctl.errors import ConfigMismatch


def make_cfg(**kw):
    base = dict(K_e=0.5, K_d=0.1, K_PI=1.0, K_PD=0.2,
                lambda_order=0.9, mu_order=0.3, dt=0.01)
    base.update(kw)
    return FuzzyFOPIDConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        make_cfg(K_e=-1.0)
    with pytest.raises(ValueError):
        make_cfg(lambda_order=0.0)
    with pytest.raises(ValueError):
        make_cfg(mu_order=1.5)


def test_zero_in_zero_out():
    cfg = make_cfg()
    st = ctl.new_state(cfg)
    for _ in range(100):
        assert ctl.step(cfg, st, 0.0) == 0.0


def test_sign_flip_symmetry():
    cfg = make_cfg()
    sa, sb = ctl.new_state(cfg), ctl.new_state(cfg)
    rng = np.random.default_rng(0)
    for e in rng.uniform(-0.5, 0.5, 500):
        ua = ctl.step(cfg, sa, e)
        ub = ctl.step(cfg, sb, -e)
        assert abs(ua + ub) < 1e-9


def test_state_reset():
    cfg = make_cfg()
    st = ctl.new_state(cfg)
    rng = np.random.default_rng(1)
    ref = [ctl.step(cfg, st, e) for e in rng.uniform(-1, 1, 50)]
    st.reset()
    rng = np.random.default_rng(1)
    again = [ctl.step(cfg, st, e) for e in rng.uniform(-1, 1, 50)]
    assert ref == again


def test_config_mismatch_detected():
    st = ctl.new_state(make_cfg(mu_order=0.3))
    with pytest.raises(ConfigMismatch):
        ctl.step(make_cfg(mu_order=0.4), st, 0.1)


def test_no_hidden_global_state():
    cfg = make_cfg()
    sa, sb = ctl.new_state(cfg), ctl.new_state(cfg)
    rng = np.random.default_rng(2)
    for e in rng.uniform(-1, 1, 200):
        assert ctl.step(cfg, sa, e) == ctl.step(cfg, sb, e)


def test_bounded_output_for_bounded_error():
    cfg = make_cfg()
    st = ctl.new_state(cfg)
    rng = np.random.default_rng(3)
    out = [ctl.step(cfg, st, e) for e in rng.uniform(-10, 10, 2000)]
    assert np.all(np.isfinite(out))


def test_small_signal_gains_structure():
    S = ctl.flc_slope()
    cfg = FuzzyFOPIDConfig(1, 1, 1, 1, 1, 1, 0.01)
    p, i, d = ctl.small_signal_gains(cfg)
    assert p == pytest.approx(S)
    assert i == pytest.approx(S)
    assert d == pytest.approx(S)

    p, i, d = ctl.small_signal_gains(make_cfg(K_PI=0.0))
    assert i == 0.0

    base = make_cfg()
    doubled = make_cfg(K_e=2 * base.K_e)
    pb, ib, db = ctl.small_signal_gains(base)
    pd_, id_, dd = ctl.small_signal_gains(doubled)
    assert pd_ == pytest.approx(2 * pb)
    assert id_ == pytest.approx(2 * ib)
    assert dd == pytest.approx(db)


def test_unit_orders_match_discrete_pid():
    """With both orders at 1 and small signals the loop law linearizes to
    a conventional PID whose gains follow from the engine slope S. The
    integral branch also integrates the derivative path, which folds an
    extra S*K_PI*K_d term into the effective proportional gain."""
    dt = 0.01
    # small K_d keeps the setpoint derivative kick inside the engine's
    # linear region so the PID analogy holds sample by sample
    cfg = FuzzyFOPIDConfig(1.0, 0.01, 1.0, 1.0, 1.0, 1.0, dt)
    S = ctl.flc_slope()
    Kp, Ki, Kd = ctl.small_signal_gains(cfg)
    Kp_eff = Kp + cfg.K_PI * S * cfg.K_d

    st = ctl.new_state(cfg)
    n = int(10 / dt) + 1
    t = dt * np.arange(n)
    e = 0.001 * np.ones(n)
    u = np.array([ctl.step(cfg, st, ek) for ek in e])

    acc = prev = prev_e = 0.0
    ref = np.empty(n)
    for k, ek in enumerate(e):
        d = (ek - prev_e) / dt
        prev_e = ek
        acc += 0.5 * dt * (ek + prev)
        prev = ek
        ref[k] = Kp_eff * ek + Ki * acc + Kd * d
    # skip the first instants: the reference PID sees an unclamped
    # derivative kick that the fuzzy engine saturates away
    m = t >= 0.5
    rel = np.abs(u[m] - ref[m]) / np.abs(ref[m]).max()
    assert rel.max() < 0.02


def test_presets_available_and_valid():
    for name in ctl.PRESETS:
        cfg = ctl.preset(name, dt=0.005)
        assert cfg.dt == 0.005
        assert 0 < cfg.lambda_order <= 1
        assert 0 < cfg.mu_order <= 1
    with pytest.raises(KeyError):
        ctl.preset("fopid-42")


def test_pid_presets_have_unit_orders():
    for name, vals in ctl.PRESETS.items():
        if name.startswith("pid-"):
            assert vals[4] == 1.0 and vals[5] == 1.0
