"""Reactor model: steady state, derivatives, linearization, zpk conversion."""

import numpy as np
import pytest

from rxctl import reactor
from rxctl.errors import (
    NonFiniteState,
    SingularA,
    StepSizeTooLarge,
    UnsupportedGroupCount,
)

POWERS = reactor.POWER_LEVELS


def test_registry_rows_valid():
    for p in POWERS:
        params = reactor.params_for_power(p)
        assert params.alpha_f < 0 and params.alpha_c < 0
        assert abs(sum(params.beta_groups) - params.beta) <= 1e-12 * params.beta


def test_registry_rejects_unknown_power():
    with pytest.raises(KeyError):
        reactor.params_for_power(55)


def test_steady_state_precursor_concentration():
    # c_r0 = beta / (Lambda * lambda) * n_r0 for the lumped group
    params = reactor.params_for_power(100)
    st = reactor.steady_state(params)
    expected = 7.65e-3 / (1.76e-4 * 7.59e-2)
    assert st.c_r[0] == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(572.67, rel=1e-4)


def test_steady_state_fuel_coolant_temperature_rise():
    params = reactor.params_for_power(100)
    st = reactor.steady_state(params)
    assert st.T_f - params.T_c0 == pytest.approx(500e6 / 3.94e6, rel=1e-12)


def test_derivatives_vanish_at_steady_state():
    for p in POWERS:
        params = reactor.params_for_power(p)
        st = reactor.steady_state(params)
        d = reactor.derivatives(st, params, 0.0)
        scale = np.abs(st.as_vector()).max()
        assert np.abs(d).max() <= 1e-9 * scale


def test_total_reactivity_at_reference():
    params = reactor.params_for_power(100)
    st = reactor.steady_state(params)
    assert reactor.total_reactivity(st, params, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert reactor.total_reactivity(st, params, 1e-3) == pytest.approx(1e-3)


def test_total_reactivity_fuel_feedback():
    # +10 degC on the fuel with tabulated alpha_f = -2.9e-5 gives -2.9e-4
    params = reactor.params_for_power(100, feedback="tabulated")
    st = reactor.steady_state(params).copy()
    st.T_f += 10.0
    assert reactor.total_reactivity(st, params, 0.0) == pytest.approx(-2.9e-4)


def test_prompt_jump_direction():
    params = reactor.params_for_power(100)
    st = reactor.steady_state(params)
    rho = 1e-4
    d = reactor.derivatives(st, params, rho)
    assert d[0] == pytest.approx(rho / params.Lambda * params.n_r0, rel=1e-9)
    assert d[0] > 0


def test_excess_heating_rate():
    params = reactor.params_for_power(100)
    st = reactor.steady_state(params).copy()
    st.n_r *= 2.0
    d = reactor.derivatives(st, params, 0.0)
    # doubling n_r adds P0 / mu_f of fuel heating
    assert d[2] == pytest.approx(500e6 / 2.25e7, rel=1e-9)


def test_linearize_structure_and_entries():
    params = reactor.params_for_power(100, feedback="tabulated")
    ss = reactor.linearize(params)
    assert ss.A[0, 0] == pytest.approx(-7.65e-3 / 1.76e-4)
    assert ss.A[1, 0] == pytest.approx(params.beta / params.Lambda)
    assert ss.A[0, 1] == pytest.approx(params.lambda_decay[0])
    assert ss.A[0, 2] == pytest.approx(1.0 * -2.9e-5 / 1.76e-4)
    nonzero = np.nonzero(ss.B.ravel())[0]
    assert list(nonzero) == [0]
    assert ss.B[0, 0] == pytest.approx(params.n_r0 / params.Lambda)
    np.testing.assert_array_equal(ss.C, [[1.0, 0.0, 0.0, 0.0]])
    assert ss.D[0, 0] == 0.0


def test_linearize_gain_matches_published_20_row():
    params = reactor.params_for_power(20)
    tf = reactor.to_transfer_function(reactor.linearize(params))
    assert tf.gain == pytest.approx(0.2 / 1.76e-4, rel=1e-9)
    assert tf.gain == pytest.approx(1136.3636, rel=1e-6)


def test_linearize_rejects_multiple_groups():
    base = reactor.params_for_power(100)
    params = reactor.ReactorParams(
        P0=base.P0, beta=base.beta, Lambda=base.Lambda,
        lambda_decay=(0.0124, 0.0305), beta_groups=(base.beta / 2, base.beta / 2),
        alpha_f=base.alpha_f, alpha_c=base.alpha_c, mu_f=base.mu_f,
        mu_c=base.mu_c, Omega=base.Omega, M_c=base.M_c, T_i=base.T_i,
        n_r0=base.n_r0, T_c0=base.T_c0)
    with pytest.raises(UnsupportedGroupCount):
        reactor.linearize(params)


def test_to_transfer_function_diagonal_case():
    ss = reactor.LinearStateSpace(
        A=-np.eye(4), B=np.array([[1.0], [0], [0], [0]]),
        C=np.array([[1.0, 0, 0, 0]]), D=np.array([[0.0]]))
    tf = reactor.to_transfer_function(ss)
    # three exact pole-zero cancellations at -1 leave a single lag
    assert tf.gain == pytest.approx(1.0)
    # repeated roots are ill-conditioned (machine epsilon to the 1/4 power
    # for a quadruple root), so the comparison tolerance is loose by design
    assert np.abs(np.array(tf.zeros) + 1.0).max() < 1e-3
    assert np.abs(np.array(tf.poles) + 1.0).max() < 1e-3
    assert reactor.dc_gain(ss) == pytest.approx(1.0)


def test_root_ordering_is_descending_real():
    for p in POWERS:
        tf = reactor.to_transfer_function(reactor.linearize(reactor.params_for_power(p)))
        reals = [z.real for z in tf.poles]
        assert reals == sorted(reals, reverse=True)


def test_all_rows_hurwitz():
    for p in POWERS:
        tf = reactor.to_transfer_function(reactor.linearize(reactor.params_for_power(p)))
        assert max(z.real for z in tf.poles) < 0


def test_dc_gain_consistency_with_zpk():
    # two independent computations of the same quantity
    for p in POWERS:
        ss = reactor.linearize(reactor.params_for_power(p))
        tf = reactor.to_transfer_function(ss)
        zpk_dc = tf.gain * np.prod([-z for z in tf.zeros]) / np.prod([-q for q in tf.poles])
        assert reactor.dc_gain(ss) == pytest.approx(float(zpk_dc.real), rel=1e-6)


def test_dc_gain_singular_A():
    ss = reactor.LinearStateSpace(
        A=np.zeros((2, 2)), B=np.ones((2, 1)),
        C=np.ones((1, 2)), D=np.array([[0.0]]))
    with pytest.raises(SingularA):
        reactor.dc_gain(ss)


def test_integrate_holds_steady_state():
    params = reactor.params_for_power(100)
    st = reactor.steady_state(params)
    _, traj = reactor.integrate(st, params, lambda t: 0.0, (0.0, 5.0), 0.01)
    v0 = st.as_vector()
    for s in traj:
        assert np.abs(s.as_vector() - v0).max() <= 1e-7 * np.abs(v0).max()


def test_integrate_positive_step_raises_power():
    params = reactor.params_for_power(100)
    st = reactor.steady_state(params)
    _, traj = reactor.integrate(st, params, lambda t: 1e-4, (0.0, 1.0), 0.01)
    n = [s.n_r for s in traj]
    assert all(b > a for a, b in zip(n, n[1:]))


def test_integrate_rejects_large_step():
    params = reactor.params_for_power(100)
    st = reactor.steady_state(params)
    with pytest.raises(StepSizeTooLarge):
        reactor.integrate(st, params, lambda t: 0.0, (0.0, 1.0), 0.05)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_integrate_detects_nonfinite():
    params = reactor.params_for_power(100)
    st = reactor.steady_state(params)
    # a huge super-prompt-critical insertion blows up the exponential
    with pytest.raises(NonFiniteState):
        reactor.integrate(st, params, lambda t: 5.0, (0.0, 20.0), 0.02)


def test_rk4_convergence_order():
    """Halving dt should cut the error against a fine reference by >= 8x."""
    params = reactor.params_for_power(100)
    st = reactor.steady_state(params)
    rho = lambda t: 1e-4

    def final(dt):
        _, traj = reactor.integrate(st, params, rho, (0.0, 1.0), dt)
        return traj[-1].as_vector()

    ref = final(0.001)
    err_coarse = np.linalg.norm(final(0.02) - ref)
    err_fine = np.linalg.norm(final(0.01) - ref)
    assert err_coarse / err_fine >= 8.0

    half = final(0.01)
    assert np.abs(half - final(0.02)).max() <= 1e-6 * np.abs(ref).max()


def test_custom_params_from_dict_recovers_inlet():
    d = dict(n_r0=1.0, T_c0=302.0, alpha_f=-2.9e-5, alpha_c=-6.3e-4,
             mu_f=2.25e7, mu_c=6.9e7, Omega=3.94e6, M_c=7.08e7)
    params = reactor.params_from_dict(d)
    builtin = reactor.params_for_power(100, feedback="tabulated")
    assert params.T_i == pytest.approx(builtin.T_i)
