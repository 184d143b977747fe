import math

import numpy as np
import pytest

from lindosc.model import InitialGaussian, ModelParams, initial_covariance
from lindosc.moments import asymptotic_covariance, evolve
from lindosc.states import (ABGamma, abgamma, density_matrix_at,
                            density_matrix_via_abgamma, purity, stationary_density,
                            stationary_wigner, wigner_at, wigner_via_abgamma)

PARAMS = ModelParams(m=1.5, omega=0.8, hbar=0.7)
STATE = initial_covariance(InitialGaussian(delta=2.0, r=0.4, q0=1.3, p0=-0.7), PARAMS)


def _mixed_state():
    params = ModelParams(lam=0.1, mu=0.0, coth_eps=4.0)
    traj = evolve(initial_covariance(InitialGaussian(delta=2.0, r=0.3), params),
                  params, [0.0, 3.0])
    return traj.samples[-1], params


def test_abgamma_coefficients():
    a = abgamma(STATE, PARAMS)
    assert a.alpha == pytest.approx(1.0 / (2.0 * STATE.sqq), rel=1e-15)
    assert a.beta == pytest.approx(STATE.spq / (PARAMS.hbar * STATE.sqq), rel=1e-15)
    assert a.gamma == pytest.approx(STATE.sigma / (2.0 * PARAMS.hbar ** 2 * STATE.sqq),
                                    rel=1e-15)


def test_abgamma_rejects_degenerate_spread():
    bad = initial_covariance(InitialGaussian(), ModelParams())
    bad = type(bad)(t=0.0, sq=0.0, sp=0.0, sqq=0.0, spp=1.0, spq=0.0)
    with pytest.raises(ValueError):
        abgamma(bad, ModelParams())


def test_density_matrix_diagonal_is_position_density():
    # on the diagonal the kernel is the real Gaussian marginal in q
    qs = np.linspace(STATE.sq - 3.0, STATE.sq + 3.0, 7)
    rho = density_matrix_at(STATE, PARAMS, qs, qs)
    want = (np.exp(-(qs - STATE.sq) ** 2 / (2.0 * STATE.sqq))
            / math.sqrt(2.0 * math.pi * STATE.sqq))
    assert np.max(np.abs(rho.imag)) == 0.0
    assert rho.real == pytest.approx(want, rel=1e-13)


def test_density_matrix_is_hermitian():
    q = np.array([0.2, 1.1, 2.0])
    rho = density_matrix_at(STATE, PARAMS, q[:, None], q[None, :])
    assert np.allclose(rho, rho.conj().T, rtol=1e-13, atol=0.0)


def test_density_matrix_two_forms_agree():
    std = math.sqrt(STATE.sqq)
    qg = np.linspace(STATE.sq - 4 * std, STATE.sq + 4 * std, 41)
    r1 = density_matrix_at(STATE, PARAMS, qg[:, None], qg[None, :])
    r2 = density_matrix_via_abgamma(STATE, PARAMS, qg[:, None], qg[None, :])
    peak = float(np.max(np.abs(r1)))
    assert float(np.max(np.abs(r1 - r2))) <= 1e-12 * peak


def test_wigner_two_forms_agree():
    stq, stp = math.sqrt(STATE.sqq), math.sqrt(STATE.spp)
    qg = np.linspace(STATE.sq - 4 * stq, STATE.sq + 4 * stq, 37)
    pg = np.linspace(STATE.sp - 4 * stp, STATE.sp + 4 * stp, 35)
    w1 = wigner_at(STATE, PARAMS, qg[:, None], pg[None, :])
    w2 = wigner_via_abgamma(STATE, PARAMS, qg[:, None], pg[None, :])
    assert float(np.max(np.abs(w1 - w2))) <= 1e-12 * float(np.max(w1))


def test_wigner_peak_value():
    assert float(wigner_at(STATE, PARAMS, STATE.sq, STATE.sp)) == pytest.approx(
        1.0 / (2.0 * math.pi * math.sqrt(STATE.sigma)), rel=1e-13)


def test_wigner_rejects_nonpositive_determinant():
    bad = type(STATE)(t=0.0, sq=0.0, sp=0.0, sqq=1.0, spp=1.0, spq=1.0)
    with pytest.raises(ValueError):
        wigner_at(bad, PARAMS, 0.0, 0.0)


def test_density_matrix_normalization_by_quadrature():
    # midpoint rule, 2048 points over +-8 standard deviations
    n, span = 2048, 8.0
    std = math.sqrt(STATE.sqq)
    lo = STATE.sq - span * std
    h = 2.0 * span * std / n
    qs = lo + h * (np.arange(n) + 0.5)
    total = float(np.sum(density_matrix_at(STATE, PARAMS, qs, qs).real)) * h
    assert abs(total - 1.0) <= 1e-8


def test_wigner_normalization_by_quadrature():
    n, span = 512, 8.0
    stq, stp = math.sqrt(STATE.sqq), math.sqrt(STATE.spp)
    hq = 2.0 * span * stq / n
    hp = 2.0 * span * stp / n
    qs = STATE.sq - span * stq + hq * (np.arange(n) + 0.5)
    ps = STATE.sp - span * stp + hp * (np.arange(n) + 0.5)
    total = float(np.sum(wigner_at(STATE, PARAMS, qs[:, None], ps[None, :]))) * hq * hp
    assert abs(total - 1.0) <= 1e-8


def test_wigner_is_the_transform_of_the_density_matrix():
    """W(q,p) must equal (1/2 pi hbar) times the integral of
    rho(q + D/2, q - D/2) exp(-i p D / hbar) over the separation D;
    checked pointwise by midpoint quadrature."""
    state, params = STATE, PARAMS
    width = math.sqrt(params.hbar ** 2 * state.sqq / state.sigma)
    dlt = np.linspace(-10.0 * width, 10.0 * width, 4096)
    hd = dlt[1] - dlt[0]
    stq, stp = math.sqrt(state.sqq), math.sqrt(state.spp)
    peak = float(wigner_at(state, params, state.sq, state.sp))
    for q, p in ((state.sq, state.sp),
                 (state.sq + stq, state.sp - stp),
                 (state.sq - 1.7 * stq, state.sp + 0.4 * stp)):
        rho = density_matrix_at(state, params, q + dlt / 2.0, q - dlt / 2.0)
        integral = np.sum(rho * np.exp(-1j * p * dlt / params.hbar)) * hd
        got = float(integral.real) / (2.0 * math.pi * params.hbar)
        assert abs(got - float(wigner_at(state, params, q, p))) <= 1e-9 * peak


def test_stationary_density_matches_asymptotic_state_kernel():
    params = ModelParams(m=1.5, omega=0.8, hbar=0.7, lam=0.1, coth_eps=3.0)
    inf_state = asymptotic_covariance(params)
    qg = np.linspace(-3.0, 3.0, 31)
    d1 = stationary_density(params, qg[:, None], qg[None, :])
    d2 = density_matrix_at(inf_state, params, qg[:, None], qg[None, :])
    peak = float(np.max(np.abs(d2)))
    assert float(np.max(np.abs(d1 - d2))) <= 1e-12 * peak


def test_stationary_wigner_matches_asymptotic_state():
    params = ModelParams(m=1.5, omega=0.8, hbar=0.7, lam=0.1, coth_eps=3.0)
    inf_state = asymptotic_covariance(params)
    qg = np.linspace(-3.0, 3.0, 21)
    pg = np.linspace(-2.0, 2.0, 19)
    w1 = stationary_wigner(params, qg[:, None], pg[None, :])
    w2 = wigner_at(inf_state, params, qg[:, None], pg[None, :])
    assert float(np.max(np.abs(w1 - w2))) <= 1e-12 * float(np.max(w2))


def test_stationary_forms_require_friction():
    with pytest.raises(ValueError):
        stationary_density(ModelParams(), 0.0, 0.0)
    with pytest.raises(ValueError):
        stationary_wigner(ModelParams(), 0.0, 0.0)


def test_purity_of_pure_state_is_one():
    assert purity(STATE, PARAMS) == pytest.approx(1.0, abs=1e-7)


def test_purity_equals_determinant_expression():
    state, params = _mixed_state()
    want = params.hbar / (2.0 * math.sqrt(state.sigma))
    assert abs(purity(state, params) - want) <= 1e-6


def test_purity_of_hot_thermal_state():
    params = ModelParams(lam=0.1, coth_eps=20.0)
    state = asymptotic_covariance(params)
    assert abs(purity(state, params) - 1.0 / 20.0) <= 1e-6
