import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synclab import reduce_kuramoto as rk
from synclab.errors import CoincidentPhase
from synclab.integrate import IntegratorSettings, integrate
from synclab.state import Flavor, make_phase_config


def test_projection_closed_forms():
    assert rk.stereo_project_phase(np.pi / 2, 0.0) == pytest.approx(1.0)
    assert rk.stereo_project_phase(np.pi, 0.0) == pytest.approx(0.0)
    assert rk.stereo_project_phase(np.pi / 3, 0.0) == pytest.approx(np.sqrt(3))


def test_projection_rejects_coincident_phase():
    with pytest.raises(CoincidentPhase):
        rk.stereo_project_phase(2 * np.pi, 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-6, 2 * np.pi - 1e-6))
def test_projection_is_half_angle_cotangent(beta):
    assert rk.stereo_project_phase(beta, 0.0) == pytest.approx(
        1.0 / np.tan(beta / 2.0), rel=1e-9, abs=1e-9)


def test_ab_all_coincident_empty_sum():
    a, b = rk.ab_coefficients(np.array([]), m=4, kappa=1.0, alpha=0.0)
    assert a == pytest.approx(0.0)
    assert b == pytest.approx(1.0)


def test_ab_half_pi_single_projected_zero():
    n = 5
    a, b = rk.ab_coefficients(np.array([0.0]), m=n - 1, kappa=1.0,
                              alpha=np.pi / 2)
    assert a == pytest.approx((n - 2) / n)
    assert b == pytest.approx(0.0)


def test_ab_bounds_random_instances():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = rng.standard_normal(rng.integers(0, 8)) * rng.uniform(0.1, 20)
        n = x.size + int(rng.integers(1, 4))
        kappa = rng.uniform(0.1, 5.0)
        alpha = rng.uniform(-np.pi, np.pi)
        a, b = rk.ab_coefficients(x, n - x.size, kappa, alpha)
        assert abs(a) <= kappa + 1e-12
        assert abs(b) <= kappa + 1e-12


def test_ab_matches_projected_flow_derivative():
    # d/dt of the projected points equals A + B x along the sine flow
    from synclab.dynamics import kuramoto_rhs
    rng = np.random.default_rng(1)
    theta = np.sort(rng.uniform(0.2, 6.0, 6))
    kappa, alpha = 1.3, 0.4
    cfg = make_phase_config(theta, 0.0, kappa, alpha)
    x = np.array([rk.stereo_project_phase(t, theta[-1]) for t in theta[:-1]])
    d = kuramoto_rhs(cfg)
    eps = 1e-7
    xp = np.array([rk.stereo_project_phase(t, (theta + eps * d)[-1])
                   for t in (theta + eps * d)[:-1]])
    xm = np.array([rk.stereo_project_phase(t, (theta - eps * d)[-1])
                   for t in (theta - eps * d)[:-1]])
    numeric = (xp - xm) / (2 * eps)
    a, b = rk.ab_coefficients(x, 1, kappa, alpha)
    np.testing.assert_allclose(numeric, a + b * x, rtol=1e-5, atol=1e-6)


def test_projection_bookkeeping_with_multiplicity():
    theta = np.array([1.0, 0.5, 0.5 + 2 * np.pi, 2.2, 0.5])
    cfg = make_phase_config(theta, 0.0, 1.0, 0.0)
    data = rk.project_phase_config(cfg)
    assert data.m == 3  # indices 1 and 2 coincide with the reference 0.5
    assert data.x0.size == 2
    assert list(data.perm) == [0, 3, 1, 2, 4]


def test_project_rejects_heterogeneous_frequencies():
    cfg = make_phase_config([0.1, 1.0, 2.0], nu=[0.0, 0.1, 0.0])
    with pytest.raises(ValueError):
        rk.project_phase_config(cfg)


def test_fg_frozen_for_zero_coupling():
    cfg = make_phase_config([0.3, 1.0, 2.5], kappa=0.0)
    data = rk.project_phase_config(cfg)
    red = rk.integrate_fg(data, IntegratorSettings(dt=1e-2), 2.0)
    np.testing.assert_allclose(red.f, 1.0, atol=1e-14)
    np.testing.assert_allclose(red.g, 0.0, atol=1e-14)


@pytest.mark.parametrize("alpha", [0.0, 0.7, 1.2])
def test_fg_constant_coefficient_oracle(alpha):
    # all oscillators coincident: the linear ODE solves in closed form
    kappa, t_final = 1.4, 2.0
    cfg = make_phase_config(np.full(4, 0.8), 0.0, kappa, alpha)
    data = rk.project_phase_config(cfg)
    assert data.m == 4 and data.x0.size == 0
    red = rk.integrate_fg(data, IntegratorSettings(dt=1e-3, record_every=100),
                          t_final)
    f_exact = np.exp(kappa * np.cos(alpha) * red.times)
    g_exact = np.tan(alpha) * (f_exact - 1.0)
    np.testing.assert_allclose(red.f, f_exact, rtol=1e-10)
    np.testing.assert_allclose(red.g, g_exact, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 0.3, np.pi / 2])
def test_reconstruction_error_small(alpha):
    rng = np.random.default_rng(42)
    theta0 = np.sort(rng.uniform(0.3, 5.9, 5))
    cfg = make_phase_config(theta0, 0.0, 1.0, alpha)
    report = rk.co_integrate(cfg, IntegratorSettings(dt=1e-3, record_every=10), 3.0)
    assert report.max_error < 1e-5
    assert report.affine_identity_residual < 1e-6


def test_reconstruction_zero_horizon():
    cfg = make_phase_config([0.3, 1.0, 2.5], kappa=1.0)
    report = rk.co_integrate(cfg, IntegratorSettings(dt=1e-3), 0.0)
    assert report.max_error < 1e-14


def test_reconstruct_rejects_mismatched_grids():
    cfg = make_phase_config([0.3, 1.0, 2.5], kappa=1.0)
    data = rk.project_phase_config(cfg)
    full = integrate(cfg, IntegratorSettings(dt=1e-2), 1.0)
    red = rk.integrate_fg(data, IntegratorSettings(dt=1e-2), 0.5)
    with pytest.raises(ValueError):
        rk.reconstruct_and_compare(full, red)


def test_appendix_bounds_hold_on_random_runs():
    rng = np.random.default_rng(7)
    for _ in range(3):
        theta0 = np.sort(rng.uniform(0.2, 6.0, 6))
        kappa = rng.uniform(0.5, 1.5)
        cfg = make_phase_config(theta0, 0.0, kappa, 0.4)
        data = rk.project_phase_config(cfg)
        red = rk.integrate_fg(data, IntegratorSettings(dt=1e-3, record_every=50),
                              3.0)
        env = np.exp(kappa * red.times)
        assert np.all(np.abs(red.f) <= env * (1 + 1e-6))
        assert np.all(np.abs(red.g) <= (env - 1.0) * (1 + 1e-6) + 1e-9)
        assert np.all(red.f > 0)


def test_dichotomy_single_oscillator_syncs_immediately():
    res = rk.dichotomy_check(np.array([0.4]), 0.5, 1.0, 1.0)
    assert res.verdict == "SyncR1"
    assert res.r_final == pytest.approx(1.0)


def test_dichotomy_precondition_reporting():
    # spread 3.0 exceeds 2*alpha = 1.0: flagged but still classified
    res = rk.dichotomy_check(np.array([0.0, 3.0]), 0.5, 1.0, 1.0,
                             settings=IntegratorSettings(dt=1e-2))
    assert not res.precondition_ok
    assert res.verdict in ("SyncR1", "IncoherenceR0", "Inconclusive")


def test_as_sine_alpha_conversion():
    sine_cfg = make_phase_config([0.0], alpha=0.7, flavor=Flavor.SINE)
    cos_cfg = make_phase_config([0.0], alpha=0.7, flavor=Flavor.COSINE)
    assert rk.as_sine_alpha(sine_cfg) == 0.7
    assert rk.as_sine_alpha(cos_cfg) == pytest.approx(np.pi / 2 - 0.7)
