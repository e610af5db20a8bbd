import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ep3trap.algebra import AlgebraState, casimir
from ep3trap.constants import DomainError, PreconditionError
from ep3trap.observables import (
    analytic_period_tau,
    analytic_visibility,
    measure_period_and_visibility,
    parabola_vertex,
    scaled_variances,
    sigma_axes,
    stationarity_condition,
)
from ep3trap.propagation import FrequencyProfile, exact_trajectory, tau_grid


def ground_trajectory(mu, tau_end, spp=512):
    return exact_trajectory(AlgebraState.ground(1.0), FrequencyProfile(1.0, mu), tau_grid(mu, tau_end, spp))


def physical_states():
    # h > sqrt(l^2 + d^2) with a margin so the narrow axis is resolvable
    return st.tuples(
        st.floats(0.05, 5), st.floats(0, 0.95), st.floats(0, 2 * math.pi), st.floats(0.2, 5)
    ).map(lambda a: AlgebraState(a[0], a[0] * a[1] * math.cos(a[2]), a[0] * a[1] * math.sin(a[2]), a[3]))


def test_sigma_axes_ground_state():
    axes = sigma_axes(AlgebraState(0.5, 0.0, 0.0, 1.0))
    assert axes.sigma_w == pytest.approx(1 / math.sqrt(2))
    assert axes.sigma_n == pytest.approx(1 / math.sqrt(2))
    assert axes.rho == 1.0


def test_sigma_axes_squeezed():
    axes = sigma_axes(AlgebraState(0.625, 0.375, 0.0, 1.0))
    assert axes.sigma_w ** 2 == pytest.approx(1.0)
    assert axes.sigma_n ** 2 == pytest.approx(0.25)
    assert axes.rho == pytest.approx(2.0)


def test_sigma_axes_rejects_degenerate_narrow_axis():
    # bypass state validation to reach the observable's own guard
    state = AlgebraState(0.5, 0.0, 0.0, 1.0)
    object.__setattr__(state, "l", 0.5)
    with pytest.raises(DomainError):
        sigma_axes(state)


@given(physical_states())
def test_axes_product_and_ratio(state):
    axes = sigma_axes(state)
    assert axes.sigma_w * axes.sigma_n == pytest.approx(math.sqrt(casimir(state)), rel=1e-9)
    assert axes.rho >= 1.0


@given(physical_states())
def test_scaled_variance_identities(state):
    x2, p2 = scaled_variances(state)
    assert x2 + p2 == pytest.approx(2 * state.h / state.omega, rel=1e-12)
    assert x2 - p2 == pytest.approx(-2 * state.l / state.omega, rel=1e-12, abs=1e-15)


def test_scaled_variances_examples():
    assert scaled_variances(AlgebraState.ground(1.0)) == (0.5, 0.5)
    x2, p2 = scaled_variances(AlgebraState(0.9, 0.0, 0.3, 3.0))
    assert x2 == p2 == pytest.approx(0.3)


@pytest.mark.parametrize("mu, expected", [
    (0.0, math.pi), (1.0, 2 * math.pi / math.sqrt(3)), (2.0, math.inf), (-2.5, math.inf),
])
def test_analytic_period(mu, expected):
    assert analytic_period_tau(mu) == pytest.approx(expected)


@pytest.mark.parametrize("mu, expected", [(1.0, 0.5), (0.0, 0.0), (2.0, 1.0), (-1.5, 0.75), (3.0, 1.0)])
def test_analytic_visibility(mu, expected):
    assert analytic_visibility(mu) == expected


@pytest.mark.parametrize("state, mu, expected", [
    (AlgebraState(0.5, 0, 0, 1.0), 1.7, 0.0),
    (AlgebraState(1.0, 0.4, 0.1, 1.0), 1.0, 0.14),
    (AlgebraState(1.0, 0.0, -0.5, 1.0), 1.0, -0.5),
])
def test_stationarity_condition(state, mu, expected):
    assert stationarity_condition(state, mu) == pytest.approx(expected)


def test_parabola_vertex():
    x = np.array([0.0, 1.0, 2.0])
    xv, yv = parabola_vertex(x, 3 - (x - 0.7) ** 2)
    assert (xv, yv) == pytest.approx((0.7, 3.0))


def test_measure_mu_one():
    period = 2 * math.pi / math.sqrt(3)
    report = measure_period_and_visibility(ground_trajectory(1.0, 6 * period))
    assert report.regime == "oscillatory"
    assert report.measured_period_tau == pytest.approx(period, rel=1e-3)
    assert abs(report.measured_visibility - 0.5) < 1e-3
    assert report.rho_max == pytest.approx(3.0, abs=1e-4)
    assert report.rho_min == pytest.approx(1.0, abs=1e-6)


def test_measure_mu_half():
    period = analytic_period_tau(0.5)
    report = measure_period_and_visibility(ground_trajectory(0.5, 4 * period))
    assert abs(report.measured_visibility - 0.25) < 1e-3


def test_measure_beyond_ep_is_monotonic():
    report = measure_period_and_visibility(ground_trajectory(2.5, 10.0))
    assert report.regime == "monotonic"
    assert report.measured_period_tau is None
    assert report.to_dict()["T_analytic"] is None


def test_measure_constant_trap_is_flat():
    report = measure_period_and_visibility(ground_trajectory(0.0, 4 * math.pi))
    assert report.measured_visibility == 0.0
    assert report.rho_max == pytest.approx(1.0)


def test_measure_preconditions():
    period = analytic_period_tau(1.0)
    with pytest.raises(PreconditionError):
        measure_period_and_visibility(ground_trajectory(1.0, 2 * period))
    with pytest.raises(PreconditionError):
        measure_period_and_visibility(ground_trajectory(1.0, 4 * period, spp=32))


def test_negative_mu_matches_positive():
    period = analytic_period_tau(1.2)
    a = ground_trajectory(1.2, 4 * period)
    b = ground_trajectory(-1.2, 4 * period)
    np.testing.assert_allclose(a.rho, b.rho, rtol=1e-12)
