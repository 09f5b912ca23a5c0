import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasevol.functionals import (
    EntropyRoute,
    Route,
    closed_form_risk,
    critical_function,
    critical_radius,
    entropy,
    entropy_from_spectrum,
    entropy_from_volume,
    entropy_log_integral,
    entropy_number,
    minimax_risk,
    power_law_closed_forms,
)
from phasevol.spectral import EigenvalueSequence, harmonic_spectrum, type_integral_exact
from phasevol.symbols import make_power_law_radial, make_schrodinger_inverse, make_weighted_sobolev_inverse
from phasevol.volume import MCConfig, volume_fn


def oscillator_entropy(eps):
    # int_eps^1 (1/lam - 1)/lam dlam
    return 1.0 / eps - 1.0 + math.log(eps)


def test_oscillator_entropy_antiderivative(oscillator):
    V = volume_fn(oscillator)
    for eps in (0.5, 1e-2, 1e-4):
        h = entropy_from_volume(V, eps)
        assert h.route is EntropyRoute.VOLUME_INTEGRAL
        assert h.value == pytest.approx(0.5 * oscillator_entropy(eps), rel=1e-9)


@pytest.mark.parametrize(
    "sym",
    [
        make_schrodinger_inverse(2.0, 1.0, 1),
        make_schrodinger_inverse(3.0, 0.5, 2),
        make_weighted_sobolev_inverse(2.0, 1.0, 1.0, 2),
        make_weighted_sobolev_inverse(1.5, 2.5, 2.0, 1),
        make_power_law_radial(1.5, 2, amplitude=0.7),
    ],
    ids=["osc", "osc-d2", "weighted-d2", "weighted-d1", "power"],
)
def test_fubini_routes_agree(sym):
    V = volume_fn(sym)
    for eps in (0.1, 0.01):
        a = entropy_log_integral(sym, eps).value
        b = entropy_from_volume(V, eps).value
        assert a == pytest.approx(b, rel=1e-7)


def test_entropy_above_sup_is_zero(oscillator):
    assert entropy_log_integral(oscillator, 2.0).value == 0.0
    assert entropy(oscillator, 2.0).value == 0.0


def test_spectral_and_volume_entropy_close(oscillator):
    seq = harmonic_spectrum(2.0, 1.0, 1, 1e-3)
    spec = entropy_from_spectrum(seq, 1e-3).value
    vol = entropy(oscillator, 1e-3).value
    assert spec / vol == pytest.approx(1.0, abs=2e-3)
    assert entropy(seq, 1e-3).route is EntropyRoute.SPECTRAL_SUM


def test_entropy_numbers_power_law():
    # V = pi/lam^2 on (0,1): H(eps) = pi/2 (eps^-2 - 1), so e_n = (1 + 2n/pi)^(-1/2)
    V = volume_fn(make_power_law_radial(2.0, 1))
    for n in (0, 1, 10, 1000):
        assert entropy_number(V, n) == pytest.approx((1 + 2 * n / math.pi) ** -0.5, rel=1e-9)
    with pytest.raises(ValueError):
        entropy_number(V, -1)


def test_entropy_numbers_spectral():
    seq = EigenvalueSequence.from_values([1.0, 0.5, 0.25])
    e = [entropy_number(seq, n) for n in (0, 0.5, 1, 3, 10)]
    assert e[0] == 1.0
    for n, eps in zip((0.5, 1, 3, 10), e[1:]):
        assert type_integral_exact(seq, 1, eps) == pytest.approx(n, rel=1e-8)


def test_critical_radius_power_law_closed_form():
    V = volume_fn(make_power_law_radial(2.0, 1, coefficient=1.0))
    prev = None
    for kappa in (1e-1, 1e-2, 1e-3):
        cr = critical_radius(V, kappa)
        forms = power_law_closed_forms(1.0, 2.0, kappa)
        assert abs(cr.residual) <= 1e-10
        err = abs(cr.eps_kappa / forms.eps - 1)
        if prev is not None:
            assert err < prev
        prev = err
    assert prev < 1e-5


def test_minimax_risk_spectral_vs_volume(oscillator):
    seq = harmonic_spectrum(2.0, 1.0, 1, 1e-3)
    a = minimax_risk(seq, 1e-3)
    b = minimax_risk(oscillator, 1e-3)
    assert a.route is Route.SPECTRAL and b.route is Route.VOLUME
    assert a.value / b.value == pytest.approx(1.0, abs=1e-3)


def test_risk_definition_consistent(oscillator):
    r = minimax_risk(oscillator, 1e-2)
    V = volume_fn(oscillator)
    k2 = 1e-4
    assert k2 * critical_function(V, r.eps_kappa) == pytest.approx(1.0, abs=1e-10)


def test_risk_bounds_on_spectrum(oscillator):
    # kappa^2 M(2 eps)/2 <= R <= kappa^2 M(eps)
    seq = harmonic_spectrum(2.0, 1.0, 1, 1e-4)
    for kappa in (1e-2, 1e-3):
        r = minimax_risk(seq, kappa)
        eps = r.eps_kappa
        assert kappa**2 * seq.count_at_or_above(2 * eps) / 2 <= r.value <= kappa**2 * seq.count_at_or_above(eps)


def test_closed_form_risk_structure():
    f = power_law_closed_forms(1.0, 2.0, 1e-3)
    assert f.entropy_constant == 0.5
    # alpha=2, c=1: base = kappa^2/6, eps = base^(1/4), risk = 2 base^(1/2)
    assert f.eps == pytest.approx((1e-6 / 6) ** 0.25, rel=1e-12)
    assert f.risk == pytest.approx(2 * (1e-6 / 6) ** 0.5, rel=1e-12)
    assert closed_form_risk(1.0, 2.0, 1e-3).route is Route.CLOSED_FORM
    with pytest.raises(ValueError):
        power_law_closed_forms(1.0, -2.0, 1e-3)


def test_monte_carlo_volume_route():
    sym = make_schrodinger_inverse(2.0, 1.0, 1)
    Vmc = volume_fn(sym, MCConfig(200_000, 1), force_monte_carlo=True)
    h = entropy_from_volume(Vmc, 0.05)
    exact = 0.5 * oscillator_entropy(0.05)
    assert abs(h.value - exact) < 4 * h.error_estimate
    r = minimax_risk(Vmc, 1e-2)
    assert r.value / minimax_risk(sym, 1e-2).value == pytest.approx(1.0, abs=0.02)


families = st.sampled_from(
    [
        make_schrodinger_inverse(2.0, 1.0, 1),
        make_schrodinger_inverse(1.0, 2.0, 2),
        make_weighted_sobolev_inverse(2.0, 1.0, 1.0, 2),
        make_power_law_radial(2.0, 1, coefficient=1.0),
        make_power_law_radial(0.7, 2),
    ]
)


@given(families, st.floats(1e-4, 1.2), st.floats(1e-4, 1.2))
def test_entropy_nonincreasing(sym, a, b):
    V = volume_fn(sym)
    lo, hi = sorted((a, b))
    assert entropy(V, lo).value >= entropy(V, hi).value - 1e-9


@settings(max_examples=100)
@given(families, st.floats(1e-3, 1.0), st.floats(1.05, 20.0))
def test_risk_and_radius_increase_with_kappa(sym, kappa, factor):
    V = volume_fn(sym)
    a = minimax_risk(V, kappa)
    b = minimax_risk(V, kappa * factor)
    assert b.value > a.value
    assert b.eps_kappa > a.eps_kappa


@given(families, st.integers(0, 500))
def test_entropy_numbers_nonincreasing(sym, n):
    V = volume_fn(sym)
    assert entropy_number(V, n + 1) <= entropy_number(V, n)


@given(st.lists(st.floats(1e-2, 1.0), min_size=1, max_size=10), st.floats(1e-2, 1.0), st.floats(1.05, 10.0))
def test_spectral_risk_monotone(vals, kappa, factor):
    seq = EigenvalueSequence.from_values(vals)
    a = minimax_risk(seq, kappa)
    b = minimax_risk(seq, kappa * factor)
    assert b.value >= a.value
    assert b.eps_kappa >= a.eps_kappa
