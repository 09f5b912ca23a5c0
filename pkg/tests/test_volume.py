import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from phasevol.errors import ConfigurationError, DomainError
from phasevol.numerics import unit_ball_volume
from phasevol.symbols import (
    make_custom,
    make_power_law_radial,
    make_schrodinger_inverse,
    make_weighted_sobolev_inverse,
)
from phasevol.volume import (
    MCConfig,
    VolumeMethod,
    rv_index_estimate,
    volume_closed_form_schrodinger,
    volume_fn,
    volume_monte_carlo,
    volume_weighted_semi_analytic,
)


def test_schrodinger_closed_form_values():
    assert volume_closed_form_schrodinger(2.0, 1.0, 1, 0.1) == pytest.approx(4.5, rel=1e-13)
    assert volume_closed_form_schrodinger(2.0, 1.0, 1, 1e-3) == pytest.approx(499.5, rel=1e-13)
    # d=2: omega_4/(2 pi)^2 * 99^2 = 99^2/8
    assert volume_closed_form_schrodinger(2.0, 1.0, 2, 0.01) == pytest.approx(99**2 / 8, rel=1e-13)
    assert volume_closed_form_schrodinger(2.0, 1.0, 1, 1.0) == 0.0


def test_method_selection():
    assert volume_fn(make_schrodinger_inverse(2, 1, 1)).method is VolumeMethod.CLOSED_FORM
    assert volume_fn(make_power_law_radial(2, 1)).method is VolumeMethod.CLOSED_FORM
    assert volume_fn(make_weighted_sobolev_inverse(2, 1, 1, 2)).method is VolumeMethod.SEMI_ANALYTIC
    with pytest.raises(ConfigurationError):
        volume_fn(make_custom(lambda x, w: 1.0, 1, 1.0))


def test_array_and_scalar_calls_agree():
    V = volume_fn(make_schrodinger_inverse(3.0, 2.0, 2))
    lam = np.geomspace(1e-4, 2.0, 11)
    np.testing.assert_allclose(V(lam), [V(float(t)) for t in lam], rtol=1e-14)


def test_power_law_volume_is_exact_power():
    V = volume_fn(make_power_law_radial(2.0, 1, coefficient=1.0))
    for lam in (0.5, 1e-2, 1e-5):
        assert V(lam) == pytest.approx(lam**-2, rel=1e-12)


def test_weighted_semi_analytic_against_brute_force():
    # d=1: direct 2D quadrature of the indicator on a fine grid.
    s, r, c, lam = 2.0, 1.0, 1.0, 0.2
    x = np.linspace(-30, 30, 6001)
    w = np.linspace(-1, 1, 2001)
    X, W = np.meshgrid(x, w)
    sig = (1 + 4 * math.pi**2 * W**2) ** (-s / 2) * (1 + c * X**2) ** (-r / 2)
    brute = np.mean(sig > lam) * 60 * 2
    assert volume_weighted_semi_analytic(s, r, c, 1, lam) == pytest.approx(brute, rel=2e-3)


def test_weighted_matches_schrodinger_shape_limit():
    # r = s, d=1, c=1 at lam close to 1 is tiny but positive.
    v = volume_weighted_semi_analytic(1.0, 1.0, 1.0, 1, 0.999)
    assert 0 < v < 1e-2


@pytest.mark.parametrize(
    "sym",
    [make_schrodinger_inverse(2.0, 1.0, 1), make_weighted_sobolev_inverse(2.0, 1.0, 1.0, 2)],
    ids=["schrodinger", "weighted"],
)
def test_monte_carlo_agrees_with_exact(sym):
    V = volume_fn(sym)
    for lam in (0.3, 0.1):
        est = volume_monte_carlo(sym, lam, 400_000, seed=5)
        assert abs(est.mean - V(lam)) < 4 * est.std_error + 1e-12


def test_monte_carlo_zero_above_sup():
    est = volume_monte_carlo(make_schrodinger_inverse(2, 1, 1), 1.5, 1000, 0)
    assert est.mean == 0.0 and est.std_error == 0.0


def test_custom_symbol_monte_carlo():
    # Same function as the oscillator, supplied as a black box.
    f = lambda x, w: (1 + np.sum(x * x, -1) + 4 * math.pi**2 * np.sum(w * w, -1)) ** -1.0
    sym = make_custom(f, 1, 1.0, envelope=(1.0, 2.0), vectorized=True)
    V = volume_fn(sym, MCConfig(200_000, 3))
    est = V.estimate(0.1)
    assert abs(est.mean - 4.5) < 4 * est.std_error
    with pytest.raises(ConfigurationError):
        volume_fn(make_schrodinger_inverse(2, 1, 1)).estimate(0.1)


def test_rv_index():
    V = volume_fn(make_schrodinger_inverse(2.0, 1.0, 2))
    alpha = rv_index_estimate(V, [1e-4, 1e-5, 1e-6])
    assert alpha == pytest.approx(2.0, rel=1e-3)
    with pytest.raises(ValueError):
        rv_index_estimate(V, [1e-4, 1e-5])
    with pytest.raises(ValueError):
        rv_index_estimate(V, [1e-4, 1e-5, 5e-5])
    with pytest.raises(ValueError):
        rv_index_estimate(V, [1e-4, 5e-5, 2e-5])
    with pytest.raises(DomainError):
        rv_index_estimate(V, [2.0, 0.1, 1e-3])


@given(
    st.sampled_from(["schrodinger", "weighted", "power"]),
    st.integers(1, 3),
    st.floats(0.5, 4.0),
    st.floats(0.5, 4.0),
    st.floats(0.2, 5.0),
    st.lists(st.floats(1e-6, 1.5), min_size=2, max_size=6),
)
def test_volume_nonincreasing(kind, d, s, r, c, lams):
    if kind == "schrodinger":
        sym = make_schrodinger_inverse(s, c, d)
    elif kind == "weighted":
        sym = make_weighted_sobolev_inverse(s, r, c, d)
    else:
        sym = make_power_law_radial(s, d)
    V = volume_fn(sym)
    lams = sorted(lams)
    vals = [V(t) for t in lams]
    assert all(v >= 0 for v in vals)
    for a, b in zip(vals, vals[1:]):
        assert b <= a * (1 + 1e-8) + 1e-300


@given(st.floats(0.5, 4.0), st.integers(1, 3), st.floats(0.1, 10.0), st.floats(1e-4, 0.9))
def test_power_law_amplitude_scaling(alpha, d, amp, lam):
    base = volume_fn(make_power_law_radial(alpha, d))
    scaled = volume_fn(make_power_law_radial(alpha, d, amplitude=amp))
    assert scaled(lam * amp) == pytest.approx(base(lam), rel=1e-10)


def test_unit_ball_prefactor_consistency():
    # Schrodinger volume scales like (2 pi sqrt c)^(-d) in c.
    a = volume_closed_form_schrodinger(2.0, 1.0, 2, 0.01)
    b = volume_closed_form_schrodinger(2.0, 4.0, 2, 0.01)
    assert a / b == pytest.approx(4.0, rel=1e-13)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
