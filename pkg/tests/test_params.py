import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rellich.params import (
    ParameterError, Params, alpha_star, derive_params, gamma_of, hardy_exponent, is_resonant,
    mu22_closed_form, resonant_mode, sphere_eigenvalue,
)


def test_constants_n5_p2_alpha0():
    d = derive_params(Params(5, 2, 2, 0.0))
    assert d.gamma == pytest.approx(5 / 4)
    assert d.beta == pytest.approx(4.0)          # beta = 2p - alpha when q = p
    assert d.H2 == pytest.approx(0.5)
    assert d.A == pytest.approx(1.0)
    assert d.alpha_star == pytest.approx(2.0)
    assert d.p_crit == pytest.approx(10.0)
    assert d.gamma_bar == pytest.approx(9 / 4 + 1)


@pytest.mark.parametrize("n,p,alpha,gamma", [
    (5, 2, 0, 5 / 4), (5, 2, 3, 2.0), (4, 3, 2, 0.0), (6, 1.5, 1, 32 / 9), (3, 2, 6, -15 / 4),
])
def test_gamma_values(n, p, alpha, gamma):
    # gamma = (m - 2)(n - m), m = (n + alpha)/p, expanded by hand
    assert gamma_of(n, p, alpha) == pytest.approx(gamma, abs=1e-14)


def test_gamma_bar_only_for_p2():
    assert derive_params(Params(5, 3, 3, 1.0)).gamma_bar is None


def test_p_crit_absent_in_low_dimension():
    assert Params(4, 2, 2, 0.0).p_crit is None
    Params(4, 2, 50, 0.0).check_sobolev_range()


def test_sobolev_range_enforced():
    with pytest.raises(ParameterError):
        Params(5, 2, 11, 0.0).check_sobolev_range()


@pytest.mark.parametrize("kw", [dict(n=2, p=2, q=2, alpha=0), dict(n=5, p=1, q=2, alpha=0),
                                dict(n=5, p=2, q=1.5, alpha=0), dict(n=4.5, p=2, q=2, alpha=0)])
def test_invalid_params(kw):
    with pytest.raises(ParameterError):
        Params(**kw)


def test_rellich_range_is_positivity_set_of_gamma():
    P = Params(5, 2, 2, 0.0)
    lo, hi = P.rellich_range
    assert (lo, hi) == (-1, 5)
    for a in np.linspace(lo - 2, hi + 2, 81):
        inside = P.with_alpha(a).in_rellich_range()
        assert inside == (gamma_of(5, 2, a) > 1e-14)


@given(n=st.integers(3, 9), p=st.floats(1.1, 4.0), alpha=st.floats(-10, 20))
def test_gamma_reflection_symmetry(n, p, alpha):
    a2 = 2 * alpha_star(n, p) - alpha
    assert gamma_of(n, p, a2) == pytest.approx(gamma_of(n, p, alpha), rel=1e-10, abs=1e-10)
    assert derive_params(Params(n, p, p, a2)).A == pytest.approx(-derive_params(Params(n, p, p, alpha)).A,
                                                                 abs=1e-10)


def test_hardy_exponent():
    assert hardy_exponent(0.0, 4, 2) == pytest.approx(1.0)
    assert hardy_exponent(2 - 5, 5, 2) == 0.0


def test_sphere_eigenvalue():
    assert sphere_eigenvalue(0, 5) == 0
    assert sphere_eigenvalue(2, 5) == 10
    with pytest.raises(ValueError):
        sphere_eigenvalue(-1, 5)
    with pytest.raises(ValueError):
        sphere_eigenvalue(1.5, 5)
    with pytest.raises(ValueError):
        sphere_eigenvalue(1, 2)


def test_resonances_n5():
    # alpha = 2 +- sqrt(9 + 4 lambda_k) for n = 5, p = 2
    hits = {a: resonant_mode(Params(5, 2, 2, a)) for a in (-5, -3, -1, 5, 7, 9, 11)}
    assert hits == {-5: 2, -3: 1, -1: 0, 5: 0, 7: 1, 9: 2, 11: 3}
    for a in (0, 2, 4, 6, 7.5, 8, 10):
        assert not is_resonant(Params(5, 2, 2, a))


@settings(max_examples=60)
@given(n=st.integers(3, 10), k=st.integers(0, 40), sign=st.sampled_from([-1, 1]))
def test_resonance_roots_found_for_any_mode(n, k, sign):
    lam = k * (n - 2 + k)
    alpha = 2 + sign * math.sqrt((n - 2) ** 2 + 4 * lam)
    assert resonant_mode(Params(n, 2, 2, alpha)) == k


def test_mu22_closed_form():
    assert mu22_closed_form(5, 0.0) == (pytest.approx(25 / 16), 0)
    assert mu22_closed_form(5, 7.0)[0] == pytest.approx(0.0, abs=1e-24)
    val, k = mu22_closed_form(5, 8.0)   # gamma = -27/4 sits between lambda_1 = 4 and lambda_2 = 10
    assert (val, k) == (pytest.approx((6.75 - 4) ** 2), 1)


@given(n=st.integers(3, 8), alpha=st.floats(-15, 25))
def test_mu22_is_minimum_over_modes(n, alpha):
    g = gamma_of(n, 2, alpha)
    brute = min((g + k * (n - 2 + k)) ** 2 for k in range(200))
    assert mu22_closed_form(n, alpha)[0] == pytest.approx(brute, rel=1e-12, abs=1e-12)
