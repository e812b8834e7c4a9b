import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rellich.cylinder import (
    BumpSum, CylinderFunction, Grid1D, GridError, ModeProfile, fd_derivatives, first_order_energy,
    first_order_norms, gauss_legendre_panels, hat_a, hat_alpha, lq_norm, reflect_and_hat,
    rellich_sobolev_quotient, second_order_energy, second_order_norms, uniform_grid,
)
from rellich.harness import SampleSpec, generate_samples
from rellich.modes import cap_for_eigenvalue, harmonic
from rellich.params import Params


def _radial(grid, amps=(1.0,), centers=(0.0,), widths=(6.0,), k=0, n=5):
    return CylinderFunction.single(harmonic(k, n), grid, BumpSum(amps, centers, widths))


def test_uniform_grid_trapezoid():
    g = uniform_grid(20, 2048)
    assert g.is_uniform and g.is_symmetric
    assert g.h == pytest.approx(40 / 2047)
    assert g.integrate(np.ones(g.size)) == pytest.approx(40.0)


@pytest.mark.parametrize("nodes,weights", [
    (np.linspace(0, 1, 8), np.ones(8)),
    (np.linspace(1, 0, 32), np.ones(32)),
    (np.linspace(0, 1, 32), -np.ones(32)),
])
def test_grid_validation(nodes, weights):
    with pytest.raises(GridError):
        Grid1D(nodes, weights)


def test_grid_kind_validation():
    with pytest.raises(GridError):
        Grid1D(np.linspace(0, 1, 32), np.ones(32), kind="sphere")


def test_gauss_legendre_panels_exact_on_polynomials():
    g = gauss_legendre_panels([0.0, 0.5, 2.0], order=8)
    assert g.integrate(g.nodes ** 9) == pytest.approx(2.0 ** 10 / 10)


def test_fd_derivatives_second_order():
    errs = []
    for N in (201, 401):
        x = np.linspace(0, 2 * np.pi, N)
        d1, d2 = fd_derivatives(np.sin(x), x[1] - x[0])
        errs.append((np.max(np.abs(d1 - np.cos(x))), np.max(np.abs(d2 + np.sin(x)))))
    assert errs[0][0] / errs[1][0] == pytest.approx(4, rel=0.1)
    assert errs[0][1] / errs[1][1] == pytest.approx(4, rel=0.25)


def test_fd_reversal_symmetry():
    f = np.random.default_rng(0).normal(size=64)
    d1, d2 = fd_derivatives(f, 0.1)
    r1, r2 = fd_derivatives(f[::-1], 0.1)
    np.testing.assert_array_equal(r1, -d1[::-1])
    np.testing.assert_array_equal(r2, d2[::-1])


@given(c=st.floats(-5, 5), W=st.floats(0.5, 5), s=st.floats(-10, 10))
def test_bump_derivatives_match_difference_quotients(c, W, s):
    b = BumpSum((1.3,), (c,), (W,))
    h = 1e-5
    v, d1, d2 = b(np.array([s - h, s, s + h]))
    assert d1[1] == pytest.approx((v[2] - v[0]) / (2 * h), abs=1e-6)
    assert d2[1] == pytest.approx((d1[2] - d1[0]) / (2 * h), abs=1e-5)


def test_cylinder_function_invariants():
    g = uniform_grid(10, 512)
    with pytest.raises(ValueError):
        _radial(g, centers=(9.0,), widths=(3.0,))        # nonzero at the end
    prof = ModeProfile.from_source(harmonic(0, 5), g, BumpSum((1.0,), (0.0,), (3.0,)))
    with pytest.raises(ValueError):
        CylinderFunction(g, (prof, prof))
    with pytest.raises(GridError):
        CylinderFunction(Grid1D(np.linspace(0, 1, 32) ** 2, np.ones(32)), (prof,))


def test_json_round_trip_including_cap():
    g = uniform_grid(10, 512)
    cap = cap_for_eigenvalue(3, 3.75)
    f = CylinderFunction(g, (
        ModeProfile.from_source(harmonic(1, 3), g, BumpSum((1.0,), (0.0,), (4.0,))),
        ModeProfile.from_source(cap, g, BumpSum((-0.5,), (1.0,), (3.0,))),
    ))
    back = CylinderFunction.from_json(json.loads(json.dumps(f.to_json())))
    for a, b in zip(f.modes, back.modes):
        np.testing.assert_array_equal(a.values, b.values)
        assert a.mode.eigenvalue == pytest.approx(b.mode.eigenvalue)
    assert back.modes[1].mode.theta0 == pytest.approx(cap.theta0, abs=1e-12)


def test_shift_leaves_cylinder_quantities_invariant():
    g = uniform_grid(20, 2048)
    f = _radial(g, amps=(1.0, -0.4), centers=(-3.0, 4.0), widths=(5.0, 6.0))
    P = Params(5, 2, 2, 0.0)
    sh = f.shifted(37)
    assert second_order_energy(sh, P) == pytest.approx(second_order_energy(f, P), rel=1e-12)
    assert lq_norm(sh, 2) == pytest.approx(lq_norm(f, 2), rel=1e-12)


def test_quotient_scale_invariance():
    g = uniform_grid(20, 2048)
    f = _radial(g, k=1)
    P = Params(5, 2, 4, 0.5)
    assert rellich_sobolev_quotient(f.scaled(3.7), P) == pytest.approx(rellich_sobolev_quotient(f, P), rel=1e-12)


def _worst_gaps(samples, P, a):
    first = second = 0.0
    for s in samples:
        gp, lp = first_order_norms(s, a, P)
        first = max(first, gp.rel_gap, lp.rel_gap)
        lap, lp2 = second_order_norms(s, P)
        second = max(second, lap.rel_gap, lp2.rel_gap)
    return first, second


@pytest.mark.parametrize("P,modes,a", [
    (Params(5, 2, 2, 0.0), (0, 1, 2), -2.0),
    (Params(4, 2, 2, 1.0), (0, 1, 3), 0.5),
    (Params(6, 1.5, 1.5, 1.0), (0,), 0.0),
])
def test_norm_identities_small_batch(P, modes, a):
    samples = generate_samples(SampleSpec(seed=3, n=P.n, modes=modes, count=10), uniform_grid(20, 2048))
    first, second = _worst_gaps(samples, P, a)
    assert first < 1e-5 and second < 1e-5


def test_norm_gap_within_curvature_bound_for_p3():
    # second-order differences: gap < 5 h^2 * curvature scale (max|w''| / max|w|)
    P = Params(5, 3, 3, 2.0)
    for N in (2048, 4095):
        grid = uniform_grid(20, N)
        for s in generate_samples(SampleSpec(seed=4, n=5, modes=(0,), count=10), grid):
            m = s.modes[0]
            kappa = np.max(np.abs(m.source(grid.nodes)[2])) / np.max(np.abs(m.values))
            gp, lp = first_order_norms(s, 0.0, P)
            lap, lp2 = second_order_norms(s, P)
            assert max(gp.rel_gap, lp.rel_gap, lap.rel_gap, lp2.rel_gap) < 5 * grid.h ** 2 * kappa


def test_first_order_rejects_degenerate_weight():
    g = uniform_grid(20, 1024)
    with pytest.raises(ValueError):
        first_order_norms(_radial(g), 2 - 5, Params(5, 2, 2, 0.0))


def test_non_two_exponent_rejects_mixed_modes():
    g = uniform_grid(20, 1024)
    f = generate_samples(SampleSpec(seed=0, n=5, modes=(0, 1), count=1), g)[0]
    with pytest.raises(ValueError):
        second_order_norms(f, Params(5, 3, 3, 2.0))
    with pytest.raises(ValueError):
        first_order_norms(f, 0.0, Params(5, 3, 3, 2.0))


def test_coarse_grid_rejected():
    g = uniform_grid(20, 128)
    with pytest.raises(GridError):
        second_order_norms(_radial(g, widths=(1.0,)), Params(5, 2, 2, 0.0))


def test_cap_mode_norm_identity_converges():
    cap = cap_for_eigenvalue(3, 3.75)
    gaps = []
    for N in (2048, 4096):
        f = CylinderFunction.single(cap, uniform_grid(20, N), BumpSum((1.0,), (0.0,), (6.0,)))
        lap, lp = second_order_norms(f, Params(3, 2, 2, 6.0))
        assert lp.rel_gap < 1e-12
        gaps.append(lap.rel_gap)
    assert gaps[0] < 1e-4
    assert gaps[0] / gaps[1] == pytest.approx(4, rel=0.1)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), alpha=st.floats(-4, 10), q=st.floats(2, 8), k=st.integers(0, 3))
def test_reflection_identity(seed, alpha, q, k):
    P = Params(5, 2, q, alpha)
    f = generate_samples(SampleSpec(seed=seed, n=5, modes=(k,), count=1), uniform_grid(20, 1024))[0]
    fh, Ph = reflect_and_hat(f, P)
    assert Ph.alpha == pytest.approx(hat_alpha(alpha, 5, 2))
    assert rellich_sobolev_quotient(fh, Ph) == pytest.approx(rellich_sobolev_quotient(f, P), rel=1e-12)
    a = alpha - 2
    if abs(a + 3) > 1e-6:
        assert first_order_energy(fh, hat_a(a, 5, 2), 2) == pytest.approx(first_order_energy(f, a, 2), rel=1e-12)


def test_reflection_needs_symmetric_grid():
    g = uniform_grid(20, 1024, lo=-10.0)
    with pytest.raises(GridError):
        reflect_and_hat(_radial(g, centers=(10.0,)), Params(5, 2, 2, 0.0))
