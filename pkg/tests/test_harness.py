import csv
import io
import json
import math

import numpy as np
import pytest

from rellich.cylinder import (
    CylinderFunction, gauss_legendre_panels, hat_alpha, second_order_energy, uniform_grid,
)
from rellich.harness import (
    CSV_COLUMNS, SampleSpec, alpha_grid, default_verify_spec, generate_samples, make_report,
    report_json, run_sweep, strip_volatile, sweep_csv, sweep_row, verify_inequalities,
)
from rellich.modes import harmonic
from rellich.params import ParameterError, Params, derive_params, mu22_closed_form


class LogBump:
    """w(s) = sqrt(s) psi(log s), psi a (1 - y^2)^4 bump on [x0, x1]."""

    def __init__(self, x0, x1):
        self.x0, self.x1 = x0, x1
        self.c, self.W = (x0 + x1) / 2, (x1 - x0) / 2

    @property
    def breakpoints(self):
        return np.array([math.exp(self.x0), math.exp(self.x1)])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = [np.zeros_like(s) for _ in range(3)]
        m = (s > math.exp(self.x0)) & (s < math.exp(self.x1))
        x = np.log(s[m])
        y = (x - self.c) / self.W
        psi = (1 - y * y) ** 4
        p1 = -8 * y * (1 - y * y) ** 3 / self.W
        p2 = (-8 * (1 - y * y) ** 3 + 48 * y * y * (1 - y * y) ** 2) / self.W ** 2
        wx = np.exp(x / 2) * (psi / 2 + p1)
        wxx = np.exp(x / 2) * (psi / 4 + p1 + p2)
        out[0][m] = np.exp(x / 2) * psi
        out[1][m] = wx / s[m]
        out[2][m] = (wxx - wx) / s[m] ** 2
        return tuple(out)


def test_samples_are_deterministic():
    spec = SampleSpec(seed=11, n=4, count=5)
    a, b = generate_samples(spec), generate_samples(spec)
    c = generate_samples(SampleSpec(seed=12, n=4, count=5))
    for x, y in zip(a, b):
        for mx, my in zip(x.modes, y.modes):
            np.testing.assert_array_equal(mx.values, my.values)
    assert not np.array_equal(a[0].modes[0].values, c[0].modes[0].values)


def test_positive_support_and_cap_mode():
    g = uniform_grid(20, 2048)
    for f in generate_samples(SampleSpec(seed=0, n=3, modes=(0,), cap_nu=1.5, count=5,
                                         positive_support=True), g):
        assert len(f.modes) == 2 and f.modes[1].mode.kind == "cap"
        for m in f.modes:
            assert not np.any(m.values[g.nodes <= 0])


@pytest.mark.parametrize("kw", [
    {"modes": ()}, {"amplitude_range": (0.0, 1.0)}, {"width_range": (-1.0, 1.0)}, {"count": 0},
])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        SampleSpec(**kw)


def test_widths_must_fit():
    with pytest.raises(ValueError):
        generate_samples(SampleSpec(width_range=(30.0, 40.0)), uniform_grid(20, 2048))


@pytest.mark.parametrize("suite,params,a", [
    ("hardy", Params(4, 2, 2, 2.0), 0.0),
    ("hardy", Params(5, 3, 3, 2.0), 0.0),
    ("rellich", Params(5, 2, 2, 2.0), None),
    ("rellich", Params(5, 3, 3, 6.0), None),
    ("ckn", Params(5, 2, 2, 2.0), 1.0),
    ("ckn", Params(5, 2, 4, 2.0), 1.0),
    ("rellich-sobolev", Params(5, 2, 2, 8.0), None),
    ("rellich-sobolev", Params(5, 2, 4, 2.0), None),
    ("improved-log", Params(5, 2, 2, 4.0), None),
])
def test_random_samples_satisfy_inequalities(suite, params, a):
    samples = generate_samples(default_verify_spec(suite, params, seed=5, count=40))
    rep = verify_inequalities(samples, params, suite, a=a)
    assert rep.passed, rep.as_dict()
    assert rep.min_slack > -1e-8
    assert json.loads(json.dumps(rep.as_dict()))["samples"] == 40


def test_overstated_constant_is_detected():
    # the hardy quotient of a spread radial profile approaches |H|^p from above
    P = Params(4, 2, 2, 2.0)
    g = uniform_grid(200, 20001)
    from rellich.cylinder import BumpSum
    f = CylinderFunction.single(harmonic(0, 4), g, BumpSum((1.0,), (0.0,), (190.0,)))
    rep = verify_inequalities([f], P, "hardy", a=0.0)
    assert rep.passed
    assert rep.empirical_min == pytest.approx(rep.constant, rel=1e-2)


def test_improved_log_constant_fails_on_spread_profiles():
    # finding: with the printed remainder constant, profiles spread over many
    # scales in s violate the inequality; the excess over the main term per
    # unit of log remainder tends to kappa/4 < gamma_bar/2
    P = Params(5, 2, 2, 4.0)
    d = derive_params(P)
    mu = mu22_closed_form(5, 4.0)[0]
    kappa = 4 * (((5 - 2) / 2) ** 2 + ((4 - 2) / 2) ** 2) / 2
    ratios = []
    for x1 in (6.0, 8.0, 14.0, 20.0):
        G = gauss_legendre_panels(np.linspace(1.0, x1, 400), order=16)
        s = np.exp(G.nodes)
        w, w1, w2 = LogBump(1.0, x1)(s)
        E = G.integrate((w2 - 2 * d.A * w1 - d.gamma * w) ** 2 * s)
        N2 = G.integrate(w ** 2 * s)
        R = G.integrate(w ** 2 / s)
        ratios.append((E - mu * N2) / R)
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[1] < d.gamma_bar / 2 < ratios[0]
    assert kappa / 4 < ratios[-1] < kappa / 4 + 0.5

    g = uniform_grid(math.exp(8) / 2 + 1, int((math.exp(8) + 2) / 0.05), lo=0.0)
    f = CylinderFunction.single(harmonic(0, 5), g, LogBump(1.0, 8.0))
    rep = verify_inequalities([f], P, "improved-log")
    assert rep.violations == [0]
    assert rep.min_slack == pytest.approx(-3.313e-5, rel=1e-2)


def test_suite_argument_checks():
    radial = generate_samples(SampleSpec(modes=(0,), count=2))
    mixed = generate_samples(SampleSpec(modes=(0, 1), count=2))
    with pytest.raises(ValueError):
        verify_inequalities(radial, Params(5, 2, 2, 2.0), "poincare")
    with pytest.raises(ValueError):
        verify_inequalities(mixed, Params(5, 3, 3, 6.0), "rellich")
    with pytest.raises(ParameterError):
        verify_inequalities(radial, Params(5, 2, 2, 30.0), "rellich")
    with pytest.raises(ParameterError):
        verify_inequalities(radial, Params(5, 2, 2, 2.0), "hardy", a=-3.0)
    with pytest.raises(ParameterError):
        verify_inequalities(radial, Params(5, 2, 2, 6.0), "improved-log")
    with pytest.raises(ValueError):
        verify_inequalities(radial, Params(5, 2, 2, 4.0), "improved-log")


# --- sweeps ----------------------------------------------------------------

def test_alpha_grid():
    assert alpha_grid(-1, 1, 0.5) == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert alpha_grid(0, 1, 0.1)[-1] == 1.0
    with pytest.raises(ValueError):
        alpha_grid(0, 1, 0)
    with pytest.raises(ValueError):
        alpha_grid(1, 0, 0.1)


def test_resonant_row():
    rec = sweep_row(7.0, Params(5, 2, 2, 0.0), grid=uniform_grid(20, 2048))
    assert rec.resonant
    assert rec.mu_closed == pytest.approx(0.0, abs=1e-20)
    assert rec.checks_failed == 0, rec.failed
    assert rec.rate_slope == pytest.approx(2.0, abs=0.05)


def test_mirror_rows_agree():
    T = Params(5, 2, 2, 0.0)
    for alpha in (0.5, 2.5, 9.0):
        a = sweep_row(alpha, T, tasks=("closed", "symbol"))
        b = sweep_row(hat_alpha(alpha, 5, 2), T, tasks=("closed", "symbol"))
        assert b.mu_closed == pytest.approx(a.mu_closed, rel=1e-12)
        assert b.mu_symbol == pytest.approx(a.mu_symbol, rel=1e-9)


def test_sweep_csv_and_json():
    recs = run_sweep(alpha_grid(0, 2, 1), Params(4, 2, 2, 0.0), tasks=("closed", "symbol"))
    rows = list(csv.DictReader(io.StringIO(sweep_csv(recs))))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [float(r["alpha"]) for r in rows] == [0.0, 1.0, 2.0]
    assert all(r["mu_discrete"] == "" for r in rows)
    rep = make_report("sweep", {"n": 4}, [r.as_dict() for r in recs], [], deterministic=True)
    assert "timestamp" not in rep
    assert report_json(rep) == report_json(json.loads(report_json(rep)))
    live = make_report("sweep", {"n": 4}, [{"x": float("nan"), "y": np.float64(math.inf)}], [])
    assert "timestamp" in live and live["results"][0] == {"x": None, "y": "inf"}
    assert strip_volatile(live)["results"] == live["results"] and "timestamp" not in strip_volatile(live)


def test_run_sweep_validation():
    with pytest.raises(ValueError):
        run_sweep([], Params(4, 2, 2, 0.0))
    with pytest.raises(ValueError):
        run_sweep([0.0], Params(4, 2, 2, 0.0), tasks=("magic",))
