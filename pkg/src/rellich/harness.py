"""Random test functions, inequality suites, parameter sweeps and reports."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np

from .cylinder import (
    BumpSum, CylinderFunction, Grid1D, ModeProfile, first_order_energy, lq_norm,
    second_order_energy, uniform_grid,
)
from .degeneration import (
    DEFAULT_EPS_LADDER, ProfileOmega, navier_degeneration_quotient, rate_over_ladder,
    resonance_family_bound,
)
from .modes import ShootingError, cap_for_eigenvalue, harmonic, mu2_symbol_oracle
from .params import (
    ParameterError, Params, derive_params, hardy_exponent, mu22_closed_form, resonant_mode,
)
from .rayleigh import estimate_constant

log = logging.getLogger(__name__)

SUITES = ("hardy", "rellich", "ckn", "rellich-sobolev", "improved-log")
CSV_COLUMNS = ("n", "p", "q", "alpha", "beta", "gamma", "A", "alpha_star", "mu_closed", "mu_symbol",
               "mu_discrete", "resonant", "rate_slope", "checks_passed", "checks_failed")
VOLATILE_KEYS = ("timestamp",)


# ---------------------------------------------------------------------------
# samples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    """Recipe for random cylinder functions: bump sums per spherical mode.

    ``positive_support`` keeps every bump in s > 0, i.e. inside the unit ball.
    ``cap_nu`` adds one spherical-cap mode of degree nu.
    """

    seed: int = 0
    n: int = 5
    modes: tuple[int, ...] = (0, 1, 2)
    cap_nu: float | None = None
    bumps_per_mode: int = 2
    amplitude_range: tuple[float, float] = (0.5, 1.5)
    width_range: tuple[float, float] = (5.0, 9.0)
    count: int = 100
    positive_support: bool = False

    def __post_init__(self):
        if not self.modes and self.cap_nu is None:
            raise ValueError("a sample spec needs at least one mode")
        lo, hi = self.amplitude_range
        if not 0 < lo <= hi:
            raise ValueError("amplitude magnitudes must be positive")
        if not 0 < self.width_range[0] <= self.width_range[1]:
            raise ValueError("widths must be positive")
        if self.bumps_per_mode < 1 or self.count < 1:
            raise ValueError("need at least one bump and one sample")


def _spherical_modes(spec: SampleSpec):
    out = [harmonic(k, spec.n) for k in spec.modes]
    if spec.cap_nu is not None:
        nu = spec.cap_nu
        out.append(cap_for_eigenvalue(spec.n, nu * (nu + spec.n - 2)))
    return out


def generate_samples(spec: SampleSpec, grid: Grid1D | None = None) -> list[CylinderFunction]:
    """``spec.count`` random C^3 bump sums per mode; identical for identical seeds."""
    grid = grid or uniform_grid()
    rng = np.random.default_rng(spec.seed)
    modes = _spherical_modes(spec)
    lo, hi = float(grid.nodes[0]), float(grid.nodes[-1])
    if spec.positive_support:
        lo = max(lo, 0.0)
    margin = 2 * grid.h
    w_lo, w_hi = spec.width_range
    w_hi = min(w_hi, (hi - lo) / 2 - margin)
    if w_hi < w_lo:
        raise ValueError(f"widths {spec.width_range} do not fit in [{lo}, {hi}]")
    out = []
    for _ in range(spec.count):
        profiles = []
        for mode in modes:
            b = spec.bumps_per_mode
            widths = rng.uniform(w_lo, w_hi, b)
            centers = rng.uniform(lo + widths + margin, hi - widths - margin)
            amps = rng.uniform(*spec.amplitude_range, b) * rng.choice([-1.0, 1.0], b)
            src = BumpSum(tuple(amps), tuple(centers), tuple(widths))
            profiles.append(ModeProfile.from_source(mode, grid, src))
        out.append(CylinderFunction(grid, tuple(profiles)))
    return out


# ---------------------------------------------------------------------------
# inequality suites
# ---------------------------------------------------------------------------

@dataclass
class VerifyReport:
    suite: str
    params: dict
    constant: float | None
    tolerance: float
    samples: int
    violations: list[int] = field(default_factory=list)
    min_slack: float = math.inf
    empirical_min: float = math.inf
    constant_label: str = ""

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _log_remainder(g: CylinderFunction) -> float:
    """int |x|^{alpha-4} |log|x||^{-2} |u|^2 dx on the cylinder: int s^{-2} w^2."""
    s = g.grid.nodes
    inv = np.zeros_like(s)
    pos = s > 0
    inv[pos] = 1.0 / s[pos] ** 2
    total = 0.0
    for m in g.modes:
        if np.any(m.values[~pos]):
            raise ValueError("improved-log samples must be supported in s > 0 (the unit ball)")
        total += g.grid.integrate(inv * m.values ** 2)
    return total


def _check_suite(suite: str, params: Params, samples: Sequence[CylinderFunction], a: float):
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    p, q, n, alpha = params.p, params.q, params.n, params.alpha
    radial_only = p != 2 or (suite in ("ckn", "rellich-sobolev") and q != 2)
    if radial_only:
        for g in samples:
            if len(g.modes) > 1 or g.modes[0].mode.eigenvalue != 0:
                raise ValueError(f"suite {suite} with p={p}, q={q} needs single radial-mode samples")
    if suite == "rellich" and not params.in_rellich_range():
        lo, hi = params.rellich_range
        raise ParameterError(f"rellich suite needs {lo} < alpha < {hi}; got alpha={alpha}")
    if suite in ("hardy", "ckn") and abs(hardy_exponent(a, n, p)) < 1e-12:
        raise ParameterError(f"a = p - n = {a} makes the first-order transform degenerate")
    if suite == "improved-log":
        if p != 2 or q != 2:
            raise ParameterError("improved-log needs p = q = 2")
        if alpha > n:
            raise ParameterError(f"improved-log needs alpha <= n; got alpha={alpha}")
    if suite == "rellich-sobolev":
        params.check_sobolev_range()


def verify_inequalities(samples: Sequence[CylinderFunction], params: Params, suite: str,
                        a: float | None = None, tol: float = 1e-8) -> VerifyReport:
    """Check LHS >= constant * RHS - tol * LHS on every sample.

    ``a`` is the first-order weight of the hardy/ckn suites (default
    alpha - p). Suites without a computable sharp constant (general p, q)
    check positivity and report the running minimum quotient.
    """
    if a is None:
        a = params.alpha - params.p
    _check_suite(suite, params, samples, a)
    p, q, n, alpha = params.p, params.q, params.n, params.alpha
    const, label = None, "empirical"
    if suite == "hardy":
        const, label = abs(hardy_exponent(a, n, p)) ** p, "|H_1,a|^p"
    elif suite == "rellich":
        const, label = derive_params(params).gamma ** p, "gamma^p"
    elif suite == "ckn" and p == 2 and q == 2:
        const, label = hardy_exponent(a, n, 2) ** 2, "H_1,a^2"
    elif suite == "rellich-sobolev" and p == 2 and q == 2:
        const, label = mu2_symbol_oracle(n, alpha).value, "symbol minimum"
    elif suite == "improved-log":
        const = mu22_closed_form(n, alpha)[0]
        label = "S_22 + gamma_bar/2 log remainder"
    gbar = derive_params(params).gamma_bar

    rep = VerifyReport(suite, params.as_dict() | ({"a": a} if suite in ("hardy", "ckn") else {}),
                       const, tol, len(samples), constant_label=label)
    for i, g in enumerate(samples):
        if suite in ("hardy", "ckn"):
            lhs = first_order_energy(g, a, p)
            rhs = lq_norm(g, p if suite == "hardy" else q) ** (p / (p if suite == "hardy" else q))
        else:
            lhs = second_order_energy(g, params)
            qq = p if suite in ("rellich", "improved-log") else q
            rhs = lq_norm(g, qq) ** (p / qq)
        quotient = lhs / rhs
        rep.empirical_min = min(rep.empirical_min, quotient)
        if const is None:
            slack = 1.0 if quotient > 0 else -1.0
        else:
            bound = const * rhs
            if suite == "improved-log":
                bound += 0.5 * gbar * _log_remainder(g)
            slack = (lhs - bound) / lhs
        rep.min_slack = min(rep.min_slack, slack)
        if slack < -tol:
            rep.violations.append(i)
    return rep


def default_verify_spec(suite: str, params: Params, seed: int = 0, count: int = 1000) -> SampleSpec:
    """Sample recipe compatible with ``suite`` at ``params``."""
    radial = params.p != 2 or (suite in ("ckn", "rellich-sobolev") and params.q != 2)
    return SampleSpec(seed=seed, n=params.n, modes=(0,) if radial else (0, 1, 2),
                      count=count, positive_support=suite == "improved-log")


# ---------------------------------------------------------------------------
# sweeps and reports
# ---------------------------------------------------------------------------

@dataclass
class SweepRecord:
    n: int
    p: float
    q: float
    alpha: float
    beta: float
    gamma: float
    A: float
    alpha_star: float
    mu_closed: float | None = None
    mu_symbol: float | None = None
    mu_discrete: float | None = None
    resonant: bool = False
    rate_slope: float | None = None
    checks_passed: int = 0
    checks_failed: int = 0
    failed: list[str] = field(default_factory=list)
    checks: list[dict] = field(default_factory=list)

    def record(self, check_id: str, passed: bool, value=None, target=None, tol=None):
        self.checks.append({"id": check_id, "passed": bool(passed), "value": value,
                            "target": target, "tol": tol})
        if passed:
            self.checks_passed += 1
        else:
            self.checks_failed += 1
            self.failed.append(check_id)

    def row(self) -> dict:
        return {k: getattr(self, k) for k in CSV_COLUMNS}

    def as_dict(self) -> dict:
        return asdict(self)


SWEEP_TASKS = ("closed", "symbol", "discrete", "rate")


def alpha_grid(lo: float, hi: float, step: float) -> list[float]:
    """Points lo, lo + step, ... <= hi, rounded to suppress accumulation error."""
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError(f"empty alpha grid [{lo}, {hi}]")
    return [round(lo + i * step, 12) for i in range(count)]


def _expected_slope(params: Params) -> float:
    return params.p - 1 + params.p / params.q


def sweep_row(alpha: float, template: Params, tasks: Iterable[str] = SWEEP_TASKS,
              grid: Grid1D | None = None, eps_ladder: Sequence[float] = DEFAULT_EPS_LADDER,
              rel_tol: float = 2e-3, zero_tol: float = 1e-2, slope_tol: float = 0.05) -> SweepRecord:
    params = template.with_alpha(alpha)
    d = derive_params(params)
    tasks = set(tasks)
    rec = SweepRecord(params.n, params.p, params.q, alpha, d.beta, d.gamma, d.A, d.alpha_star)
    k_res = resonant_mode(params)
    rec.resonant = k_res is not None
    p2 = params.p == 2
    if p2 and "closed" in tasks:
        rec.mu_closed = mu22_closed_form(params.n, alpha)[0]
        rec.record("closed_zero_iff_resonant", (rec.mu_closed < 1e-20) == rec.resonant,
                   rec.mu_closed, 0.0, 1e-20)
    if p2 and "symbol" in tasks:
        sym = mu2_symbol_oracle(params.n, alpha)
        rec.mu_symbol = sym.value
        if sym.matches_section7:
            rec.record("symbol_vs_closed", True, sym.value, sym.closed_form, 1e-10)
        else:
            log.warning("alpha=%g: symbol minimum differs from the closed form", alpha)
    if p2 and "discrete" in tasks:
        est = estimate_constant(Params(params.n, 2, 2, alpha), "mu", grid=grid)
        rec.mu_discrete = est.line_limit
        target = rec.mu_symbol if rec.mu_symbol is not None else est.symbol
        if rec.resonant:
            rec.record("discrete_resonance", rec.mu_discrete < zero_tol, rec.mu_discrete, 0.0, zero_tol)
        else:
            gap = abs(rec.mu_discrete - target) / target
            rec.record("discrete_vs_symbol", gap <= rel_tol, rec.mu_discrete, target, rel_tol)
            rec.record("discrete_nonresonant", rec.mu_discrete >= zero_tol, rec.mu_discrete, zero_tol, zero_tol)
    if "rate" in tasks and alpha >= params.n * params.p - params.n:
        omega = ProfileOmega.bump()
        try:
            if alpha > params.n * params.p - params.n and -d.gamma > 0:
                if k_res is not None:
                    mode = harmonic(k_res, params.n)
                else:
                    mode = cap_for_eigenvalue(params.n, -d.gamma)
                fit = rate_over_ladder(lambda e: navier_degeneration_quotient(
                    omega, e, params, mode, constants=False), eps_ladder, corrected=True)
                target = _expected_slope(params)
            else:
                fit = rate_over_ladder(lambda e: resonance_family_bound(omega, e, params, k_res), eps_ladder,
                                       corrected=True)
                target = params.p
            rec.rate_slope = fit.slope
            rec.record("rate_slope", abs(fit.slope - target) <= slope_tol, fit.slope, target, slope_tol)
        except ShootingError as exc:
            log.warning("alpha=%g: cap solver failed: %s", alpha, exc)
            rec.record("rate_slope", False, None, _expected_slope(params), slope_tol)
    return rec


def run_sweep(alphas: Sequence[float], template: Params, tasks: Iterable[str] = SWEEP_TASKS,
              **kw) -> list[SweepRecord]:
    """One :class:`SweepRecord` per alpha, computed in order."""
    if len(alphas) == 0:
        raise ValueError("empty alpha grid")
    tasks = tuple(tasks)
    bad = set(tasks) - set(SWEEP_TASKS)
    if bad:
        raise ValueError(f"unknown sweep tasks {sorted(bad)}")
    return [sweep_row(a, template, tasks, **kw) for a in alphas]


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def versions() -> dict:
    import scipy
    from . import __version__
    return {"rellich": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def make_report(command: str, params: dict, results: list, checks: list, deterministic: bool = False) -> dict:
    rep = {"command": command, "params": params, "results": results, "checks": checks,
           "versions": versions()}
    if not deterministic:
        rep["timestamp"] = datetime.now(timezone.utc).isoformat()
    return _jsonable(rep)


def strip_volatile(report: dict) -> dict:
    return {k: v for k, v in report.items() if k not in VOLATILE_KEYS}


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def sweep_csv(records: Sequence[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: ("" if v is None else v) for k, v in r.row().items()})
    return buf.getvalue()
