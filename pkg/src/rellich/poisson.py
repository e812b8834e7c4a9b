"""Radial Poisson problems on annuli and the comparison checks built on them.

-Laplacian v = f on {1/R < r < R}, v = 0 on both spheres, is solved for radial
data by two nested quadratures:

    v'(r) = r^{1-n} (C - F(r)),  F(r) = int_{1/R}^r f(s) s^{n-1} ds,
    v(r)  = int_{1/R}^r v',      C chosen so that v(R) = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import make_interp_spline

from .cylinder import Grid1D, interval_grid
from .modes import sphere_area
from .params import Params, ParameterError, gamma_of

MIN_NODES = 64


@dataclass(frozen=True, eq=False)
class AnnulusProblem:
    n: int
    R: float
    grid: Grid1D
    f: np.ndarray = field(repr=False)
    spacing: str = "log"

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError(f"annulus needs R > 1, got {self.R}")
        f = np.asarray(self.f, dtype=float)
        object.__setattr__(self, "f", f)
        if f.shape != self.grid.nodes.shape:
            raise ValueError("source length does not match the grid")
        if np.any(f < 0):
            raise ValueError(f"source must be nonnegative; min is {f.min():.3e}")
        r = self.grid.nodes
        if abs(r[0] - 1 / self.R) > 1e-12 or abs(r[-1] - self.R) > 1e-12 * self.R:
            raise ValueError("grid must span [1/R, R]")
        if self.spacing not in ("log", "uniform"):
            raise ValueError(f"spacing must be 'log' or 'uniform', got {self.spacing!r}")
        x = np.log(r) if self.spacing == "log" else r
        dx = np.diff(x)
        if self.grid.size < MIN_NODES or np.ptp(dx) > 1e-9 * dx.mean():
            raise ValueError(f"need at least {MIN_NODES} nodes equispaced in {self.spacing} r")

    @classmethod
    def build(cls, n: int, R: float, f, N: int = 1025, spacing: str = "log") -> "AnnulusProblem":
        """Sample ``f`` (callable or constant) on N nodes of [1/R, R].

        ``spacing="log"`` places nodes uniformly in log r, which keeps the
        solution's derivatives bounded near the inner sphere.
        """
        grid = annulus_grid(R, N, spacing)
        vals = f(grid.nodes) if callable(f) else np.full(N, float(f))
        return cls(n, R, grid, vals, spacing)


def annulus_grid(R: float, N: int = 1025, spacing: str = "log") -> Grid1D:
    if not R > 1:
        raise ValueError(f"annulus needs R > 1, got {R}")
    if spacing == "uniform":
        return interval_grid(1 / R, R, N, kind="radial")
    if spacing != "log":
        raise ValueError(f"spacing must be 'log' or 'uniform', got {spacing!r}")
    r = np.exp(np.linspace(-np.log(R), np.log(R), N))
    r[0], r[-1] = 1 / R, R
    w = np.zeros(N)
    w[1:] += 0.5 * np.diff(r)
    w[:-1] += 0.5 * np.diff(r)
    return Grid1D(r, w, "radial")


@dataclass(frozen=True, eq=False)
class RadialSolution:
    r: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    dv: np.ndarray = field(repr=False)
    residual: float
    boundary_defect: float


def _fd_laplacian(v: np.ndarray, r: np.ndarray, n: int, spacing: str = "uniform") -> np.ndarray:
    """Fourth-order central differences for the radial Laplacian on nodes 2..N-3.

    With ``spacing="log"`` the differences are taken in t = log r, where the
    Laplacian reads r^{-2}(v_tt + (n-2) v_t).
    """
    x = np.log(r) if spacing == "log" else r
    h = (x[-1] - x[0]) / (x.size - 1)
    d1 = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    d2 = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * h * h)
    if spacing == "log":
        return (d2 + (n - 2) * d1) / r[2:-2] ** 2
    return d2 + (n - 1) * d1 / r[2:-2]


def _cumulative(values: np.ndarray, r: np.ndarray) -> np.ndarray:
    """int_{r_0}^{r} through the quintic interpolant (errors stay smooth in r)."""
    return make_interp_spline(r, values, k=5).antiderivative()(r)


def solve_radial_annulus(prob: AnnulusProblem) -> RadialSolution:
    n, r, f = prob.n, prob.grid.nodes, prob.f
    F = _cumulative(f * r ** (n - 1), r)
    k = r ** (1 - n)
    kF = _cumulative(k * F, r)
    K = _cumulative(k, r)
    C = kF[-1] / K[-1]
    dv = k * (C - F)
    v = C * K - kF
    defect = max(abs(v[0]), abs(v[-1]))
    v[-1] = 0.0 if defect < 1e-10 else v[-1]
    resid = float(np.max(np.abs(_fd_laplacian(v, r, n, prob.spacing) + f[2:-2])))
    return RadialSolution(r, v, dv, resid, float(defect))


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

def _radial_integral(values: np.ndarray, r: np.ndarray, n: int) -> float:
    return sphere_area(n - 1) * float(simpson(values * r ** (n - 1), x=r))


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    min_gap: float
    numerator: float
    denominator_u: float
    denominator_v: float
    quotient_u: float
    quotient_v: float
    dominates: bool
    monotone: bool
    tol: float

    @property
    def passed(self) -> bool:
        return self.dominates and self.monotone

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("min_gap", "numerator", "denominator_u", "denominator_v", "quotient_u",
                 "quotient_v", "dominates", "monotone", "tol", "passed")}


def _profile_and_laplacian(u, r: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    if callable(u):
        val, d1, d2 = (np.asarray(x, dtype=float) for x in u(r))
        return val, d2 + (n - 1) * d1 / r
    val = np.asarray(u, dtype=float)
    if val.shape != r.shape:
        raise ValueError("profile length does not match the grid")
    d1 = np.gradient(val, r, edge_order=2)
    d2 = np.gradient(d1, r, edge_order=2)
    return val, d2 + (n - 1) * d1 / r


def comparison_check(u, params: Params, R: float, N: int = 1025, tol: float = 1e-8,
                     spacing: str = "log") -> ComparisonReport:
    """Solve -Laplacian v = |Laplacian u| and check v >= |u| and R(v) <= R(u).

    ``u`` is either a callable returning (u, u', u'') at r or samples on the
    annulus grid of [1/R, R]. R(w) = int |x|^alpha |Laplacian w|^p /
    (int |x|^{-beta} |w|^q)^{p/q}; the numerators coincide by construction.
    """
    n, p, q = params.n, params.p, params.q
    grid = annulus_grid(R, N, spacing)
    r = grid.nodes
    uu, lap = _profile_and_laplacian(u, r, n)
    scale = max(float(np.max(np.abs(uu))), 1e-300)
    if abs(uu[0]) > 1e-10 * scale or abs(uu[-1]) > 1e-10 * scale:
        raise ValueError(f"u must vanish on both spheres; got {uu[0]:.3e}, {uu[-1]:.3e}")
    sol = solve_radial_annulus(AnnulusProblem(n, R, grid, np.abs(lap), spacing))
    v = sol.v
    beta = n - q * (n - 2 * p + params.alpha) / p
    num = _radial_integral(r ** params.alpha * np.abs(lap) ** p, r, n)
    den_u = _radial_integral(r ** (-beta) * np.abs(uu) ** q, r, n)
    den_v = _radial_integral(r ** (-beta) * np.abs(v) ** q, r, n)
    Qu = num / den_u ** (p / q)
    Qv = num / den_v ** (p / q)
    gap = v - np.abs(uu)
    return ComparisonReport(uu, v, float(gap.min()), num, den_u, den_v, Qu, Qv,
                            bool(gap.min() >= -tol * scale), bool(Qv <= Qu * (1 + tol)), tol)


def weighted_stability_bound(prob: AnnulusProblem, params: Params, tol: float = 1e-9) -> tuple[float, float]:
    """Both sides of int |x|^{alpha-2p}|v|^p <= gamma^{-p} int |x|^alpha |f|^p.

    Raises AssertionError when the inequality fails beyond ``tol``.
    """
    n, p, alpha = params.n, params.p, params.alpha
    if prob.n != n:
        raise ValueError("problem and parameters disagree on n")
    if not params.in_rellich_range():
        lo, hi = params.rellich_range
        raise ParameterError(f"alpha={alpha} outside the Rellich range ({lo}, {hi})")
    r = prob.grid.nodes
    v = solve_radial_annulus(prob).v
    g = gamma_of(n, p, alpha)
    lhs = _radial_integral(r ** (alpha - 2 * p) * np.abs(v) ** p, r, n)
    rhs = g ** (-p) * _radial_integral(r ** alpha * np.abs(prob.f) ** p, r, n)
    if lhs > rhs + tol:
        raise AssertionError(f"stability bound violated: {lhs:.6e} > {rhs:.6e}")
    return lhs, rhs


def sine_profile(coeffs, R: float) -> Callable:
    """u(r) = sum_j c_j sin(j pi (r - 1/R)/(R - 1/R)), zero on both spheres."""
    a, L = 1 / R, R - 1 / R
    coeffs = np.asarray(coeffs, dtype=float)
    js = np.arange(1, coeffs.size + 1)

    def u(r):
        r = np.asarray(r, dtype=float)
        k = js[:, None] * np.pi / L
        arg = k * (r[None, :] - a)
        return (coeffs @ np.sin(arg), coeffs @ (k * np.cos(arg)), coeffs @ (-k * k * np.sin(arg)))
    return u
