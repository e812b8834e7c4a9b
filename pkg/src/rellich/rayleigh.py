"""Discrete minimization of per-mode Rayleigh quotients on the cylinder axis.

For one spherical mode with eigenvalue lambda the second-order quotient is

    int |w'' - 2A w' - (gamma + lambda) w|^p ds / (int |w|^q ds)^{p/q}.

Profiles are finitely supported grid functions (zero at and beyond the grid
ends), and the difference operator is applied on every node the stencil
reaches. That is the discrete analogue of C^2_c test functions; it makes the
p = 2 problem a symmetric banded generalized eigenproblem whose infimum over
growing spans converges to the whole-line value. ``boundary="navier"`` keeps
only the interior rows, which models w = 0 at the ends with w' free.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import linalg as spla

from .cylinder import Grid1D, uniform_grid
from .modes import SphericalMode, harmonic, mu2_symbol_oracle
from .params import Params, derive_params, mu22_closed_form

log = logging.getLogger(__name__)

ARMIJO_C1 = 1e-4
ARMIJO_SHRINK = 0.5
DEFAULT_SPANS = (20.0, 40.0, 80.0)


class ConvergenceError(RuntimeError):
    pass


class OptimizationError(RuntimeError):
    pass


@dataclass
class QuotientReport:
    numerator: float
    denominator: float
    quotient: float
    mode: SphericalMode
    grid_spec: tuple[float, int]
    method: str
    residual: float = 0.0
    history: list[float] = field(default_factory=list, repr=False)
    profile: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "numerator": self.numerator,
            "denominator": self.denominator,
            "quotient": self.quotient,
            "mode": self.mode.as_dict(),
            "grid_spec": {"S": self.grid_spec[0], "N": self.grid_spec[1]},
            "method": self.method,
            "residual": self.residual,
        }


@dataclass
class LineLimit:
    """Truncated-span quotients and their extrapolation to the whole line.

    The fit is theta(S) = theta_inf + b S^-2 + c S^-3 through the spans given,
    at fixed node spacing.
    """

    spans: tuple[float, ...]
    values: tuple[float, ...]
    estimate: float

    def as_dict(self) -> dict:
        return {"spans": list(self.spans), "values": list(self.values), "estimate": self.estimate}


@dataclass
class ConstantEstimate:
    value: float
    kind: str
    exactness: str
    per_mode: list[QuotientReport]
    line_limit: float | None = None
    per_mode_limits: list[LineLimit] = field(default_factory=list)
    symbol: float | None = None
    closed_form: float | None = None
    matches_section7: bool | None = None

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "kind": self.kind,
            "exactness": self.exactness,
            "line_limit": self.line_limit,
            "symbol": self.symbol,
            "closed_form": self.closed_form,
            "matches_section7": self.matches_section7,
            "per_mode": [r.as_dict() for r in self.per_mode],
            "per_mode_limits": [ll.as_dict() for ll in self.per_mode_limits],
        }


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def _spacing(grid: Grid1D) -> float:
    if not grid.is_uniform:
        raise ValueError("the axis optimizer needs a uniform grid")
    return grid.span / (grid.size - 1)


def axis_operator(size: int, h: float, A: float, c: float, boundary: str = "compact") -> sp.csc_matrix:
    """Banded matrix of w -> w'' - 2A w' - c w acting on the interior nodes.

    Columns are the ``size - 2`` interior unknowns. With ``"compact"`` the rows
    cover all ``size`` nodes (the stencil's full reach); with ``"navier"`` only
    the interior rows are kept.
    """
    m = size - 2
    diag = np.full(m, -2 / h ** 2 - c)
    right = np.full(m, 1 / h ** 2 - A / h)   # coefficient of w_{i+1} in row i
    left = np.full(m, 1 / h ** 2 + A / h)    # coefficient of w_{i-1} in row i
    if boundary == "compact":
        L = sp.diags([left, diag, right], [-2, -1, 0], shape=(size, m))
    elif boundary == "navier":
        L = sp.diags([left[1:], diag, right[:-1]], [-1, 0, 1], shape=(m, m))
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    return sp.csc_matrix(L)


def _mode_coefficients(mode: SphericalMode, params: Params) -> tuple[float, float]:
    d = derive_params(params)
    return d.A, d.gamma + mode.eigenvalue


# ---------------------------------------------------------------------------
# p = 2
# ---------------------------------------------------------------------------

def minimize_mode_p2(mode: SphericalMode, params: Params, grid: Grid1D,
                     boundary: str = "compact", max_iter: int = 10_000) -> QuotientReport:
    """Smallest eigenvalue of (L^T M L) w = theta M w for one mode, p = q = 2.

    Shift-invert at zero around a sparse LU of L^T M L; ARPACK's Lanczos
    process accelerates the plain inverse iteration.
    """
    if params.p != 2 or params.q != 2:
        raise ValueError("minimize_mode_p2 needs p = q = 2")
    h = _spacing(grid)
    S = grid.span / 2
    if S < 10:
        raise ValueError(f"grid half-span {S} too short; need S >= 10")
    A, c = _mode_coefficients(mode, params)
    L = axis_operator(grid.size, h, A, c, boundary)
    K = sp.csc_matrix(L.T @ L) * h
    m = K.shape[0]
    lu = spla.splu(K)
    op = spla.LinearOperator(K.shape, matvec=lu.solve, dtype=float)
    x = np.linspace(-1, 1, m + 2)[1:-1]
    v0 = np.cos(0.5 * np.pi * x) ** 2
    try:
        vals, vecs = spla.eigsh(K, k=1, sigma=0, which="LM", OPinv=op, v0=v0, maxiter=max_iter)
    except spla.ArpackNoConvergence as exc:
        res = math.nan
        if exc.eigenvectors.size:
            w = exc.eigenvectors[:, 0]
            res = float(np.linalg.norm(K @ w - (w @ K @ w) * w))
        raise ConvergenceError(f"inverse iteration did not converge after {max_iter} steps; "
                               f"residual {res:.3e}") from exc
    w = vecs[:, 0]
    Lw = L @ w
    num = h * float(Lw @ Lw)
    den = h * float(w @ w)
    theta = num / den
    resid = float(np.linalg.norm(K @ w - theta * h * w) / max(np.linalg.norm(K @ w), 1e-300))
    profile = np.concatenate([[0.0], w, [0.0]])
    return QuotientReport(num, den, theta, mode, (S, grid.size), "eigen", resid, profile=profile)


def line_limit_p2(mode: SphericalMode, params: Params, h: float,
                  spans: tuple[float, ...] = DEFAULT_SPANS, boundary: str = "compact") -> LineLimit:
    """Eigen-solves at several half-spans with spacing ``h``, extrapolated in S."""
    vals = []
    for S in spans:
        N = int(round(2 * S / h)) + 1
        vals.append(minimize_mode_p2(mode, params, uniform_grid(S, N), boundary).quotient)
    S = np.asarray(spans, dtype=float)
    if len(spans) >= 3:
        basis = np.column_stack([np.ones_like(S), S ** -2, S ** -3])
    else:
        basis = np.column_stack([np.ones_like(S), S ** -2])
    coef, *_ = np.linalg.lstsq(basis, np.asarray(vals), rcond=None)
    return LineLimit(tuple(float(s) for s in spans), tuple(vals), float(coef[0]))


# ---------------------------------------------------------------------------
# general p, q
# ---------------------------------------------------------------------------

def _signed_pow(x: np.ndarray, e: float) -> np.ndarray:
    """sign(x) |x|^e, the derivative kernel of |x|^{e+1}/(e+1)."""
    return np.sign(x) * np.abs(x) ** e


def quotient_and_gradient(w: np.ndarray, L: sp.spmatrix, h: float, p: float, q: float):
    """Discrete quotient h sum |Lw|^p / (h sum |w|^q)^{p/q} and its gradient in w."""
    Lw = L @ w
    num = h * float(np.sum(np.abs(Lw) ** p))
    den = h * float(np.sum(np.abs(w) ** q))
    if den <= 0:
        raise ValueError("zero profile: the quotient is undefined")
    dnum = L.T @ (h * p * _signed_pow(Lw, p - 1))
    dden = h * q * _signed_pow(w, q - 1)
    scale = den ** (-p / q)
    F = num * scale
    grad = scale * dnum - (p / q) * num * den ** (-p / q - 1) * dden
    return F, grad, num, den


def _initial_profiles(m: int, rng: np.random.Generator, restarts: int) -> list[np.ndarray]:
    x = np.linspace(-1, 1, m + 2)[1:-1]
    taper = (1 - x * x) ** 3
    out = [np.exp(-x * x / (2 * 0.25 ** 2)) * taper]
    for _ in range(restarts - 1):
        c = rng.uniform(-0.4, 0.4)
        s = rng.uniform(0.1, 0.5)
        out.append(np.exp(-(x - c) ** 2 / (2 * s * s)) * taper)
    return out


def _normalize(w: np.ndarray, h: float, q: float) -> np.ndarray:
    return w / (h * np.sum(np.abs(w) ** q)) ** (1 / q)


def minimize_mode_general(mode: SphericalMode, params: Params, grid: Grid1D, seed: int = 0,
                          restarts: int = 5, max_iter: int = 400, rtol: float = 1e-10,
                          initial: np.ndarray | None = None,
                          boundary: str = "compact") -> QuotientReport:
    """Upper bound for the separable (p, q) quotient by projected gradient descent.

    Steps follow the gradient preconditioned by the p = 2 operator of the same
    mode and are projected back onto the unit L^q sphere (the quotient is
    0-homogeneous). Armijo backtracking (c1 = 1e-4, factor 1/2, first trial
    step 1) makes every accepted step non-increasing. The best of ``restarts``
    seeded starts is returned; ``initial`` (interior values) replaces the first
    start.
    """
    p, q = params.p, params.q
    h = _spacing(grid)
    A, c = _mode_coefficients(mode, params)
    L = axis_operator(grid.size, h, A, c, boundary)
    m = L.shape[1]
    K = sp.csc_matrix(L.T @ L) * h
    shift = 1e-3 * max(abs(K.diagonal()).min(), 1e-12)
    pre = spla.splu(sp.csc_matrix(K + shift * h * sp.identity(m)))

    rng = np.random.default_rng(seed)
    starts = _initial_profiles(m, rng, restarts)
    if initial is not None:
        initial = np.asarray(initial, dtype=float)
        if initial.shape != (m,):
            raise ValueError(f"initial profile must have the {m} interior values")
        if not np.any(initial):
            raise ValueError("zero initial profile: the quotient is undefined")
        starts[0] = initial

    best = None
    for w in starts:
        w = _normalize(w, h, q)
        F, g, num, den = quotient_and_gradient(w, L, h, p, q)
        history = [F]
        for _ in range(max_iter):
            d = -pre.solve(g)
            slope = float(g @ d)
            if slope >= 0:
                break
            tau = 1.0
            while True:
                trial = _normalize(w + tau * d, h, q)
                Ft, gt, num_t, den_t = quotient_and_gradient(trial, L, h, p, q)
                if not math.isfinite(Ft):
                    raise OptimizationError(
                        f"non-finite objective (p={p}, q={q}, mode {mode.label}, step {tau:.3e}, "
                        f"max|w|={np.max(np.abs(trial)):.3e})")
                if Ft <= F + ARMIJO_C1 * tau * slope or tau < 1e-14:
                    break
                tau *= ARMIJO_SHRINK
            if Ft > F:
                break
            done = F - Ft <= rtol * abs(F)
            w, F, g, num, den = trial, Ft, gt, num_t, den_t
            history.append(F)
            if done:
                break
        if any(b > a for a, b in zip(history, history[1:])):
            raise OptimizationError("line search accepted an increasing step")
        if best is None or F < best.quotient:
            best = QuotientReport(num, den ** (p / q), F, mode, (grid.span / 2, grid.size), "gradient",
                                  float(np.linalg.norm(g)), history,
                                  np.concatenate([[0.0], w, [0.0]]))
    log.debug("mode %s: best quotient %.6g", mode.label, best.quotient)
    return best


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def default_kmax(params: Params) -> int:
    """Harmonic degrees past which no mode can lower the p = 2 constant.

    Once lambda_k > 2|gamma| every mode satisfies gamma + lambda_k > |gamma|,
    so its value exceeds gamma^2, the k = 0 value.
    """
    g = derive_params(params).gamma
    n = params.n
    k = 0
    while k * (n - 2 + k) <= 2 * abs(g):
        k += 1
    return k


def estimate_constant(params: Params, kind: str = "mu", k_max: int | None = None,
                      grid: Grid1D | None = None, spans: tuple[float, ...] | None = DEFAULT_SPANS,
                      seed: int = 0, **gradient_options) -> ConstantEstimate:
    """Estimate mu_{p,alpha} (``kind="mu"``) or S_{p,q}(alpha) (``kind="S"``).

    The minimum runs over harmonic modes 0..k_max. For p = q = 2 every mode is
    an eigen-solve; ``spans`` adds the whole-line extrapolation and the result
    is cross-checked with the symbol oracle and the closed form. Otherwise the
    per-mode values come from :func:`minimize_mode_general` and are upper
    bounds.
    """
    if kind not in ("mu", "S"):
        raise ValueError(f"kind must be 'mu' or 'S', got {kind!r}")
    if kind == "mu":
        params = Params(params.n, params.p, params.p, params.alpha)
    else:
        params.check_sobolev_range()
    grid = grid or uniform_grid()
    if k_max is None:
        k_max = default_kmax(params)
    exact = params.p == 2 and params.q == 2
    reports, limits = [], []
    for k in range(k_max + 1):
        mode = harmonic(k, params.n)
        if exact:
            reports.append(minimize_mode_p2(mode, params, grid))
            if spans:
                limits.append(line_limit_p2(mode, params, _spacing(grid), spans))
        else:
            reports.append(minimize_mode_general(mode, params, grid, seed=seed, **gradient_options))
    value = min(r.quotient for r in reports)
    est = ConstantEstimate(value, kind, "eigen-converged" if exact else "upper-bound", reports,
                           per_mode_limits=limits)
    if exact:
        if limits:
            est.line_limit = min(ll.estimate for ll in limits)
        sym = mu2_symbol_oracle(params.n, params.alpha)
        est.symbol = sym.value
        est.closed_form = mu22_closed_form(params.n, params.alpha)[0]
        est.matches_section7 = sym.matches_section7
    return est
