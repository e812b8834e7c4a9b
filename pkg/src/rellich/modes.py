"""Spherical modes: integer harmonics, spherical caps and the p=2 symbol oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .params import drift_of, gamma_of, mu22_closed_form

CAP_STEP = 1e-4
CAP_SERIES_START = 1e-2
CAP_ZERO_TOL = 1e-13
CAP_TAIL_STEP = 1e-3
CAP_TAIL_MAX = 80.0
CAP_TAIL_SAMPLE_MIN = 0.0
CAP_TAIL_SWITCH = 0.05


class ShootingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SphericalMode:
    """One spherical factor of a separable function on the cylinder.

    ``kind`` is ``"harmonic"`` (integer degree ``k``, full sphere, ``theta0 = pi``)
    or ``"cap"`` (fractional degree ``nu``, first Dirichlet eigenfunction of the
    geodesic ball of half-angle ``theta0``).
    """

    kind: str
    n: int
    eigenvalue: float
    k: int | None = None
    nu: float | None = None
    theta0: float = math.pi
    # sampled axisymmetric profile phi(x), x = cos(theta), on [cos(theta0), 1]
    x: np.ndarray | None = field(default=None, repr=False, compare=False)
    phi: np.ndarray | None = field(default=None, repr=False, compare=False)
    dphi: np.ndarray | None = field(default=None, repr=False, compare=False)
    # the same samples' angles, kept separately: x loses them near theta = pi
    theta: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def label(self) -> str:
        if self.kind == "harmonic":
            return f"k={self.k}"
        return f"nu={self.nu:.6g}"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "k": self.k, "nu": self.nu,
                "eigenvalue": self.eigenvalue, "theta0": self.theta0}


def harmonic(k: int, n: int) -> SphericalMode:
    if k < 0 or int(k) != k:
        raise ValueError(f"harmonic degree must be a non-negative integer, got {k}")
    return SphericalMode("harmonic", n, float(k * (n - 2 + k)), k=int(k))


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere S^dim."""
    return 2 * math.pi ** ((dim + 1) / 2) / math.gamma((dim + 1) / 2)


# ---------------------------------------------------------------------------
# p = 2 Fourier symbol
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolCurve:
    """f(t) = (t + c)^2 + 4 A^2 t, the squared modulus of the symbol at t = xi^2."""

    A: float
    c: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (t + self.c) ** 2 + 4 * self.A ** 2 * t


def symbol_infimum(A: float, c: float) -> tuple[float, float]:
    """Infimum over t >= 0 of (t + c)^2 + 4 A^2 t and the minimizing t.

    The curve is a convex parabola; its stationary point is t* = -c - 2A^2.
    """
    f = SymbolCurve(A, c)
    t_star = -c - 2 * A ** 2
    if t_star <= 0:
        return float(f(0.0)), 0.0
    return float(f(t_star)), float(t_star)


@dataclass(frozen=True)
class SymbolMinimum:
    value: float
    k: int
    t: float
    closed_form: float
    closed_form_k: int
    matches_section7: bool
    k_max: int


def symbol_kmax_required(n: int, alpha: float) -> int:
    g, A = gamma_of(n, 2, alpha), drift_of(n, 2, alpha)
    k = 0
    while k * (n - 2 + k) <= abs(g) + 4 * A * A:
        k += 1
    return k + 2


def default_symbol_kmax(n: int, alpha: float) -> int:
    g, A = gamma_of(n, 2, alpha), drift_of(n, 2, alpha)
    k = 0
    while k * (n - 2 + k) <= abs(g) + 4 * A * A + 10:
        k += 1
    return max(k, symbol_kmax_required(n, alpha))


def mu2_symbol_oracle(n: int, alpha: float, k_max: int | None = None,
                      tol: float = 1e-10) -> SymbolMinimum:
    """Exact p = 2 Rellich constant from the per-mode Fourier symbol.

    Minimizes :func:`symbol_infimum` over harmonic degrees ``k <= k_max`` and
    compares with :func:`~rellich.params.mu22_closed_form`.
    """
    if k_max is None:
        k_max = default_symbol_kmax(n, alpha)
    need = symbol_kmax_required(n, alpha)
    if k_max < need:
        raise ValueError(f"k_max={k_max} too small for n={n}, alpha={alpha}; need >= {need}")
    g, A = gamma_of(n, 2, alpha), drift_of(n, 2, alpha)
    best = (math.inf, 0, 0.0)
    for k in range(k_max + 1):
        val, t = symbol_infimum(A, g + k * (n - 2 + k))
        if val < best[0]:
            best = (val, k, t)
    closed, ck = mu22_closed_form(n, alpha)
    matches = abs(best[0] - closed) <= tol * max(1.0, closed)
    return SymbolMinimum(best[0], best[1], best[2], closed, ck, matches, k_max)


# ---------------------------------------------------------------------------
# spherical caps
# ---------------------------------------------------------------------------

def cap_degree(n: int, mu: float) -> float:
    """Positive root nu of nu (nu + n - 2) = mu."""
    return (-(n - 2) + math.sqrt((n - 2) ** 2 + 4 * mu)) / 2


def _series_start(n: int, mu: float, y: float) -> tuple[float, float]:
    """phi and d phi/dx at x = 1 - y from the Frobenius series about x = 1.

    With y = 1 - x the regular solution is sum a_j y^j,
    a_{j+1} = (j (j + n - 2) - mu) a_j / ((j + 1)(2 j + n - 1)).
    """
    a, val, dval = 1.0, 1.0, 0.0
    for j in range(200):
        a = a * (j * (j + n - 2) - mu) / ((j + 1) * (2 * j + n - 1))
        term = a * y ** (j + 1)
        val += term
        dval += (j + 1) * a * y ** j
        if abs(term) < 1e-18 * max(1.0, abs(val)) and j > 2:
            break
    return val, -dval  # d/dx = -d/dy


def _rk4_step(x, phi, dphi, h, n, mu):
    def rhs(x_, f, g):
        return g, ((n - 1) * x_ * g - mu * f) / (1 - x_ * x_)

    k1 = rhs(x, phi, dphi)
    k2 = rhs(x + h / 2, phi + h / 2 * k1[0], dphi + h / 2 * k1[1])
    k3 = rhs(x + h / 2, phi + h / 2 * k2[0], dphi + h / 2 * k2[1])
    k4 = rhs(x + h, phi + h * k3[0], dphi + h * k3[1])
    return (phi + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            dphi + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]))


def _tail_rhs(tau, f, g, n, mu):
    """phi_tau' for the Gegenbauer equation in tau = -log(1 + x)."""
    y = math.exp(-tau)
    return g, -((2 - y) * g + (n - 1) * (y - 1) * g + mu * y * f) / (2 - y)


def _tail_rk4(tau, f, g, h, n, mu):
    k1 = _tail_rhs(tau, f, g, n, mu)
    k2 = _tail_rhs(tau + h / 2, f + h / 2 * k1[0], g + h / 2 * k1[1], n, mu)
    k3 = _tail_rhs(tau + h / 2, f + h / 2 * k2[0], g + h / 2 * k2[1], n, mu)
    k4 = _tail_rhs(tau + h, f + h * k3[0], g + h * k3[1], n, mu)
    return (f + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            g + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]))


def _south_angle(y: float) -> float:
    """theta with 1 + cos(theta) = y, accurate for tiny y."""
    return math.pi - 2 * math.asin(math.sqrt(y / 2))


def _shoot_south_tail(n, mu, x, phi, dphi, xs, fs, gs, ths, h=CAP_TAIL_STEP, tau_max=CAP_TAIL_MAX):
    """Continue the shot in tau = -log(1 + x) when the zero hugs the south pole.

    Appends samples (while x stays representable) and returns the zero in x
    and the cap angle, or (None, None) when no zero occurs before tau_max.
    """
    tau = -math.log1p(x)
    f, g = phi, -(1 + x) * dphi  # d phi/d tau = -(1 + x) d phi/dx
    while tau < tau_max:
        nf, ng = _tail_rk4(tau, f, g, h, n, mu)
        if nf == 0.0 or np.sign(nf) != np.sign(f):
            lo, hi = tau, tau + h
            while hi - lo > CAP_ZERO_TOL:
                mid = 0.5 * (lo + hi)
                fm, _ = _tail_rk4(tau, f, g, mid - tau, n, mu)
                if np.sign(fm) == np.sign(f):
                    lo = mid
                else:
                    hi = mid
            tz = 0.5 * (lo + hi)
            _, gz = _tail_rk4(tau, f, g, tz - tau, n, mu)
            y = math.exp(-tz)
            xz = -1.0 + y
            th = _south_angle(y)
            while ths and ths[-1] >= th:
                xs.pop(), fs.pop(), gs.pop(), ths.pop()
            xs.append(xz)
            fs.append(0.0)
            gs.append(-gz / y)
            ths.append(th)
            return xz, th
        tau, f, g = tau + h, nf, ng
        y = math.exp(-tau)
        if y > CAP_TAIL_SAMPLE_MIN:
            xs.append(-1.0 + y)
            fs.append(f)
            gs.append(-g / y)
            ths.append(_south_angle(y))
    return None, None


def cap_for_eigenvalue(n: int, mu_target: float, step: float = CAP_STEP) -> SphericalMode:
    """Geodesic cap of S^{n-1} whose first Dirichlet eigenvalue is ``mu_target``.

    The axisymmetric eigenfunction solves the Gegenbauer equation
    (1 - x^2) phi'' - (n - 1) x phi' + mu phi = 0 in x = cos(theta), regular
    at x = 1. It is started from its Frobenius series, shot toward x = -1 with
    fixed-step RK4, and the first zero is refined by bisection. Zeros closer
    to x = -1 than one step are found by continuing in tau = -log(1 + x).
    """
    if not mu_target > 0:
        raise ValueError(f"mu_target must be positive, got {mu_target}")
    nu = cap_degree(n, mu_target)
    mu = mu_target
    x = 1.0 - CAP_SERIES_START
    phi, dphi = _series_start(n, mu, CAP_SERIES_START)
    xs, fs, gs, ths = [x], [phi], [dphi], [math.acos(x)]
    h = -step
    zero = None
    while x + h > -1.0 + CAP_TAIL_SWITCH:
        nphi, ndphi = _rk4_step(x, phi, dphi, h, n, mu)
        if nphi == 0.0 or np.sign(nphi) != np.sign(phi):
            lo, hi = x + h, x  # phi(hi) has the start sign
            while hi - lo > CAP_ZERO_TOL:
                mid = 0.5 * (lo + hi)
                fm, _ = _rk4_step(x, phi, dphi, mid - x, n, mu)
                if np.sign(fm) == np.sign(phi):
                    hi = mid
                else:
                    lo = mid
            zero = 0.5 * (lo + hi)
            _, dzero = _rk4_step(x, phi, dphi, zero - x, n, mu)
            xs.append(zero)
            fs.append(0.0)
            gs.append(dzero)
            ths.append(math.acos(zero))
            break
        x, phi, dphi = x + h, nphi, ndphi
        xs.append(x)
        fs.append(phi)
        gs.append(dphi)
        ths.append(math.acos(x) if x > -0.5 else _south_angle(1 + x))
    theta0 = None
    if zero is None:
        zero, theta0 = _shoot_south_tail(n, mu, x, phi, dphi, xs, fs, gs, ths)
    if zero is None:
        raise ShootingError(f"no zero of the cap profile found for n={n}, nu={nu}")

    # series samples on (1 - y0, 1] so quadratures cover the whole cap
    th_head = np.linspace(0.0, math.acos(1.0 - CAP_SERIES_START), 129)[:-1]
    ys = 2 * np.sin(th_head / 2) ** 2
    head = [_series_start(n, mu, y) for y in ys]
    x_all = np.concatenate([1.0 - ys, xs])
    f_all = np.concatenate([[v for v, _ in head], fs])
    g_all = np.concatenate([[d for _, d in head], gs])
    th_all = np.concatenate([th_head, ths])
    order = np.argsort(-th_all)
    if theta0 is None:
        theta0 = math.acos(zero)
    return SphericalMode("cap", n, float(mu), nu=float(nu), theta0=float(theta0),
                         x=x_all[order], phi=f_all[order], dphi=g_all[order], theta=th_all[order])


def cap_rayleigh_quotient(mode: SphericalMode) -> float:
    """Dirichlet Rayleigh quotient of the stored cap profile, by quadrature.

    In x = cos(theta) the surface measure is (1 - x^2)^{(n-3)/2} dx and
    |grad phi|^2 = (1 - x^2) phi'(x)^2.
    """
    if mode.kind != "cap":
        raise ValueError("cap_rayleigh_quotient needs a cap mode")
    theta, f, g = _theta_samples(mode)
    s = np.sin(theta)
    w = s ** (mode.n - 2)
    num = integrate.simpson(s * s * g * g * w, x=theta)
    den = integrate.simpson(f * f * w, x=theta)
    return float(num / den)


def _theta_samples(mode: SphericalMode):
    # integrate in theta: the x-weight (1 - x^2)^{(n-3)/2} is singular at x = 1 for even n
    if mode.theta is not None:
        order = np.argsort(mode.theta)
        return mode.theta[order], mode.phi[order], mode.dphi[order]
    order = np.argsort(-mode.x)
    x = np.clip(mode.x[order], -1.0, 1.0)
    return np.arccos(x), mode.phi[order], mode.dphi[order]


def gegenbauer_cap_profile(n: int, nu: float, x):
    """Closed-form regular cap profile 2F1(-nu, nu+n-2; (n-1)/2; (1-x)/2).

    Independent of the shooting code; used as its oracle.
    """
    return special.hyp2f1(-nu, nu + n - 2, (n - 1) / 2, (1 - np.asarray(x)) / 2)


@lru_cache(maxsize=256)
def _zonal_norm(k: int, n: int) -> float:
    lam = (n - 2) / 2
    f = lambda x: special.eval_gegenbauer(k, lam, x) ** 2 * (1 - x * x) ** ((n - 3) / 2)
    val, _ = integrate.quad(f, -1, 1, limit=200)
    return math.sqrt(sphere_area(n - 2) * val)


def zonal_harmonic(k: int, n: int, x):
    """Zonal spherical harmonic of degree k on S^{n-1}, unit L^2 norm, at x = cos(theta)."""
    lam = (n - 2) / 2
    return special.eval_gegenbauer(k, lam, np.asarray(x, dtype=float)) / _zonal_norm(k, n)


@lru_cache(maxsize=512)
def _harmonic_lp(k: int, n: int, p: float) -> float:
    f = lambda x: abs(zonal_harmonic(k, n, x)) ** p * (1 - x * x) ** ((n - 3) / 2)
    pts = np.cos(np.pi * (np.arange(1, k + 1) - 0.5) / max(k, 1)) if k else None
    val, _ = integrate.quad(f, -1, 1, limit=400, points=pts)
    return sphere_area(n - 2) * val


def mode_lp_constant(mode: SphericalMode, p: float) -> float:
    """Integral of |phi|^p over the sphere (harmonic) or over the cap.

    Harmonics are the L^2-normalized zonal ones, so the value is 1 at p = 2.
    Cap profiles are normalized by phi(north pole) = 1.
    """
    if mode.kind == "harmonic":
        if p == 2:
            return 1.0
        return _harmonic_lp(mode.k, mode.n, float(p))
    theta, f, _ = _theta_samples(mode)
    w = np.sin(theta) ** (mode.n - 2)
    return float(sphere_area(mode.n - 2) * integrate.simpson(np.abs(f) ** p * w, x=theta))
