"""Explicit test-function families and the rates at which their quotients move.

All three families have the form u(r sigma) = r^{-H} omega(r^eps) phi(sigma)
with H = H_{2,alpha} and omega compactly supported in (0, inf). After the
substitution t = r^eps every weighted integral becomes a 1-D integral over
the support of omega, evaluated here by composite Gauss-Legendre quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .modes import SphericalMode, mode_lp_constant, sphere_area
from .params import Params, ParameterError, derive_params, resonant_mode

DEFAULT_EPS_LADDER = tuple(2.0 ** -j for j in range(3, 11))


class ResonanceMismatch(ValueError):
    pass


def _gl_panels(a: float, b: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    return (mid + half * x).ravel(), (half * w).ravel()


@dataclass(frozen=True, eq=False)
class ProfileOmega:
    """Compactly supported C^2 profile omega on [t0, t1] inside (0, inf).

    ``func`` returns (omega, omega', omega'') at any t; the arrays hold the
    samples at the Gauss-Legendre nodes used by every quadrature here.
    """

    t0: float
    t1: float
    func: Callable = field(repr=False)
    panels: int = 64
    order: int = 16
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    values: np.ndarray = field(init=False, repr=False)
    d1: np.ndarray = field(init=False, repr=False)
    d2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.t0 < self.t1:
            raise ValueError(f"support [{self.t0}, {self.t1}] must lie in (0, inf)")
        t, w = _gl_panels(self.t0, self.t1, self.panels, self.order)
        v, d1, d2 = (np.asarray(x, dtype=float) for x in self.func(t))
        scale = float(np.max(np.abs(v)))
        if scale == 0:
            raise ValueError("omega vanishes identically")
        ends = np.array([self.t0, self.t1])
        for arr in self.func(ends):
            if np.max(np.abs(arr)) > 1e-10 * scale * max(1.0, 1 / (self.t1 - self.t0) ** 2):
                raise ValueError("omega and its first two derivatives must vanish at the support ends")
        for name, val in (("nodes", t), ("weights", w), ("values", v), ("d1", d1), ("d2", d2)):
            object.__setattr__(self, name, val)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t > self.t0) & (t < self.t1)
        return tuple(np.where(inside, x, 0.0) for x in self.func(np.where(inside, t, 0.5 * (self.t0 + self.t1))))

    @classmethod
    def bump(cls, t0: float = 0.25, t1: float = 0.75, **kw) -> "ProfileOmega":
        """(t - t0)^3 (t1 - t)^3 scaled to peak value 1."""
        c = ((t1 - t0) / 2) ** -6

        def f(t):
            a, b = t - t0, t1 - t
            return (c * a ** 3 * b ** 3,
                    c * (3 * a * a * b ** 3 - 3 * a ** 3 * b * b),
                    c * (6 * a * b ** 3 - 18 * a * a * b * b + 6 * a ** 3 * b))
        return cls(t0, t1, f, **kw)

    def scaled(self, lam: float) -> "ProfileOmega":
        f = self.func
        return ProfileOmega(self.t0, self.t1, lambda t: tuple(lam * x for x in f(t)), self.panels, self.order)

    def dilated(self, lam: float) -> "ProfileOmega":
        """t -> omega(t / lam), supported on [lam t0, lam t1]."""
        f = self.func

        def g(t):
            v, d1, d2 = f(np.asarray(t) / lam)
            return v, d1 / lam, d2 / lam ** 2
        return ProfileOmega(lam * self.t0, lam * self.t1, g, self.panels, self.order)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@dataclass(frozen=True)
class RateFit:
    eps_list: tuple[float, ...]
    values: tuple[float, ...]
    slope: float
    r_squared: float

    def as_dict(self) -> dict:
        return {"eps_list": list(self.eps_list), "values": list(self.values),
                "slope": self.slope, "r_squared": self.r_squared}


def fit_rate(eps_list: Sequence[float], values: Sequence[float]) -> RateFit:
    """Least-squares slope of log(value) against log(eps)."""
    eps = np.asarray(eps_list, dtype=float)
    vals = np.asarray(values, dtype=float)
    if eps.size != vals.size:
        raise ValueError("eps_list and values differ in length")
    if eps.size < 4:
        raise ValueError(f"need at least 4 points for a rate fit, got {eps.size}")
    if np.any(eps <= 0) or np.any(vals <= 0):
        raise ValueError("rate fits need positive eps and positive values")
    x, y = np.log(eps), np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1 - float(np.sum(resid ** 2)) / ss_tot)
    return RateFit(tuple(eps.tolist()), tuple(vals.tolist()), float(slope), float(r2))


def fit_rate_corrected(eps_list: Sequence[float], values: Sequence[float]) -> RateFit:
    """Slope s of log(value) = s log(eps) + c0 + c1 eps.

    The extra eps column absorbs the first-order correction of the families,
    which is large when the drift 2A is small compared with the top of the
    eps ladder.
    """
    base = fit_rate(eps_list, values)
    eps = np.asarray(base.eps_list)
    y = np.log(base.values)
    X = np.column_stack([np.log(eps), np.ones_like(eps), eps])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1 - float(np.sum(resid ** 2)) / ss_tot)
    return RateFit(base.eps_list, base.values, float(coef[0]), float(r2))


def _check_eps(eps: float):
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")


def _drift_bracket(omega: ProfileOmega, eps: float, c: float) -> np.ndarray:
    t = omega.nodes
    return eps * t * omega.d2 + (c + eps) * omega.d1


def _log_moment(omega: ProfileOmega, q: float) -> float:
    """int t^{-1} |omega|^q dt."""
    return omega.integrate(np.abs(omega.values) ** q / omega.nodes)


def resonance_family_bound(omega: ProfileOmega, eps: float, params: Params, k: int) -> float:
    """Quotient of r^{-H} omega(r^eps) phi_k at a resonant weight.

    With gamma + lambda_k = 0 it equals
    eps^p int t^{p-1}|eps t omega'' + (2A + eps) omega'|^p / int t^{-1}|omega|^p,
    where 2A = n - 2 - 2H. The spherical L^p constant cancels.
    """
    _check_eps(eps)
    kk = resonant_mode(params)
    if kk is None or kk != k:
        raise ResonanceMismatch(f"mode k={k} is not resonant at alpha={params.alpha} (resonant mode: {kk})")
    p = params.p
    c = 2 * derive_params(params).A
    num = omega.integrate(omega.nodes ** (p - 1) * np.abs(_drift_bracket(omega, eps, c)) ** p)
    return eps ** p * num / _log_moment(omega, p)


def mitidieri_sharpness_quotient(omega: ProfileOmega, eps: float, params: Params,
                                 closed_range: bool = False) -> float:
    """Radial quotient of r^{-H} omega(r^eps) with omega supported in (0, 1).

    int t^{-1}|eps^2 t^2 omega'' + eps t (2A + eps) omega' - gamma omega|^p
    / int t^{-1}|omega|^p, which tends to gamma^p as eps -> 0.
    ``closed_range`` admits the endpoints of the Rellich range (gamma = 0 or
    the upper end) where the limit is 0.
    """
    _check_eps(eps)
    lo, hi = params.rellich_range
    a = params.alpha
    inside = (lo <= a <= hi) if closed_range else (lo < a < hi)
    if not inside:
        raise ParameterError(f"alpha={a} outside the Rellich range ({lo}, {hi})")
    if omega.t1 >= 1:
        raise ValueError(f"omega must be supported in (0, 1); support ends at {omega.t1}")
    p = params.p
    d = derive_params(params)
    t = omega.nodes
    inner = eps * t * _drift_bracket(omega, eps, 2 * d.A) - d.gamma * omega.values
    num = omega.integrate(np.abs(inner) ** p / t)
    return num / _log_moment(omega, p)


def navier_degeneration_quotient(omega: ProfileOmega, eps: float, params: Params,
                                 cap: SphericalMode, constants: bool = True) -> float:
    """Rellich-Sobolev quotient of r^{-H} omega(r^eps) phi(sigma) beyond np - n.

    ``cap`` carries eigenvalue -gamma_{p,alpha} (a spherical cap, or a full
    sphere harmonic at a resonant weight). The quotient is

        eps^{p-1} C_p int t^{p-1}|eps t omega'' + (2A + eps) omega'|^p
        / (eps^{-1} C_q int t^{-1}|omega|^q)^{p/q}

    with C_r = int |phi|^r on the sphere; ``constants=False`` drops them.
    """
    _check_eps(eps)
    p, q = params.p, params.q
    d = derive_params(params)
    if abs(cap.eigenvalue + d.gamma) > 1e-8 * max(1.0, abs(d.gamma)):
        raise ResonanceMismatch(
            f"mode eigenvalue {cap.eigenvalue} does not match -gamma = {-d.gamma}")
    if cap.kind == "cap" and not params.alpha > params.n * p - params.n:
        raise ParameterError("the cap family needs alpha > np - n")
    num = omega.integrate(omega.nodes ** (p - 1) * np.abs(_drift_bracket(omega, eps, 2 * d.A)) ** p)
    den = _log_moment(omega, q)
    cp = cq = 1.0
    if constants:
        cp, cq = mode_lp_constant(cap, p), mode_lp_constant(cap, q)
    return eps ** (p - 1) * cp * num / (cq * den / eps) ** (p / q)


def rate_over_ladder(func: Callable[[float], float], eps_ladder: Sequence[float] = DEFAULT_EPS_LADDER,
                     corrected: bool = False) -> RateFit:
    eps = sorted(eps_ladder, reverse=True)
    fit = fit_rate_corrected if corrected else fit_rate
    return fit(eps, [func(e) for e in eps])


def mapped_profile(omega: ProfileOmega, eps: float):
    """Axial profile w(s) = omega(exp(-eps s)) as a cylinder profile source."""

    class _Mapped:
        breakpoints = np.array([-math.log(omega.t1) / eps, -math.log(omega.t0) / eps])

        def __call__(self, s):
            t = np.exp(-eps * np.asarray(s, dtype=float))
            v, d1, d2 = omega(t)
            return v, -eps * t * d1, eps * eps * (t * d1 + t * t * d2)
    return _Mapped()


# ---------------------------------------------------------------------------
# density cutoff
# ---------------------------------------------------------------------------

def smoothstep_cutoff(tau):
    """eta with eta = 1 for tau <= 1, eta = 0 for tau >= 2, quintic (C^2) in between."""
    tau = np.asarray(tau, dtype=float)
    x = np.clip(tau - 1, 0.0, 1.0)
    inside = (tau > 1) & (tau < 2)
    eta = 1 - (10 * x ** 3 - 15 * x ** 4 + 6 * x ** 5)
    d1 = np.where(inside, -30 * x * x * (1 - x) ** 2, 0.0)
    d2 = np.where(inside, -60 * x * (1 - x) * (1 - 2 * x), 0.0)
    return eta, d1, d2


@dataclass(frozen=True)
class RadialProfile:
    """Radial function on the unit ball: callable returning (u, u', u'') at r."""

    func: Callable = field(repr=False)
    origin_value: float = 0.0

    def __call__(self, r):
        return self.func(np.asarray(r, dtype=float))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "RadialProfile":
        """sum_j c_j r^{2j} (smooth at the origin)."""
        P = np.polynomial.Polynomial(np.ravel([[c, 0.0] for c in coeffs])[:-1])
        d1, d2 = P.deriv(1), P.deriv(2)
        return cls(lambda r: (P(r), d1(r), d2(r)), float(coeffs[0]))

    @classmethod
    def shell(cls, r0: float, r1: float) -> "RadialProfile":
        """C^2 bump supported on [r0, r1] with 0 < r0, vanishing near the origin."""
        om = ProfileOmega.bump(r0, r1)
        return cls(om, 0.0)


def _laplacian(u, du, d2u, r, n):
    return d2u + (n - 1) * du / r


def cutoff_density_residual(u: RadialProfile, h: float, params: Params,
                            eta: Callable = smoothstep_cutoff, order: int = 64) -> float:
    """int_{B_1} |x|^alpha |Laplacian(eta_h u) - Laplacian u|^p dx for radial u.

    eta_h(x) = eta(-log|x| / h). The product rule is applied exactly; the
    transition shell e^{-2h} < r < e^{-h} is integrated in tau = -log(r)/h and
    the inner ball (where eta_h = 0) by adaptive quadrature in r.
    """
    n, p, alpha = params.n, params.p, params.alpha
    if not alpha > 2 * p - n:
        raise ParameterError(f"the cutoff residual needs alpha > 2p - n = {2 * p - n}")
    h = float(h)
    area = sphere_area(n - 1)

    tau, w = _gl_panels(1.0, 2.0, 8, order)
    r = np.exp(-h * tau)
    e, e1, e2 = eta(tau)
    uu, du, d2u = u(r)
    lap_u = _laplacian(uu, du, d2u, r, n)
    deta = -e1 / (h * r)
    lap_eta = (e2 / h ** 2 - (n - 2) * e1 / h) / r ** 2
    diff = (e - 1) * lap_u + 2 * deta * du + uu * lap_eta
    shell = float(np.dot(w, r ** (alpha + n) * np.abs(diff) ** p)) * h

    def inner(rr):
        a, b, c = u(np.array([rr]))
        return rr ** (alpha + n - 1) * abs(_laplacian(a, b, c, rr, n)[0]) ** p

    core, _ = integrate.quad(inner, 0.0, math.exp(-2 * h), limit=200, epsabs=0.0, epsrel=1e-12)
    return area * (shell + core)


def cutoff_leading_model(h: float, params: Params, origin_value: float,
                         eta: Callable = smoothstep_cutoff, order: int = 64) -> float:
    """Leading term of the residual for u(0) != 0: only u(0) Laplacian(eta_h) survives.

    |u(0)|^p |S^{n-1}| h^{1-p} int_1^2 |eta''/h - (n-2) eta'|^p e^{-delta h tau} dtau,
    delta = alpha - 2p + n.
    """
    n, p, alpha = params.n, params.p, params.alpha
    h = float(h)
    delta = alpha - 2 * p + n
    tau, w = _gl_panels(1.0, 2.0, 8, order)
    _, e1, e2 = eta(tau)
    integrand = np.abs(e2 / h - (n - 2) * e1) ** p * np.exp(-delta * h * tau)
    return abs(origin_value) ** p * sphere_area(n - 1) * h ** (1 - p) * float(np.dot(w, integrand))


def exponential_rate(hs: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares decay rate kappa in values ~ C exp(-kappa h)."""
    hs = np.asarray(hs, dtype=float)
    vals = np.asarray(values, dtype=float)
    if np.any(vals <= 0):
        raise ValueError("decay fits need positive values")
    return float(-np.polyfit(hs, np.log(vals), 1)[0])
