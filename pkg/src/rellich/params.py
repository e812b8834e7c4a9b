"""Closed-form constants for weighted second-order Rellich-Sobolev inequalities.

Everything here is direct substitution: no discretization, double precision.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

RESONANCE_TOL = 1e-12


class ParameterError(ValueError):
    """Raised when an exponent tuple violates an admissibility condition."""


@dataclass(frozen=True)
class Params:
    """Dimension ``n``, exponents ``p <= q`` and the weight exponent ``alpha``."""

    n: int
    p: float
    q: float
    alpha: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ParameterError(f"n must be an integer >= 3, got {self.n}")
        if not self.p > 1:
            raise ParameterError(f"p must exceed 1, got {self.p}")
        if not self.q >= self.p:
            raise ParameterError(f"q must be >= p, got q={self.q}, p={self.p}")
        object.__setattr__(self, "n", int(self.n))

    def with_alpha(self, alpha: float) -> "Params":
        return Params(self.n, self.p, self.q, alpha)

    @property
    def p_crit(self) -> float | None:
        """Second-order Sobolev exponent np/(n-2p), or None when n <= 2p."""
        if self.n > 2 * self.p:
            return self.n * self.p / (self.n - 2 * self.p)
        return None

    def check_sobolev_range(self):
        """Enforce q <= p** (only needed by Sobolev-critical operations)."""
        pc = self.p_crit
        if pc is not None and self.q > pc * (1 + 1e-14):
            raise ParameterError(f"q={self.q} exceeds p**={pc} for n={self.n}, p={self.p}")

    @property
    def rellich_range(self) -> tuple[float, float]:
        """Open interval (2p-n, np-n) on which gamma_{p,alpha} > 0."""
        return 2 * self.p - self.n, self.n * self.p - self.n

    def in_rellich_range(self) -> bool:
        lo, hi = self.rellich_range
        return lo < self.alpha < hi

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DerivedParams:
    beta: float
    gamma: float
    H1: float
    H2: float
    A: float
    alpha_star: float
    p_crit: float | None
    gamma_bar: float | None

    def as_dict(self) -> dict:
        return asdict(self)


def hardy_exponent(a: float, n: int, p: float) -> float:
    """First-order Emden-Fowler exponent H_{1,a} = (n+a)/p - 1."""
    return (n + a) / p - 1


def gamma_of(n: int, p: float, alpha: float) -> float:
    """gamma_{p,alpha} = ((n+alpha)/p - 2) (n - (n+alpha)/p)."""
    m = (n + alpha) / p
    return (m - 2) * (n - m)


def drift_of(n: int, p: float, alpha: float) -> float:
    """Drift coefficient A_{p,alpha} = (n+2)/2 - (n+alpha)/p of the cylinder operator."""
    return (n + 2) / 2 - (n + alpha) / p


def alpha_star(n: int, p: float) -> float:
    """Centre of the reflection symmetry alpha -> 2 alpha* - alpha."""
    return p + n * (p - 2) / 2


def derive_params(params: Params) -> DerivedParams:
    """All derived constants of ``params``.

    ``H1`` uses the first-order weight a = alpha - p, the exponent under which
    the second-order space embeds into a first-order one; call
    :func:`hardy_exponent` for any other ``a``. ``gamma_bar`` is only defined
    for p = 2 and is None otherwise.
    """
    n, p, q, alpha = params.n, params.p, params.q, params.alpha
    gamma_bar = None
    if p == 2:
        gamma_bar = ((n - 2) / 2) ** 2 + ((alpha + 2) / 2) ** 2
    return DerivedParams(
        beta=n - q * (n - 2 * p + alpha) / p,
        gamma=gamma_of(n, p, alpha),
        H1=hardy_exponent(alpha - p, n, p),
        H2=(n + alpha) / p - 2,
        A=drift_of(n, p, alpha),
        alpha_star=alpha_star(n, p),
        p_crit=params.p_crit,
        gamma_bar=gamma_bar,
    )


def sphere_eigenvalue(k: int, n: int) -> float:
    """Eigenvalue k(n-2+k) of -Laplace-Beltrami on S^{n-1}."""
    if k < 0 or int(k) != k:
        raise ValueError(f"k must be a non-negative integer, got {k}")
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    return float(k * (n - 2 + k))


def resonant_mode(params: Params, tol: float = RESONANCE_TOL) -> int | None:
    """Integer k with -gamma = k(n-2+k), or None.

    Solves k^2 + (n-2)k + gamma = 0 for its non-negative root and tests the
    two nearest integers, so arbitrarily large resonant modes are found.
    """
    n = params.n
    g = gamma_of(n, params.p, params.alpha)
    disc = (n - 2) ** 2 - 4 * g
    if disc < 0:
        return None
    root = (-(n - 2) + math.sqrt(disc)) / 2
    if root < -0.5:
        return None
    for k in {max(0, math.floor(root)), max(0, math.ceil(root))}:
        if abs(g + k * (n - 2 + k)) <= tol * max(1.0, abs(g)):
            return k
    return None


def is_resonant(params: Params, tol: float = RESONANCE_TOL) -> bool:
    """True iff -gamma_{p,alpha} is an eigenvalue of the sphere Laplacian."""
    return resonant_mode(params, tol) is not None


def k_search_bound(gamma: float, n: int, margin: float = 1.0) -> int:
    """Smallest k with lambda_k > |gamma| + margin."""
    k = 0
    while k * (n - 2 + k) <= abs(gamma) + margin:
        k += 1
    return k


def mu22_closed_form(n: int, alpha: float) -> tuple[float, int]:
    """Closed form min_k |gamma_{2,alpha} + lambda_k|^2 and its minimizing k.

    Past the first k with lambda_k > |gamma| + 1 every further term exceeds
    gamma^2, so the scan is finite.
    """
    g = gamma_of(n, 2, alpha)
    best, arg = math.inf, 0
    for k in range(k_search_bound(g, n) + 1):
        val = (g + k * (n - 2 + k)) ** 2
        if val < best:
            best, arg = val, k
    return best, arg
