"""Emden-Fowler transforms between R^n minus the origin and the cylinder R x S^{n-1}.

A function on the cylinder is stored as a finite sum of separable terms
``w_k(s) phi_k(sigma)``. Points map by ``x = e^{-s} sigma``, and

    T_{1,a} g = |x|^{-H_{1,a}} g,      T_{2,alpha} g = |x|^{-H_{2,alpha}} g.

Under these transforms the weighted norms of ``u`` become unweighted cylinder
norms with constant coefficients. The ``physical`` side of every
:class:`NormPair` is computed independently of that identity: Gauss-Legendre
panels in the radius ``r`` applied to the physical gradient or Laplacian of
``u``, evaluated from an analytic description of each profile.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from scipy.interpolate import make_interp_spline

from .modes import SphericalMode, cap_for_eigenvalue, harmonic, mode_lp_constant
from .params import Params, derive_params, hardy_exponent

TINY = 1e-300
MIN_SUPPORT_NODES = 64


class GridError(ValueError):
    pass


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Grid1D:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "cylinder-axis"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise GridError("nodes and weights must be 1-D arrays of equal length")
        if nodes.size < 16:
            raise GridError(f"a grid needs at least 16 nodes, got {nodes.size}")
        if np.any(np.diff(nodes) <= 0):
            raise GridError("grid nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise GridError("quadrature weights must be positive")
        if self.kind not in ("cylinder-axis", "radial"):
            raise GridError(f"unknown grid kind {self.kind!r}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def span(self) -> float:
        return float(self.nodes[-1] - self.nodes[0])

    @property
    def h(self) -> float:
        """Node spacing of a uniform grid (max spacing otherwise)."""
        return float(np.max(np.diff(self.nodes)))

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.nodes)
        return bool(np.ptp(d) <= 1e-9 * d.mean())

    @property
    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.nodes, -self.nodes[::-1], rtol=0, atol=1e-12 * max(1.0, self.span)))

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def uniform_grid(S: float = 20.0, N: int = 2048, lo: float | None = None) -> Grid1D:
    """Trapezoid rule on [-S, S] (or on [lo, lo + 2S] when ``lo`` is given)."""
    a = -S if lo is None else lo
    b = a + 2 * S
    nodes = np.linspace(a, b, N)
    h = (b - a) / (N - 1)
    weights = np.full(N, h)
    weights[0] = weights[-1] = h / 2
    return Grid1D(nodes, weights, "cylinder-axis")


def interval_grid(a: float, b: float, N: int, kind: str = "cylinder-axis") -> Grid1D:
    """Trapezoid rule on an arbitrary interval [a, b]."""
    nodes = np.linspace(a, b, N)
    h = (b - a) / (N - 1)
    weights = np.full(N, h)
    weights[0] = weights[-1] = h / 2
    return Grid1D(nodes, weights, kind)


def gauss_legendre_panels(breaks: Sequence[float], order: int = 8, kind: str = "radial") -> Grid1D:
    """Composite Gauss-Legendre rule with panels between consecutive ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return Grid1D(nodes, weights, kind)


def fd_derivatives(values: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Second-order centered first and second differences on a uniform grid.

    End rows use the mirror-image one-sided three- and four-point formulas, so
    reversing ``values`` reverses (and for d1 negates) the result exactly.
    """
    f = np.asarray(values, dtype=float)
    d1 = np.empty_like(f)
    d2 = np.empty_like(f)
    d1[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    d1[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    d1[-1] = -(-3 * f[-1] + 4 * f[-2] - f[-3]) / (2 * h)
    d2[1:-1] = ((f[2:] + f[:-2]) - 2 * f[1:-1]) / (h * h)
    d2[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / (h * h)
    d2[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / (h * h)
    return d1, d2


# ---------------------------------------------------------------------------
# analytic profiles
# ---------------------------------------------------------------------------

class ProfileSource(Protocol):
    """Analytic 1-D profile: value and first two derivatives at any s."""

    def __call__(self, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]: ...

    @property
    def breakpoints(self) -> np.ndarray: ...


def _bump(x):
    """(1 - x^2)^4 on [-1, 1] with its first two derivatives; C^3 on R."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    y = np.where(inside, 1 - x * x, 0.0)
    b = y ** 4
    db = -8 * x * y ** 3
    d2b = -8 * y ** 3 + 48 * x * x * y ** 2
    return b, np.where(inside, db, 0.0), np.where(inside, d2b, 0.0)


@dataclass(frozen=True)
class BumpSum:
    """Sum of scaled bumps a_j (1 - ((s - c_j)/W_j)^2)^4 supported on |s - c_j| < W_j."""

    amplitudes: tuple[float, ...]
    centers: tuple[float, ...]
    widths: tuple[float, ...]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        w = np.zeros_like(s)
        dw = np.zeros_like(s)
        d2w = np.zeros_like(s)
        for a, c, W in zip(self.amplitudes, self.centers, self.widths):
            b, db, d2b = _bump((s - c) / W)
            w += a * b
            dw += a * db / W
            d2w += a * d2b / (W * W)
        return w, dw, d2w

    @property
    def breakpoints(self) -> np.ndarray:
        pts = [c - W for c, W in zip(self.centers, self.widths)]
        pts += [c + W for c, W in zip(self.centers, self.widths)]
        return np.unique(pts)

    def shifted(self, tau: float) -> "BumpSum":
        return BumpSum(self.amplitudes, tuple(c + tau for c in self.centers), self.widths)

    def reflected(self) -> "BumpSum":
        return BumpSum(self.amplitudes, tuple(-c for c in self.centers), self.widths)


@dataclass(frozen=True)
class _Reflected:
    inner: ProfileSource

    def __call__(self, s):
        w, dw, d2w = self.inner(-np.asarray(s, dtype=float))
        return w, -dw, d2w

    @property
    def breakpoints(self):
        return np.sort(-np.asarray(self.inner.breakpoints))


@dataclass(frozen=True)
class _SplineSource:
    """Quintic interpolant of sampled values; physical-side fallback for replayed data."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_spline", make_interp_spline(self.nodes, self.values, k=5))

    def __call__(self, s):
        spl = self._spline
        s = np.asarray(s, dtype=float)
        inside = (s >= self.nodes[0]) & (s <= self.nodes[-1])
        out = [np.where(inside, spl(s, nu), 0.0) for nu in range(3)]
        return tuple(out)

    @property
    def breakpoints(self):
        nz = np.nonzero(np.abs(self.values) > 0)[0]
        if nz.size == 0:
            return np.array([self.nodes[0], self.nodes[-1]])
        lo, hi = max(nz[0] - 1, 0), min(nz[-1] + 1, self.nodes.size - 1)
        return np.array([self.nodes[lo], self.nodes[hi]])


# ---------------------------------------------------------------------------
# cylinder functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ModeProfile:
    """Axial profile w(s) on a grid, attached to one spherical mode."""

    mode: SphericalMode
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    source: ProfileSource | None = field(default=None, repr=False)

    @classmethod
    def from_values(cls, mode: SphericalMode, grid: Grid1D, values, source=None) -> "ModeProfile":
        values = np.array(values, dtype=float)
        values.setflags(write=False)
        d1, d2 = fd_derivatives(values, grid.h)
        d1.setflags(write=False)
        d2.setflags(write=False)
        return cls(mode, values, d1, d2, source)

    @classmethod
    def from_source(cls, mode: SphericalMode, grid: Grid1D, source: ProfileSource) -> "ModeProfile":
        return cls.from_values(mode, grid, source(grid.nodes)[0], source)

    def support(self, grid: Grid1D) -> tuple[float, float]:
        if self.source is not None:
            bp = np.asarray(self.source.breakpoints)
            return float(bp.min()), float(bp.max())
        nz = np.nonzero(self.values)[0]
        if nz.size == 0:
            return 0.0, 0.0
        return float(grid.nodes[nz[0]]), float(grid.nodes[nz[-1]])

    def physical_source(self, grid: Grid1D) -> ProfileSource:
        return self.source if self.source is not None else _SplineSource(grid.nodes, self.values)


@dataclass(frozen=True, eq=False)
class CylinderFunction:
    grid: Grid1D
    modes: tuple[ModeProfile, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("a cylinder function needs at least one mode")
        if not self.grid.is_uniform:
            raise GridError("cylinder functions live on uniform axis grids")
        labels = [m.mode.label for m in self.modes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"repeated spherical modes {labels}")
        for m in self.modes:
            if m.values.shape != self.grid.nodes.shape:
                raise ValueError("profile length does not match the grid")
            scale = max(float(np.max(np.abs(m.values))), TINY)
            if abs(m.values[0]) > 1e-12 * scale or abs(m.values[-1]) > 1e-12 * scale:
                raise ValueError(f"profile {m.mode.label} does not vanish at the grid ends")

    @property
    def n(self) -> int:
        return self.modes[0].mode.n

    @classmethod
    def single(cls, mode: SphericalMode, grid: Grid1D, source: ProfileSource) -> "CylinderFunction":
        return cls(grid, (ModeProfile.from_source(mode, grid, source),))

    def shifted(self, steps: int) -> "CylinderFunction":
        """Translate every profile by an integer number of grid steps (zero fill)."""
        out = []
        for m in self.modes:
            v = np.zeros_like(m.values)
            if steps >= 0:
                v[steps:] = m.values[: v.size - steps]
            else:
                v[:steps] = m.values[-steps:]
            src = None
            if isinstance(m.source, BumpSum):
                src = m.source.shifted(steps * self.grid.h)
            out.append(ModeProfile.from_values(m.mode, self.grid, v, src))
        return CylinderFunction(self.grid, tuple(out))

    def scaled(self, factor: float) -> "CylinderFunction":
        out = []
        for m in self.modes:
            src = None
            if isinstance(m.source, BumpSum):
                src = BumpSum(tuple(factor * a for a in m.source.amplitudes),
                              m.source.centers, m.source.widths)
            out.append(ModeProfile.from_values(m.mode, self.grid, factor * m.values, src))
        return CylinderFunction(self.grid, tuple(out))

    # -- replay records ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "grid": {"nodes": self.grid.nodes.tolist(), "kind": self.grid.kind},
            "modes": [
                {"kind": m.mode.kind, "k": m.mode.k, "nu": m.mode.nu, "values": m.values.tolist()}
                for m in self.modes
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "CylinderFunction":
        nodes = np.asarray(data["grid"]["nodes"], dtype=float)
        grid = interval_grid(nodes[0], nodes[-1], nodes.size, data["grid"].get("kind", "cylinder-axis"))
        n = int(data["n"])
        modes = []
        for rec in data["modes"]:
            if rec["kind"] == "harmonic":
                mode = harmonic(int(rec["k"]), n)
            else:
                nu = float(rec["nu"])
                mode = cap_for_eigenvalue(n, nu * (nu + n - 2))
            modes.append(ModeProfile.from_values(mode, grid, rec["values"]))
        return cls(grid, tuple(modes))

    @classmethod
    def from_json(cls, text: str) -> "CylinderFunction":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# norm identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormPair:
    physical: float
    cylinder: float
    rel_gap: float

    @classmethod
    def of(cls, physical: float, cylinder: float) -> "NormPair":
        gap = abs(physical - cylinder) / max(physical, TINY)
        return cls(float(physical), float(cylinder), float(gap))


def _check_separable(g: CylinderFunction, p: float, q: float | None = None):
    exps = [p] if q is None else [p, q]
    if len(g.modes) > 1 and any(e != 2 for e in exps):
        raise ValueError("several spherical modes only separate for exponent 2")


def _radial_panels(sources_support: list[tuple[float, float]], breakpoints, points: int = 4096,
                   order: int = 8) -> Grid1D:
    """Gauss-Legendre panels in r covering the image of the axial supports.

    Panel ends are geometric in r (uniform in s = -log r) so that many decades
    of r are resolved evenly; every profile breakpoint is a panel end.
    """
    lo = min(a for a, _ in sources_support)
    hi = max(b for _, b in sources_support)
    panels = max(points // order, 1)
    s_breaks = np.union1d(np.linspace(lo, hi, panels + 1), np.clip(breakpoints, lo, hi))
    r_breaks = np.sort(np.exp(-s_breaks))
    return gauss_legendre_panels(r_breaks, order)


def first_order_norms(g: CylinderFunction, a: float, params: Params,
                      points: int = 4096) -> tuple[NormPair, NormPair]:
    """Weighted gradient norm of u = T_{1,a} g, physical versus cylinder side.

    Returns ``(gradient, lp)`` where ``gradient`` compares
    int |x|^a |grad u|^p dx with int |(g_s + H g)^2 + |grad_sigma g|^2|^{p/2},
    and ``lp`` compares int |x|^{a-p} |u|^p dx with int |g|^p.

    For p != 2 only the radial mode separates; other inputs are rejected.
    """
    n, p = params.n, params.p
    H = hardy_exponent(a, n, p)
    if abs(H) < 1e-10:
        raise ValueError(f"H_1,a vanishes for a={a} (a = p - n); the transform degenerates")
    if p != 2 and not (len(g.modes) == 1 and g.modes[0].mode.kind == "harmonic" and g.modes[0].mode.k == 0):
        raise ValueError("first-order norms with p != 2 need a single radial (k=0) mode")
    grid = g.grid
    cyl = lp_cyl = 0.0
    for m in g.modes:
        lam = m.mode.eigenvalue
        drift = m.d1 + H * m.values
        if p == 2:
            cyl += grid.integrate(drift ** 2 + lam * m.values ** 2)
            lp_cyl += grid.integrate(m.values ** 2)
        else:
            c = mode_lp_constant(m.mode, p)
            cyl += c * grid.integrate(np.abs(drift) ** p)
            lp_cyl += c * grid.integrate(np.abs(m.values) ** p)

    phys = lp_phys = 0.0
    for m in g.modes:
        src = m.physical_source(grid)
        rg = _radial_panels([m.support(grid)], src.breakpoints, points)
        r = rg.nodes
        w, dw, _ = src(-np.log(r))
        f = r ** (-H) * w
        fr = -(r ** (-H - 1)) * (H * w + dw)
        lam = m.mode.eigenvalue
        c = mode_lp_constant(m.mode, p)
        grad2 = fr ** 2 + lam * f ** 2 / r ** 2
        phys += c * rg.integrate(r ** a * grad2 ** (p / 2) * r ** (n - 1))
        lp_phys += c * rg.integrate(r ** (a - p) * np.abs(f) ** p * r ** (n - 1))
    return NormPair.of(phys, cyl), NormPair.of(lp_phys, lp_cyl)


def cylinder_operator(m: ModeProfile, A: float, gamma: float) -> np.ndarray:
    """Samples of w'' - 2A w' - (gamma + lambda) w for one mode."""
    return m.d2 - 2 * A * m.d1 - (gamma + m.mode.eigenvalue) * m.values


def _check_resolution(g: CylinderFunction):
    for m in g.modes:
        lo, hi = m.support(g.grid)
        if not np.any(m.values):
            continue
        count = int(np.count_nonzero((g.grid.nodes >= lo) & (g.grid.nodes <= hi)))
        if count < MIN_SUPPORT_NODES:
            raise GridError(
                f"grid too coarse: only {count} nodes across the support [{lo:.4g}, {hi:.4g}] "
                f"of mode {m.mode.label}; need at least {MIN_SUPPORT_NODES}")


def second_order_norms(g: CylinderFunction, params: Params,
                       points: int = 4096) -> tuple[NormPair, NormPair]:
    """Weighted Laplacian norm of u = T_{2,alpha} g, physical versus cylinder side.

    Returns ``(laplacian, lp)``: int |x|^alpha |Laplacian u|^p dx against
    int |w'' - 2A w' - (gamma + lambda) w|^p ds, and int |x|^{alpha-2p}|u|^p dx
    against int |w|^p ds (spherical L^p constants included on both sides).
    """
    n, p, alpha = params.n, params.p, params.alpha
    _check_separable(g, p)
    _check_resolution(g)
    d = derive_params(params)
    grid = g.grid
    cyl = lp_cyl = 0.0
    for m in g.modes:
        c = mode_lp_constant(m.mode, p)
        cyl += c * grid.integrate(np.abs(cylinder_operator(m, d.A, d.gamma)) ** p)
        lp_cyl += c * grid.integrate(np.abs(m.values) ** p)

    H = d.H2
    phys = lp_phys = 0.0
    for m in g.modes:
        if not np.any(m.values):
            continue
        src = m.physical_source(grid)
        rg = _radial_panels([m.support(grid)], src.breakpoints, points)
        r = rg.nodes
        w, dw, d2w = src(-np.log(r))
        f = r ** (-H) * w
        fr = -(r ** (-H - 1)) * (H * w + dw)
        frr = r ** (-H - 2) * (H * (H + 1) * w + (2 * H + 1) * dw + d2w)
        lap = frr + (n - 1) * fr / r - m.mode.eigenvalue * f / r ** 2
        c = mode_lp_constant(m.mode, p)
        phys += c * rg.integrate(r ** alpha * np.abs(lap) ** p * r ** (n - 1))
        lp_phys += c * rg.integrate(r ** (alpha - 2 * p) * np.abs(f) ** p * r ** (n - 1))
    return NormPair.of(phys, cyl), NormPair.of(lp_phys, lp_cyl)


# ---------------------------------------------------------------------------
# cylinder-side functionals used by the quotient checks
# ---------------------------------------------------------------------------

def first_order_energy(g: CylinderFunction, a: float, p: float) -> float:
    """Cylinder form of int |x|^a |grad u|^p dx (exponent 2 or radial only)."""
    H = hardy_exponent(a, g.n, p)
    total = 0.0
    for m in g.modes:
        drift = m.d1 + H * m.values
        if p == 2:
            total += g.grid.integrate(drift ** 2 + m.mode.eigenvalue * m.values ** 2)
        else:
            if len(g.modes) > 1 or m.mode.eigenvalue != 0:
                raise ValueError("first-order energy with p != 2 needs a single radial mode")
            total += mode_lp_constant(m.mode, p) * g.grid.integrate(np.abs(drift) ** p)
    return total


def second_order_energy(g: CylinderFunction, params: Params) -> float:
    """Cylinder form of int |x|^alpha |Laplacian u|^p dx."""
    _check_separable(g, params.p)
    d = derive_params(params)
    return sum(mode_lp_constant(m.mode, params.p)
               * g.grid.integrate(np.abs(cylinder_operator(m, d.A, d.gamma)) ** params.p)
               for m in g.modes)


def lq_norm(g: CylinderFunction, q: float) -> float:
    """int |g|^q ds dsigma (not raised to 1/q)."""
    _check_separable(g, q)
    return sum(mode_lp_constant(m.mode, q) * g.grid.integrate(np.abs(m.values) ** q) for m in g.modes)


def ckn_quotient(g: CylinderFunction, a: float, p: float, q: float) -> float:
    """First-order Caffarelli-Kohn-Nirenberg quotient of T_{1,a} g."""
    return first_order_energy(g, a, p) / lq_norm(g, q) ** (p / q)


def rellich_sobolev_quotient(g: CylinderFunction, params: Params) -> float:
    return second_order_energy(g, params) / lq_norm(g, params.q) ** (params.p / params.q)


# ---------------------------------------------------------------------------
# inversion symmetry
# ---------------------------------------------------------------------------

def hat_alpha(alpha: float, n: int, p: float) -> float:
    """Second-order reflected weight 2 alpha*_p - alpha."""
    return 2 * (p + n * (p - 2) / 2) - alpha


def hat_a(a: float, n: int, p: float) -> float:
    """First-order reflected weight 2(p - n) - a."""
    return 2 * (p - n) - a


def reflect_and_hat(g: CylinderFunction, params: Params) -> tuple[CylinderFunction, Params]:
    """Reflect s -> -s and move the weight to its mirror image.

    On the physical side this is the Kelvin-type inversion x -> x/|x|^2. The
    returned parameters carry alpha -> 2 alpha*_p - alpha; the first-order
    counterpart a -> 2(p - n) - a is :func:`hat_a`.
    """
    if not g.grid.is_symmetric:
        raise GridError("reflection needs a grid symmetric about s = 0")
    modes = []
    for m in g.modes:
        src = None
        if m.source is not None:
            src = m.source.reflected() if isinstance(m.source, BumpSum) else _Reflected(m.source)
        modes.append(ModeProfile.from_values(m.mode, g.grid, m.values[::-1], src))
    hatted = params.with_alpha(hat_alpha(params.alpha, params.n, params.p))
    return CylinderFunction(g.grid, tuple(modes)), hatted
