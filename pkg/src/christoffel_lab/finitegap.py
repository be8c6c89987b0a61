"""Comb mapping, Martin function and Martin measure of finite-gap sets.

A finite-gap set E = [b0, inf) minus g open gaps (a_j, b_j) carries a
conformal map tau of the upper half plane onto a slit quarter-plane comb.
Its derivative is an explicit algebraic differential

    tau'(z) = (1/2) prod_j (z - c_j) / [sqrt(z - b0) prod_j sqrt((z - a_j)(z - b_j))]

with principal square roots, which is positive on band interiors, makes
tau real there, and normalizes tau(z) ~ sqrt(z) at -infinity with the
upper-half-plane branch. The critical points c_j in each gap are fixed by
equal values of tau at the two gap edges. The Martin function of the
complement is M = Im tau, and the Martin measure density on bands is
f = tau'/pi.

Real-axis values are limits from the upper half plane: crossing a branch
point multiplies the root product by i, so on a segment with k branch
points strictly to the right the product equals i^k times the positive
root of |R|. Endpoint inverse-square-root singularities are removed by the
substitution u = edge +/- t^2 before Gauss panels are applied.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import BandDomainError, ConfigError, GapSolveError
from .quadrature import gauss_legendre, geometric_panels, split_panels

_ORDER = 32


@dataclass(frozen=True)
class FiniteGapSet:
    """E = [b0, inf) minus gaps (a_j, b_j); `critical` holds the solved
    comb critical points, one per gap, empty until solved."""

    b0: float
    gaps: tuple = ()
    critical: tuple = ()

    def __post_init__(self):
        prev = self.b0
        for j, (a, b) in enumerate(self.gaps):
            if not (prev < a < b):
                raise ConfigError(
                    f"gap {j} = ({a:.6g}, {b:.6g}) violates strict interlacing "
                    f"after {prev:.6g}")
            prev = b

    @property
    def g(self) -> int:
        return len(self.gaps)

    @property
    def solved(self) -> bool:
        return self.g == 0 or len(self.critical) == self.g

    def branch_points(self) -> np.ndarray:
        pts = [self.b0]
        for a, b in self.gaps:
            pts.extend((a, b))
        return np.asarray(pts)

    def bands(self):
        """Bands as (lo, hi) pairs; the last band has hi = inf."""
        out = []
        lo = self.b0
        for a, b in self.gaps:
            out.append((lo, a))
            lo = b
        out.append((lo, math.inf))
        return out

    def contains(self, xi: float) -> bool:
        if xi < self.b0:
            return False
        return all(not (a < xi < b) for a, b in self.gaps)

    def in_band_interior(self, xi: float) -> bool:
        return any(lo < xi < hi for lo, hi in self.bands())

    def gap_index(self, xi: float):
        for j, (a, b) in enumerate(self.gaps):
            if a < xi < b:
                return j
        return None


def from_config(cfg) -> FiniteGapSet:
    if not isinstance(cfg, dict) or "b0" not in cfg:
        raise ConfigError("set config must be a mapping with 'b0' and optional 'gaps'")
    gaps = tuple(tuple(float(x) for x in gap) for gap in cfg.get("gaps", ()))
    for j, gap in enumerate(gaps):
        if len(gap) != 2:
            raise ConfigError(f"gap {j} must be a pair [a, b]")
    return FiniteGapSet(b0=float(cfg["b0"]), gaps=gaps)


# ---------------------------------------------------------------------------
# The comb differential


def _root_product_upper(set_: FiniteGapSet, z: complex) -> complex:
    """prod of principal sqrt(z - r) over branch points, analytic on C+."""
    out = 1.0 + 0.0j
    for r in set_.branch_points():
        out *= np.sqrt(complex(z - r))
    return out


def _tau_prime_upper(set_: FiniteGapSet, z: complex) -> complex:
    num = 0.5 + 0.0j
    for c in set_.critical:
        num *= (z - c)
    return num / _root_product_upper(set_, z)


def _tau_prime_real_factory(set_: FiniteGapSet):
    """Vectorized +i0 boundary values of tau' on the real axis.

    Returns a function of a real array evaluating (1/2) prod(x - c) /
    (i^k sqrt|R(x)|) with k the number of branch points above x.
    """
    roots = set_.branch_points()
    crit = np.asarray(set_.critical)

    def tau_prime(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        mag = np.ones_like(x)
        k = np.zeros(x.shape, dtype=int)
        for r in roots:
            mag *= np.sqrt(np.abs(x - r))
            k += (x < r)
        num = np.full(x.shape, 0.5)
        for c in crit:
            num = num * (x - c)
        phase = (-1.0j) ** (k % 4)
        return num * phase / mag

    return tau_prime


def tau_prime(set_: FiniteGapSet, z) -> complex:
    """Comb map derivative at z (upper half plane or real +i0 limit)."""
    _require_solved(set_)
    z = complex(z)
    if z.imag > 0:
        return _tau_prime_upper(set_, z)
    if z.imag < 0:
        raise ValueError("tau' is evaluated on C+ or on R as a limit from C+")
    return complex(_tau_prime_real_factory(set_)(z.real)[0])


def _require_solved(set_: FiniteGapSet):
    if not set_.solved:
        raise GapSolveError("critical points not solved for this set",
                            residuals=None)


def _segment_integral(fun, lo, hi, sing_lo, sing_hi, max_len=0.5):
    """Integral of `fun` (vectorized, complex) over [lo, hi] where inverse
    square-root singularities may sit at either end; removed by u = edge
    +/- t^2 before composite Gauss panels."""
    if hi <= lo:
        return 0.0 + 0.0j
    if sing_lo and sing_hi:
        mid = 0.5 * (lo + hi)
        return (_segment_integral(fun, lo, mid, True, False, max_len)
                + _segment_integral(fun, mid, hi, False, True, max_len))
    x, w = gauss_legendre(_ORDER)
    if sing_lo or sing_hi:
        T = math.sqrt(hi - lo)
        edges = split_panels(0.0, T, max(max_len, T / 64.0))
        halves = 0.5 * np.diff(edges)
        mids = 0.5 * (edges[:-1] + edges[1:])
        t = (mids[:, None] + halves[:, None] * x[None, :]).ravel()
        wt = (halves[:, None] * w[None, :]).ravel()
        if sing_lo:
            u = lo + t * t
        else:
            u = hi - t * t
        vals = fun(u) * (2.0 * t)
        return np.sum(vals * wt)
    edges = split_panels(lo, hi, max_len)
    halves = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    u = (mids[:, None] + halves[:, None] * x[None, :]).ravel()
    wt = (halves[:, None] * w[None, :]).ravel()
    return np.sum(fun(u) * wt)


def _real_axis_tau(set_: FiniteGapSet, xi: float) -> complex:
    """tau(xi) integrated along the real axis from b0 (as a +i0 limit)."""
    fun = _tau_prime_real_factory(set_)
    roots = list(set_.branch_points())
    b0 = set_.b0
    if xi == b0:
        return 0.0 + 0.0j
    if xi > b0:
        cuts = sorted({b0, xi} | {r for r in roots if b0 < r < xi})
        total = 0.0 + 0.0j
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            total += _segment_integral(fun, lo, hi, lo in roots, hi in roots)
        return total
    # xi < b0: far-field leg with u = b0 - t^2, geometric panels
    T = math.sqrt(b0 - xi)
    x, w = gauss_legendre(_ORDER)
    edges = geometric_panels(0.0, T, first=min(1.0, max(T, 1e-3)))
    halves = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    t = (mids[:, None] + halves[:, None] * x[None, :]).ravel()
    wt = (halves[:, None] * w[None, :]).ravel()
    u = b0 - t * t
    vals = fun(u) * (-2.0 * t)
    return np.sum(vals * wt)


def comb_map(set_: FiniteGapSet, z) -> complex:
    """tau(z) for z in the closed upper half plane (lower half by
    reflection tau(conj z) = conj(tau(z))).

    Path: along the real axis from b0 (values are +i0 limits), then
    vertically; the vertical leg uses t = s^2 near the axis so a start
    point at a branch point stays integrable.
    """
    _require_solved(set_)
    z = complex(z)
    if z.imag < 0:
        return np.conj(comb_map(set_, np.conj(z)))
    base = _real_axis_tau(set_, z.real)
    if z.imag == 0:
        return base
    y = z.imag
    x0 = z.real
    S = math.sqrt(y)
    x, w = gauss_legendre(_ORDER)
    edges = split_panels(0.0, S, 0.5)
    halves = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    s = (mids[:, None] + halves[:, None] * x[None, :]).ravel()
    wt = (halves[:, None] * w[None, :]).ravel()
    vals = np.array([_tau_prime_upper(set_, complex(x0, t)) for t in s * s])
    leg = np.sum(vals * (2.0j * s) * wt)
    return base + leg


# ---------------------------------------------------------------------------
# Critical points


def _gap_condition(set_: FiniteGapSet, j: int, critical: np.ndarray) -> float:
    """Signed gap integral whose root in c_j enforces equal tau values at
    the gap edges. The i^k phase is constant on the gap, so only the real
    profile matters."""
    a, b = set_.gaps[j]
    roots = set_.branch_points()

    def fun(u):
        mag = np.ones_like(u)
        for r in roots:
            mag = mag * np.sqrt(np.abs(u - r))
        num = np.ones_like(u)
        for c in critical:
            num = num * (u - c)
        return num / mag

    val = _segment_integral(fun, a, b, True, True)
    return float(np.real(val))


def solve_critical_points(set_: FiniteGapSet, tol: float = 1e-12) -> FiniteGapSet:
    """Solve tau(b_j) = tau(a_j) for the critical points, one per gap.

    Each gap condition is strictly monotone in its own c_j, so a
    coordinatewise bracketed solve (Brent) inside a Gauss-Seidel sweep
    converges; residuals are the gap integrals after the final sweep.
    """
    if set_.g == 0:
        return replace(set_, critical=())
    crit = np.array([0.5 * (a + b) for a, b in set_.gaps])
    eps_rel = 1e-13
    for _ in range(60):
        moved = 0.0
        for j, (a, b) in enumerate(set_.gaps):
            pad = eps_rel * (b - a)

            def f(c):
                trial = crit.copy()
                trial[j] = c
                return _gap_condition(set_, j, trial)

            lo, hi = a + pad, b - pad
            flo, fhi = f(lo), f(hi)
            if flo == 0.0:
                c_new = lo
            elif fhi == 0.0:
                c_new = hi
            elif flo * fhi > 0:
                raise GapSolveError("gap condition does not change sign",
                                    residuals=[flo, fhi])
            else:
                c_new = brentq(f, lo, hi, xtol=1e-15, rtol=8.881784197001252e-16)
            moved = max(moved, abs(c_new - crit[j]))
            crit[j] = c_new
        if moved < 1e-14 * (1.0 + np.max(np.abs(crit))):
            break
    solved = replace(set_, critical=tuple(float(c) for c in crit))
    residuals = [abs(comb_map(solved, b) - comb_map(solved, a))
                 for a, b in set_.gaps]
    if max(residuals) > tol:
        raise GapSolveError("critical point solve did not reach tolerance",
                            residuals=residuals)
    return solved


# ---------------------------------------------------------------------------
# Martin function, density, asymptotics


def martin_density(set_: FiniteGapSet, xi: float) -> float:
    """Martin measure density f(xi) = tau'(xi)/pi on a band interior."""
    _require_solved(set_)
    if not set_.in_band_interior(xi):
        raise BandDomainError(f"xi = {xi:.6g} is not inside a band of the set")
    val = tau_prime(set_, xi)
    f = float(np.real(val)) / math.pi
    if f <= 0.0 or abs(np.imag(val)) > 1e-9 * abs(val):
        raise BandDomainError(
            f"density not positive-real at xi = {xi:.6g}: tau' = {val:.6g}")
    return f


def martin_function(set_: FiniteGapSet, z) -> float:
    """Martin function M(z) = Im tau(z), extended by reflection, zero on E."""
    _require_solved(set_)
    z = complex(z)
    if z.imag == 0 and set_.contains(z.real):
        return 0.0
    return max(float(np.imag(comb_map(set_, complex(z.real, abs(z.imag))))), 0.0)


def martin_measure_interval(set_: FiniteGapSet, lo: float, hi: float) -> float:
    """rho_E([lo, hi]) = int of the density over the bands inside [lo, hi]."""
    _require_solved(set_)
    fun = _tau_prime_real_factory(set_)
    roots = set(set_.branch_points())
    total = 0.0
    for blo, bhi in set_.bands():
        a = max(lo, blo)
        b = min(hi, bhi)
        if b <= a:
            continue
        val = _segment_integral(lambda u: np.real(fun(u)), a, b,
                                a in roots, b in roots)
        total += float(np.real(val)) / math.pi
    return total


def asymptotic_a(set_: FiniteGapSet, radii=(1e4, 1e5, 1e6)) -> tuple[float, float]:
    """Constant a_E in M(-R) = sqrt(R) + a_E/(2 sqrt(R)) + O(R^{-3/2}),
    fitted with Richardson extrapolation over the radius ladder.

    Returns (a_E, residual); warns when the fit residual is large.
    """
    _require_solved(set_)
    radii = sorted(radii)
    raw = []
    for R in radii:
        M = martin_function(set_, complex(-R, 0.0))
        raw.append(2.0 * math.sqrt(R) * (M - math.sqrt(R)))
    # a(R) = a + alpha/R + O(R^-2); eliminate the 1/R term pairwise
    extr = []
    for a1, a2, r1, r2 in zip(raw[:-1], raw[1:], radii[:-1], radii[1:]):
        extr.append((r2 * a2 - r1 * a1) / (r2 - r1))
    a = extr[-1]
    residual = abs(extr[-1] - extr[0]) if len(extr) > 1 else abs(a - raw[-1])
    if residual > 1e-3 * (1.0 + abs(a)):
        warnings.warn(f"a_E fit residual {residual:.3e} is large", stacklevel=2)
    return float(a), float(residual)


@dataclass(frozen=True)
class MartinData:
    """A solved set together with its fitted asymptotic constant."""

    set: FiniteGapSet
    a: float
    normalization_residual: float


def martin_data(set_: FiniteGapSet) -> MartinData:
    solved = set_ if set_.solved else solve_critical_points(set_)
    a, res = asymptotic_a(solved)
    return MartinData(set=solved, a=a, normalization_residual=res)


def delta_extension(set_or_bands, delta: float) -> FiniteGapSet:
    """Open delta-neighborhood of the set united with [1/delta, inf),
    returned as the finite-gap hull (overlapping bands merged)."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if isinstance(set_or_bands, FiniteGapSet):
        bands = set_or_bands.bands()
    else:
        bands = [tuple(b) for b in set_or_bands]
    fat = [(lo - delta, hi + delta if math.isfinite(hi) else math.inf)
           for lo, hi in bands]
    fat.append((1.0 / delta, math.inf))
    fat.sort(key=lambda p: p[0])
    merged = [list(fat[0])]
    for lo, hi in fat[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    b0 = merged[0][0]
    gaps = tuple((merged[i][1], merged[i + 1][0]) for i in range(len(merged) - 1))
    return FiniteGapSet(b0=b0, gaps=gaps)
