"""Weyl disks, m-functions and boundary spectral densities.

For Im z > 0 the transfer matrix maps the closed upper half plane to a
nested family of disks whose intersection is the single point m(z). The
disk at length x is computed in closed form from the Hermitian form
-i T* j T; for periodic potentials the Floquet (monodromy) route provides
an independent construction of m. Boundary densities on the absolutely
continuous spectrum come from Im m(xi + i eps) extrapolated down the
eps ladder.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import ode
from .errors import WeylConvergenceError
from .finitegap import FiniteGapSet
from .potentials import Potential

_J = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)

#: doubling schedule cap for the disk shrink
X_CAP = 1e4


@dataclass(frozen=True)
class WeylDisk:
    """Image of the closed upper half plane under the inverse transfer
    action: every candidate m(z) lies inside."""

    x: float
    z: complex
    center: complex
    radius: float


def weyl_disk(potential: Potential, z, x: float, tol: float = 1e-10) -> WeylDisk:
    """Disk at length x for Im z > 0.

    With W = -i T* j T the disk is {w : W11 |w|^2 + 2 Re(W21 w) + W22 >= 0};
    W11 = -2 Im z int_0^x |v|^2 < 0, center -conj(W21)/W11, radius 1/|W11|
    because det W = -1.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("Weyl disks live over Im z > 0")
    if x <= 0:
        raise ValueError("x must be positive")
    T = ode.integrate_frame(potential, z, x, tol=tol).transfer_matrix()
    W = -1j * (T.conj().T @ _J @ T)
    A = W[0, 0].real
    if A >= 0:
        raise WeylConvergenceError("degenerate disk (half plane) at this length",
                                   achieved_radius=math.inf)
    center = -np.conj(W[1, 0]) / A
    # det W = -1 exactly, so the discriminant below equals 1 up to roundoff
    radius = math.sqrt(max(abs(W[1, 0]) ** 2 - A * W[1, 1].real, 0.0)) / abs(A)
    return WeylDisk(x=x, z=z, center=complex(center), radius=float(radius))


def m_function(potential: Potential, z, tol: float = 1e-8,
               x0: float = 10.0, tol_integration: float = 1e-10):
    """Weyl m-function as the center of the first disk with radius <= tol,
    doubling x from x0 up to the cap; raises when the radius plateaus."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("m is defined on C+ only; no evaluation below R")
    x = x0
    best = None
    while x <= X_CAP:
        disk = weyl_disk(potential, z, x, tol=tol_integration)
        best = disk
        if disk.radius <= tol:
            return disk.center
        x *= 2.0
    raise WeylConvergenceError(
        f"disk radius did not reach {tol:.3e} by x = {X_CAP:.0e}",
        achieved_radius=best.radius)


def m_function_disk(potential: Potential, z, tol: float = 1e-8,
                    x0: float = 10.0, tol_integration: float = 1e-10) -> WeylDisk:
    """Like m_function but returns the final disk instead of raising, so
    callers can judge the achieved enclosure."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("m is defined on C+ only; no evaluation below R")
    x = x0
    disk = None
    while x <= X_CAP:
        disk = weyl_disk(potential, z, x, tol=tol_integration)
        if disk.radius <= tol:
            return disk
        x *= 2.0
    return disk


@dataclass(frozen=True)
class SpectralDensity:
    """Boundary density f(xi) = Im m(xi + i0)/pi with the extrapolation
    residual of the eps ladder."""

    xi: float
    f_mu: float
    extrapolation_residual: float
    oscillatory: bool = False


DEFAULT_EPS_LADDER = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)


def spectral_density(potential: Potential, xi: float,
                     eps_ladder=DEFAULT_EPS_LADDER,
                     band_edges=(), edge_exclusion: float = 1e-3) -> SpectralDensity:
    """Density by two-point Richardson extrapolation of Im m(xi + i eps)/pi.

    Ladder rungs whose Weyl disk cannot shrink below 1e-3 * eps within the
    x cap are dropped (the enclosure would dominate the extrapolation);
    a non-monotone usable ladder is flagged as oscillatory.
    """
    for edge in band_edges:
        if abs(xi - edge) < edge_exclusion:
            raise ValueError(
                f"xi = {xi:.6g} is within {edge_exclusion:g} of band edge {edge:.6g}")
    rungs = []
    for eps in sorted(eps_ladder, reverse=True):
        disk = m_function_disk(potential, complex(xi, eps), tol=1e-10)
        if disk is None or disk.radius > 1e-3 * eps:
            continue
        rungs.append((eps, disk.center.imag / math.pi, disk.radius / math.pi))
    if len(rungs) < 2:
        raise WeylConvergenceError(
            "fewer than two usable ladder rungs for density extrapolation",
            achieved_radius=math.nan)
    values = [f for _, f, _ in rungs]
    diffs = np.diff(values)
    oscillatory = bool(np.any(diffs[:-1] * diffs[1:] < 0)) if len(diffs) > 1 else False
    if oscillatory:
        warnings.warn(f"non-monotone density ladder at xi = {xi:.6g} "
                      "(possible singular part or band edge)", stacklevel=2)
    (e1, f1, r1), (e2, f2, r2) = rungs[-2], rungs[-1]
    f = f2 + (f2 - f1) * e2 / (e1 - e2)
    residual = abs(f - f2) + (r1 + r2)
    return SpectralDensity(xi=float(xi), f_mu=float(f),
                           extrapolation_residual=float(residual),
                           oscillatory=oscillatory)


# ---------------------------------------------------------------------------
# Floquet route for periodic potentials


def monodromy(potential: Potential, period: float, z, tol: float = 1e-10):
    """Propagator over one period, [[v, u], [v', u']](period)."""
    return ode.integrate_frame(potential, z, period, tol=tol).propagator()


def discriminant(potential: Potential, period: float, z, tol: float = 1e-10):
    """Floquet discriminant tr of the period propagator."""
    M = monodromy(potential, period, z, tol=tol)
    return M[0, 0] + M[1, 1]


def floquet_m(potential: Potential, period: float, z, tol: float = 1e-10) -> complex:
    """m(z) from the decaying Floquet solution: the monodromy eigenvector
    with multiplier inside the unit circle gives (psi(0), psi'(0))."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("Floquet m is evaluated on C+")
    M = monodromy(potential, period, z, tol=tol)
    lam, vecs = np.linalg.eig(M)
    k = int(np.argmin(np.abs(lam)))
    if abs(lam[k]) >= 1.0 - 1e-12:
        raise WeylConvergenceError("no strictly decaying Floquet multiplier",
                                   achieved_radius=math.nan)
    psi0, dpsi0 = vecs[0, k], vecs[1, k]
    return complex(-psi0 / dpsi0)


def floquet_bands(potential: Potential, period: float, window,
                  n_gaps: int, scan_points: int = 2000,
                  tol: float = 1e-10) -> FiniteGapSet:
    """Finite-gap approximation of the periodic spectrum: bands are where
    |discriminant| <= 2; edges located by bisection on |D|^2 - 4; only the
    first n_gaps gaps are kept open, later ones are closed."""
    lo, hi = float(window[0]), float(window[1])

    def gfun(xi):
        d = discriminant(potential, period, complex(xi, 0.0), tol=tol)
        return float(np.real(d)) ** 2 - 4.0

    xs = np.linspace(lo, hi, scan_points)
    gs = np.array([gfun(x) for x in xs])
    if gs[0] <= 0:
        warnings.warn("window starts inside the spectrum; lowest band edge "
                      "may be missing", stacklevel=2)
    edges = []
    for x0, x1, g0, g1 in zip(xs[:-1], xs[1:], gs[:-1], gs[1:]):
        if g0 == 0.0:
            edges.append(x0)
            continue
        if g0 * g1 < 0:
            a, b, fa = x0, x1, g0
            for _ in range(200):
                mid = 0.5 * (a + b)
                fm = gfun(mid)
                if fa * fm <= 0:
                    b = mid
                else:
                    a, fa = mid, fm
                if b - a < 1e-13 * (1.0 + abs(b)):
                    break
            edges.append(0.5 * (a + b))
    if not edges:
        if gs[0] > 0:
            warnings.warn("no band found in window", stacklevel=2)
            return FiniteGapSet(b0=hi)
        return FiniteGapSet(b0=lo)
    b0 = edges[0]
    gaps = []
    # edges alternate band-start / band-end; pair interior (end, start)
    interior = edges[1:]
    if len(interior) % 2 == 1:
        warnings.warn("window ends inside a gap; trailing band edge dropped "
                      "(incomplete set)", stacklevel=2)
    for a, b in zip(interior[0::2], interior[1::2]):
        gaps.append((a, b))
    gaps = gaps[:n_gaps]
    return FiniteGapSet(b0=b0, gaps=tuple(gaps))
