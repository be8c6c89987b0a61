"""Desk-scale verification experiments: Christoffel asymptotics, sinc
universality of the rescaled kernel, clock spacing of truncation
eigenvalues, and counting-measure comparisons.

Eigenvalues of the length-L Neumann truncation are the zeros of
v'(L, .); they are located through the phase of the solution vector
(v, v') at x = L, which increases strictly with the spectral parameter,
so a monotone scan plus bisection cannot miss or double-count a zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, ode
from .errors import IntegrationFailure
from .potentials import Potential

_PHASE_STEP = 1.2  # max phase advance per substep, safely below pi/2


def _phase_substeps(potential: Potential, L: float, xi_lo: float, xi_hi: float):
    """Cells of [0, L] with substep counts keeping the per-step phase
    advance below _PHASE_STEP for every xi in [xi_lo, xi_hi].

    The phase rate is bounded by max(1, |xi - V|) on a constant cell.
    """
    out = []
    for x0, x1, d in potential.cells(0.0, L):
        rate = max(1.0, abs(xi_hi - d), abs(xi_lo - d))
        h = _PHASE_STEP / rate
        n = max(1, int(math.ceil((x1 - x0) / h)))
        out.append((x0, x1, d, n))
    return out


def neumann_phase(potential: Potential, L: float, xis) -> np.ndarray:
    """Lifted phase theta(L, xi) of (v, v') at x = L, vectorized over xi.

    theta(0) = pi/2 (Neumann data), v = r sin(theta), v' = r cos(theta);
    zeros of v' are crossings of pi/2 + k pi, zeros of v crossings of k pi.
    Strictly increasing in xi at fixed L.
    """
    xis = np.atleast_1d(np.asarray(xis, dtype=float))
    if not potential.piecewise:
        raise NotImplementedError("phase scan requires a cell decomposition")
    plan = _phase_substeps(potential, L, float(np.min(xis)), float(np.max(xis)))
    v = np.ones_like(xis)
    dv = np.zeros_like(xis)
    theta = np.full_like(xis, 0.5 * math.pi)
    two_pi = 2.0 * math.pi
    for x0, x1, d, n in plan:
        h = (x1 - x0) / n
        s2 = xis - d
        sa = np.sqrt(np.abs(s2))
        w = sa * h
        pos = s2 >= 0
        c = np.where(pos, np.cos(np.where(pos, w, 0.0)),
                     np.cosh(np.where(pos, 0.0, w)))
        tiny = w < 1e-8
        sc = np.empty_like(w)
        m = ~tiny & pos
        sc[m] = np.sin(w[m]) / sa[m]
        m = ~tiny & ~pos
        sc[m] = np.sinh(w[m]) / sa[m]
        sc[tiny] = h
        for _ in range(n):
            v, dv = c * v + sc * dv, -s2 * sc * v + c * dv
            norm = np.maximum(np.abs(v), np.abs(dv))
            np.maximum(norm, 1e-300, out=norm)
            v /= norm
            dv /= norm
            phi = np.arctan2(v, dv)
            delta = np.mod(phi - theta + math.pi, two_pi) - math.pi
            theta = theta + delta
    return theta


def _scan_roots(potential, L, lo, hi, offset, rtol):
    """Spectral parameters in [lo, hi] where theta(L, .) crosses
    offset + k pi, by monotone scan and vector bisection."""
    dtheta_dxi = L / (2.0 * math.sqrt(max(min(abs(lo), abs(hi)), 1e-6))) + 2.0
    n = max(8, int(math.ceil((hi - lo) * dtheta_dxi / 2.5)))
    while True:
        grid = np.linspace(lo, hi, n + 1)
        theta = neumann_phase(potential, L, grid)
        jumps = np.diff(theta)
        if np.any(jumps < -1e-9):
            raise IntegrationFailure("phase not monotone on scan grid", lo)
        if float(np.max(jumps, initial=0.0)) < math.pi:
            break
        n *= 2  # automatic refinement when a step could hide a zero
    lo_b, hi_b, targets = [], [], []
    for i in range(n):
        k_lo = math.floor((theta[i] - offset) / math.pi) + 1
        k_hi = math.floor((theta[i + 1] - offset) / math.pi)
        for k in range(k_lo, k_hi + 1):
            lo_b.append(grid[i])
            hi_b.append(grid[i + 1])
            targets.append(offset + k * math.pi)
    if not lo_b:
        return np.array([])
    lo_a = np.asarray(lo_b)
    hi_a = np.asarray(hi_b)
    tg = np.asarray(targets)
    for _ in range(200):
        mid = 0.5 * (lo_a + hi_a)
        below = neumann_phase(potential, L, mid) < tg
        lo_a = np.where(below, mid, lo_a)
        hi_a = np.where(below, hi_a, mid)
        if np.all(hi_a - lo_a <= rtol * (1.0 + np.abs(hi_a))):
            break
    return np.sort(0.5 * (lo_a + hi_a))


@dataclass(frozen=True)
class SpectrumSlice:
    """Neumann-truncation eigenvalues in a window with their spectral-measure
    weights 1/||v||^2."""

    L: float
    window: tuple
    eigenvalues: np.ndarray
    weights: np.ndarray

    def counting_measure(self, lo: float, hi: float) -> float:
        """nu_L mass of [lo, hi): eigenvalue count divided by L."""
        return float(np.count_nonzero(
            (self.eigenvalues >= lo) & (self.eigenvalues < hi))) / self.L


def truncation_spectrum(potential: Potential, L: float, window,
                        rtol: float = 1e-12) -> SpectrumSlice:
    """All zeros of v'(L, .) in the window, by monotone phase scan plus
    bisection; weights are the reciprocal diagonal kernel values."""
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must be a nonempty interval")
    eigs = _scan_roots(potential, L, lo, hi, 0.5 * math.pi, rtol)
    weights = np.array([1.0 / kernels.kernel_diagonal(potential, L, e)
                        for e in eigs])
    return SpectrumSlice(L=L, window=(lo, hi), eigenvalues=eigs, weights=weights)


def dirichlet_zeros(potential: Potential, L: float, window,
                    rtol: float = 1e-12) -> np.ndarray:
    """Zeros of v(L, .) in the window (phase crossings of k pi); these
    interlace with the Neumann eigenvalues."""
    lo, hi = float(window[0]), float(window[1])
    return _scan_roots(potential, L, lo, hi, 0.0, rtol)


def index_from(slice_: SpectrumSlice, xi: float) -> int:
    """Index of the first eigenvalue >= xi (the j = 0 eigenvalue when
    counting from xi; ties at xi itself belong to j = 0)."""
    return int(np.searchsorted(slice_.eigenvalues, xi, side="left"))


def clock_spacing_check(potential: Potential, L: float, xi: float,
                        j_range, f_density, slice_: SpectrumSlice | None = None,
                        density_at: str = "left"):
    """Normalized spacings L f (xi_{j+1} - xi_j) for j in j_range, counting
    eigenvalues from xi (xi_0 is the first one >= xi).

    `f_density` is a callable density oracle. With density_at = "left" the
    density is evaluated at the pair's left eigenvalue, which removes the
    O(1/L) drift of the density across the pair and isolates root-finding
    accuracy; "xi" evaluates at the fixed reference point.
    """
    if density_at not in ("left", "xi"):
        raise ValueError("density_at must be 'left' or 'xi'")
    j_lo, j_hi = int(min(j_range)), int(max(j_range))
    if slice_ is None:
        spacing_scale = 2.0 * math.pi * math.sqrt(max(xi, 0.25)) / L
        pad = (max(abs(j_lo), abs(j_hi)) + 4) * spacing_scale
        slice_ = truncation_spectrum(potential, L, (max(xi - pad, -1.0 / L), xi + pad))
    eigs = slice_.eigenvalues
    i0 = index_from(slice_, xi)
    out = []
    for j in range(j_lo, j_hi + 1):
        il, ir = i0 + j, i0 + j + 1
        if il < 0 or ir >= len(eigs):
            raise ValueError(f"window does not cover pair j = {j}; enlarge it")
        left, right = eigs[il], eigs[ir]
        anchor = left if density_at == "left" else xi
        out.append({"j": j, "xi_left": float(left), "xi_right": float(right),
                    "spacing": L * float(f_density(anchor)) * (right - left)})
    return out


@dataclass(frozen=True)
class UniversalityGrid:
    """Rescaled kernel ratio against the sinc reference on a (z, w) grid."""

    xi: float
    L: float
    z_grid: np.ndarray
    w_grid: np.ndarray
    ratio: np.ndarray
    sinc_ref: np.ndarray

    @property
    def sup_deviation(self) -> float:
        return float(np.max(np.abs(self.ratio - self.sinc_ref)))


def _sinc(t: np.ndarray) -> np.ndarray:
    out = np.ones_like(t, dtype=complex)
    big = np.abs(t) > 1e-10
    out[big] = np.sin(t[big]) / t[big]
    return out


def universality_grid(potential: Potential, L: float, xi: float,
                      halfwidth: float, n: int, f_density,
                      tol: float = 1e-10) -> UniversalityGrid:
    """Ratio K_L(xi + z/L, xi + w/L)/K_L(xi, xi) on an n x n real grid
    |z|, |w| <= halfwidth, against sin(pi f (z - w))/(pi f (z - w)).

    Off-diagonal entries use the boundary formula (one frame per distinct
    spectral parameter); diagonal entries use the variational route, so the
    (0, 0) entry is the same float divided by itself, exactly 1.
    """
    if n < 3:
        raise ValueError("need n >= 3 grid points per axis")
    grid = np.linspace(-halfwidth, halfwidth, n)
    f = float(f_density(xi))
    params = xi + grid / L
    frames = [ode.integrate_frame_dz(potential, a, L, tol=tol) for a in params]
    diag = [fr.dv * dfr.vz - fr.v * dfr.dvz for fr, dfr in frames]
    if n % 2 == 1:
        k0 = complex(diag[n // 2]).real
    else:
        k0 = kernels.kernel_diagonal(potential, L, xi, tol=tol)
    ratio = np.empty((n, n), dtype=complex)
    for i, a in enumerate(params):
        fa, _ = frames[i]
        for j, b in enumerate(params):
            if i == j:
                val = diag[i]
            else:
                fb, _ = frames[j]
                val = (fb.v * fa.dv - fb.dv * fa.v) / (b - a)
            # python complex division keeps the origin entry exactly 1
            ratio[i, j] = complex(val) / k0
    zz = grid[:, None] - grid[None, :]
    sinc_ref = _sinc(math.pi * f * zz.astype(complex))
    return UniversalityGrid(xi=xi, L=L, z_grid=grid.astype(complex),
                            w_grid=grid.astype(complex), ratio=ratio,
                            sinc_ref=sinc_ref)


def christoffel_sweep(potential: Potential, xi_grid, L_ladder,
                      f_mu, f_density, tol: float = 1e-10):
    """Rows (xi, L, L*lambda_L(xi), reference, deviation) for every grid
    point and ladder rung, reference = f_mu/f_density from the oracles."""
    rows = []
    for L in L_ladder:
        for xi in xi_grid:
            lam = kernels.christoffel(potential, float(L), float(xi), tol=tol)
            ref = float(f_mu(xi)) / float(f_density(xi))
            val = float(L) * lam
            rows.append({"xi": float(xi), "L": float(L), "L_lambda": val,
                         "reference": ref, "deviation": abs(val - ref)})
    return rows


def sweep_sup_deviation(rows) -> dict:
    """Per-L sup of the deviation column (uniformity diagnostic)."""
    out: dict = {}
    for row in rows:
        out[row["L"]] = max(out.get(row["L"], 0.0), row["deviation"])
    return out


def counting_measure_compare(slice_: SpectrumSlice, rho_interval, bins):
    """Rows (bin_lo, bin_hi, nu_L, rho_E, abs_diff) for the bin partition;
    `rho_interval(lo, hi)` integrates the limit density over a bin."""
    lo, hi = slice_.window
    rows = []
    for blo, bhi in bins:
        if blo < lo - 1e-12 or bhi > hi + 1e-12:
            raise ValueError("bins must lie inside the slice window")
        nu = slice_.counting_measure(blo, bhi)
        rho = float(rho_interval(blo, bhi))
        rows.append({"bin_lo": float(blo), "bin_hi": float(bhi),
                     "nu_L": nu, "rho_E": rho, "abs_diff": abs(nu - rho)})
    return rows


def uniform_bins(lo: float, hi: float, n: int):
    edges = np.linspace(lo, hi, n + 1)
    return list(zip(edges[:-1], edges[1:]))
