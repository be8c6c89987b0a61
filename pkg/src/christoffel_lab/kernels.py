"""Christoffel-Darboux kernel, Christoffel function, and the extremal
function with the universal tan(2u) = 2u constant.

The kernel K_L(z, w) = int_0^L v(x, z) conj(v(x, w)) dx is computed by two
independent routes: direct quadrature of the solution product, and the
boundary (Wronskian quotient) formula that needs a single frame at x = L.
Near the diagonal the quotient loses accuracy, so a variational route based
on the z-derivative of the frame takes over; on the diagonal it is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import ode
from .potentials import Potential
from .quadrature import gauss_legendre, split_panels

_QUAD_ORDER = 24
_QUAD_ORDER_LOW = 16


class KernelMethod(Enum):
    QUADRATURE = "quadrature"
    BOUNDARY = "boundary"
    VARIATIONAL = "variational"


@dataclass(frozen=True)
class KernelEval:
    """K_L(z, w) with provenance and an error estimate."""

    L: float
    z: complex
    w: complex
    value: complex
    method: KernelMethod
    err_estimate: float


def near_diagonal_threshold(L: float) -> float:
    """Switch distance |conj(w) - z| below which the boundary quotient is
    replaced by the variational (midpoint z-derivative) formula.

    The quotient's roundoff error grows like eps/|delta| while the
    variational route's model error grows like (L |delta|)^2, so the switch
    scales with 1/L.
    """
    return 1e-4 / max(1.0, L)


def _panel_edges(potential: Potential, L: float, osc_rate: float) -> np.ndarray:
    """Quadrature panels over [0, L]: refine potential cells to the
    oscillation length of the integrand."""
    max_len = min(1.0, 8.0 / osc_rate) if osc_rate > 0 else 1.0
    if potential.piecewise:
        edges = [0.0]
        for a, b, _ in potential.cells(0.0, L):
            sub = split_panels(a, b, max_len)
            edges.extend(sub[1:])
        return np.asarray(edges)
    return split_panels(0.0, L, max_len)


def _values_on_nodes(potential, z, edges, order, tol):
    """v and u at the Gauss nodes of the panels (nodes grouped per panel)."""
    ref_x, ref_w = gauss_legendre(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo)[:, None] + half[:, None] * ref_x[None, :]).ravel()
    weights = (half[:, None] * ref_w[None, :]).ravel()
    mats = ode.propagators_at(potential, z, nodes, tol=tol)
    v = np.array([T[0, 0] for T, _ in mats])
    u = np.array([T[0, 1] for T, _ in mats])
    return nodes, weights, v, u


def product_quadrature(potential: Potential, L: float, z, w,
                       tol: float = 1e-10, kind: str = "vv"):
    """(integral, err_estimate) of a product of fundamental solutions over
    [0, L]: kind "vv" gives int v(x,z) conj(v(x,w)) dx, "uu", "vu", "uv"
    similarly mix in the Dirichlet solution."""
    sz, sw = ode.branch_sqrt(z), ode.branch_sqrt(w)
    osc = abs(sz) + abs(sw)
    edges = _panel_edges(potential, L, osc)
    results = []
    for order in (_QUAD_ORDER_LOW, _QUAD_ORDER):
        _, wts, vz, uz = _values_on_nodes(potential, z, edges, order, tol)
        _, _, vw, uw = _values_on_nodes(potential, w, edges, order, tol)
        left = vz if kind[0] == "v" else uz
        right = vw if kind[1] == "v" else uw
        results.append(np.sum(wts * left * np.conj(right)))
    err = abs(results[1] - results[0])
    value = results[1]
    if err > tol * (1.0 + abs(value)):
        # halve panel lengths once and re-estimate
        edges = np.sort(np.concatenate([edges, 0.5 * (edges[:-1] + edges[1:])]))
        _, wts, vz, uz = _values_on_nodes(potential, z, edges, _QUAD_ORDER, tol)
        _, _, vw, uw = _values_on_nodes(potential, w, edges, _QUAD_ORDER, tol)
        left = vz if kind[0] == "v" else uz
        right = vw if kind[1] == "v" else uw
        refined = np.sum(wts * left * np.conj(right))
        err = abs(refined - value)
        value = refined
    return value, float(err)


def kernel_quadrature(potential: Potential, L: float, z, w,
                      tol: float = 1e-10) -> KernelEval:
    """K_L(z, w) by direct quadrature of v(x, z) conj(v(x, w))."""
    if L <= 0:
        raise ValueError("L must be positive")
    value, err = product_quadrature(potential, L, z, w, tol=tol, kind="vv")
    return KernelEval(L=L, z=complex(z), w=complex(w), value=complex(value),
                      method=KernelMethod.QUADRATURE, err_estimate=err)


def _variational_value(potential, L, m, tol):
    """K at spectral parameter m from the z-derivative of the frame:
    v'(L) d_z v(L) - v(L) d_z v'(L)."""
    frame, dframe = ode.integrate_frame_dz(potential, m, L, tol=tol)
    return frame.dv * dframe.vz - frame.v * dframe.dvz


def kernel_boundary(potential: Potential, L: float, z, w,
                    tol: float = 1e-10) -> KernelEval:
    """K_L(z, w) from a single frame at x = L via the Wronskian quotient
    [conj(v(L,w)) v'(L,z) - conj(v'(L,w)) v(L,z)] / (conj(w) - z).

    Below the near-diagonal threshold the variational formula at the
    midpoint (z + conj(w))/2 is used instead.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    z = complex(z)
    w = complex(w)
    delta = np.conj(w) - z
    if abs(delta) < near_diagonal_threshold(L):
        m = 0.5 * (z + np.conj(w))
        value = _variational_value(potential, L, m, tol)
        err = abs(value) * (L * abs(delta)) ** 2
        return KernelEval(L=L, z=z, w=w, value=complex(value),
                          method=KernelMethod.VARIATIONAL, err_estimate=float(err))
    fz = ode.integrate_frame(potential, z, L, tol=tol)
    fw = ode.integrate_frame(potential, w, L, tol=tol)
    num = np.conj(fw.v) * fz.dv - np.conj(fw.dv) * fz.v
    value = num / delta
    # roundoff model: cancellation in the numerator over |delta|
    err = 1e-15 * (abs(fw.v * fz.dv) + abs(fw.dv * fz.v)) / abs(delta)
    return KernelEval(L=L, z=z, w=w, value=complex(value),
                      method=KernelMethod.BOUNDARY, err_estimate=float(err))


def kernel_diagonal(potential: Potential, L: float, xi: float,
                    tol: float = 1e-10) -> float:
    """K_L(xi, xi) for real xi via the variational route (exact cell
    propagation of the z-derivative system, no quadrature)."""
    value = _variational_value(potential, L, float(xi), tol)
    return float(value.real)


def kernel(potential: Potential, L: float, z, w, tol: float = 1e-10) -> KernelEval:
    """K_L(z, w) by the cheapest reliable route (boundary or variational)."""
    return kernel_boundary(potential, L, z, w, tol=tol)


def christoffel(potential: Potential, L: float, xi: float,
                tol: float = 1e-10) -> float:
    """Christoffel function lambda_L(xi) = 1 / K_L(xi, xi)."""
    if L <= 0:
        raise ValueError("L must be positive")
    return 1.0 / kernel_diagonal(potential, L, xi, tol=tol)


def minimizer_q(potential: Potential, L: float, xi0: float, z,
                tol: float = 1e-10) -> complex:
    """Normalized reproducing kernel Q_L(z, xi0) = K(z, xi0)/K(xi0, xi0);
    Q(xi0) = 1 exactly."""
    if complex(z) == complex(xi0):
        return 1.0 + 0.0j
    num = kernel_boundary(potential, L, z, xi0, tol=tol).value
    den = kernel_diagonal(potential, L, xi0, tol=tol)
    return num / den


# ---------------------------------------------------------------------------
# Extremal function


def _universal_root() -> float:
    """First positive root of tan(2u) = 2u, located by bisection in the
    branch (pi/2, 3pi/4) where tan(2u) - 2u runs from -inf-side to +inf."""
    lo = 0.5 * math.pi + 1e-12
    hi = 0.75 * math.pi - 1e-12
    f = lambda u: math.tan(2 * u) - 2 * u
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


_U0_CACHE: list[float] = []


def universal_u0() -> float:
    """The constant u0 with tan(2 u0) = 2 u0, cached once per process."""
    if not _U0_CACHE:
        _U0_CACHE.append(_universal_root())
    return _U0_CACHE[0]


@dataclass(frozen=True)
class ExtremalFunction:
    """Entire function with unit-height global maximum of modulus at xi0 on
    [d0, inf), of exponential type c = u0/sqrt(xi0 - d0) in sqrt(z - d0)."""

    d0: float
    xi0: float

    def __post_init__(self):
        if self.xi0 <= self.d0:
            raise ValueError("xi0 must exceed d0")

    @property
    def u0(self) -> float:
        return universal_u0()

    @property
    def c(self) -> float:
        return self.u0 / math.sqrt(self.xi0 - self.d0)

    def __call__(self, z) -> complex:
        z_arr = np.asarray(z, dtype=complex)
        zeta = np.asarray(ode.branch_sqrt(z_arr - self.d0))
        zeta0 = math.sqrt(self.xi0 - self.d0)
        c = self.c
        out = _sinq(c, zeta - zeta0) + _sinq(c, zeta + zeta0)
        return complex(out[0]) if z_arr.ndim == 0 else out


def _sinq(c, t):
    """sin(c t)/t with the removable singularity filled in."""
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    out = np.empty_like(t)
    small = np.abs(t) < 1e-8
    out[small] = c * (1.0 - (c * t[small]) ** 2 / 6.0)
    out[~small] = np.sin(c * t[~small]) / t[~small]
    return out


def extremal_function(d0: float, xi0: float, z) -> complex:
    """Value of the extremal function F_c at z (c = u0/sqrt(xi0 - d0))."""
    f = ExtremalFunction(d0=d0, xi0=xi0)
    return complex(f(z))
