"""Fundamental solutions of -y'' + V y = z y on the half line.

The frame carries the Neumann solution v (v(0) = 1, v'(0) = 0) and the
Dirichlet solution u (u(0) = 0, u'(0) = 1) together with x-derivatives.
Piecewise-constant potentials propagate through exact 2x2 cell matrices
built from cos and sinc of sqrt(z - value); smooth potentials integrate the
first-order system with an adaptive Runge-Kutta scheme. The truncated
iterated-integral series around the free solution serves as an independent
oracle for the propagated values, with an explicit factorial tail bound.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationFailure
from .potentials import Potential
from .quadrature import gauss_legendre, progressive_weights

#: series switch for sinc-type entries; below this |sqrt(z) h| the closed
#: form loses digits to cancellation
_SMALL = 1e-4

DEFAULT_TOL = 1e-10


def branch_sqrt(z):
    """sqrt with Im sqrt(z) >= 0 (upper-half-plane branch)."""
    s = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(s.imag < 0, -s, s)[()]


def free_cos(x, z):
    """Neumann solution cos(sqrt(z) x) of the free equation."""
    return np.cos(branch_sqrt(z) * np.asarray(x))[()]


def free_sinc(x, z):
    """Dirichlet solution sin(sqrt(z) x)/sqrt(z), entire in z."""
    s = np.asarray(branch_sqrt(z))
    w = s * np.asarray(x)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    xs = np.broadcast_to(np.asarray(x, dtype=float), w.shape)
    ss = np.broadcast_to(s, w.shape)
    out = np.empty(w.shape, dtype=complex)
    small = np.abs(w) < _SMALL
    w2 = w[small] ** 2
    out[small] = xs[small] * (1.0 - w2 / 6.0 * (1.0 - w2 / 20.0))
    out[~small] = np.sin(w[~small]) / ss[~small]
    return out[0] if scalar else out


@dataclass(frozen=True)
class SolutionFrame:
    """Fundamental system at position x for spectral parameter z."""

    x: float
    z: complex
    v: complex
    dv: complex
    u: complex
    du: complex

    def wronskian(self):
        return self.v * self.du - self.dv * self.u

    def propagator(self):
        """Matrix [[v, u], [dv, du]] mapping (y(0), y'(0)) to (y(x), y'(x))."""
        return np.array([[self.v, self.u], [self.dv, self.du]])

    def transfer_matrix(self):
        """Canonical-system transfer matrix [[v, -u], [-dv, du]]."""
        return np.array([[self.v, -self.u], [-self.dv, self.du]])


@dataclass(frozen=True)
class FrameDerivative:
    """d/dz of the full frame at (x, z)."""

    vz: complex
    dvz: complex
    uz: complex
    duz: complex


def cell_propagator(z, d, h):
    """Exact 2x2 propagator over a cell of length h with V = d.

    With s^2 = z - d the matrix is [[cos(sh), sin(sh)/s], [-s^2 sin(sh)/s,
    cos(sh)]]; all entries are entire in z (even in s) so the sqrt branch is
    immaterial.
    """
    s2 = complex(z) - d
    s = cmath.sqrt(s2)
    w = s * h
    if abs(w) < _SMALL:
        w2 = w * w
        c = 1.0 - w2 / 2.0 * (1.0 - w2 / 12.0)
        sc = h * (1.0 - w2 / 6.0 * (1.0 - w2 / 20.0))
    else:
        c = cmath.cos(w)
        sc = cmath.sin(w) / s
    return np.array([[c, sc], [-s2 * sc, c]])


def cell_propagator_dz(z, d, h):
    """(P, dP/dz) for the exact cell propagator."""
    s2 = complex(z) - d
    s = cmath.sqrt(s2)
    w = s * h
    if abs(w) < 1e-3:
        w2 = w * w
        c = 1.0 - w2 / 2.0 * (1.0 - w2 / 12.0 * (1.0 - w2 / 30.0))
        sc = h * (1.0 - w2 / 6.0 * (1.0 - w2 / 20.0 * (1.0 - w2 / 42.0)))
        # (h c - sc)/(2 s^2), expanded to remove the 0/0 at s = 0
        dsc = (h ** 3) * (-1.0 / 6.0 + w2 / 60.0 - w2 * w2 / 1680.0)
    else:
        c = cmath.cos(w)
        sc = cmath.sin(w) / s
        dsc = (h * c - sc) / (2.0 * s2)
    dc = -0.5 * h * sc
    P = np.array([[c, sc], [-s2 * sc, c]])
    dP = np.array([[dc, dsc], [-0.5 * (sc + h * c), dc]])
    return P, dP


def _subcells(potential: Potential, b: float, extra: tuple = ()):
    """Cells of [0, b] refined so that the listed `extra` positions fall on
    cell boundaries."""
    marks = sorted({float(t) for t in extra if 0.0 < t < b})
    out = []
    for x0, x1, d in potential.cells(0.0, b):
        edges = [x0] + [m for m in marks if x0 < m < x1] + [x1]
        for lo, hi in zip(edges[:-1], edges[1:]):
            out.append((lo, hi, d))
    return out


def _walk_transfer(potential, z, xs, derivative=False):
    """Exact piecewise walk; yields the propagator (and optionally its
    z-derivative) at each requested x (sorted ascending)."""
    T = np.eye(2, dtype=complex)
    D = np.zeros((2, 2), dtype=complex)
    results = []
    x_max = xs[-1]
    cells = _subcells(potential, x_max, extra=tuple(xs))
    idx = 0
    if xs[idx] == 0.0:
        results.append((T.copy(), D.copy()))
        idx += 1
    for x0, x1, d in cells:
        h = x1 - x0
        if derivative:
            P, dP = cell_propagator_dz(z, d, h)
            D = P @ D + dP @ T
        else:
            P = cell_propagator(z, d, h)
        T = P @ T
        while idx < len(xs) and abs(xs[idx] - x1) <= 1e-14 * (1.0 + abs(x1)):
            results.append((T.copy(), D.copy()))
            idx += 1
    if idx != len(xs):
        raise IntegrationFailure("requested positions not aligned with walk", xs[idx])
    return results


def _smooth_rhs(potential, z, derivative):
    if derivative:
        def rhs(x, y):
            q = potential(x) - z
            v, dv, u, du, vz, dvz, uz, duz = y
            return np.array([dv, q * v, du, q * u,
                             dvz, q * vz - v, duz, q * uz - u])
    else:
        def rhs(x, y):
            q = potential(x) - z
            return np.array([y[1], q * y[0], y[3], q * y[2]])
    return rhs


def _solve_smooth(potential, z, xs, tol, derivative=False):
    """Adaptive integration for potentials without a cell decomposition."""
    n = 8 if derivative else 4
    y0 = np.zeros(n, dtype=complex)
    y0[0] = 1.0
    y0[3] = 1.0
    targets = [x for x in xs if x > 0.0]
    sol = solve_ivp(_smooth_rhs(potential, z, derivative), (0.0, xs[-1]), y0,
                    method="DOP853", rtol=tol, atol=tol * 1e-2,
                    t_eval=targets, dense_output=False)
    if not sol.success:
        raise IntegrationFailure(sol.message, sol.t[-1] if sol.t.size else 0.0)
    results = []
    j = 0
    for x in xs:
        if x == 0.0:
            results.append((np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex)))
            continue
        y = sol.y[:, j]
        j += 1
        T = np.array([[y[0], y[2]], [y[1], y[3]]])
        D = np.zeros((2, 2), dtype=complex)
        if derivative:
            D = np.array([[y[4], y[6]], [y[5], y[7]]])
        results.append((T, D))
    return results


def propagators_at(potential: Potential, z, xs, tol: float = DEFAULT_TOL,
                   derivative: bool = False):
    """Propagator matrices [[v, u], [dv, du]] at the sorted positions `xs`,
    optionally with d/dz."""
    xs = [float(x) for x in xs]
    if any(b < a for a, b in zip(xs[:-1], xs[1:])):
        raise ValueError("positions must be sorted ascending")
    if potential.piecewise:
        return _walk_transfer(potential, z, xs, derivative=derivative)
    return _solve_smooth(potential, z, xs, tol, derivative=derivative)


def integrate_frame(potential: Potential, z, x_target: float,
                    tol: float = DEFAULT_TOL) -> SolutionFrame:
    """Frame at x_target with local error control `tol` (exact propagation
    for piecewise-constant descriptions)."""
    if x_target < 0:
        raise ValueError("x_target must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    (T, _), = propagators_at(potential, z, [x_target], tol=tol)
    return SolutionFrame(x=x_target, z=complex(z),
                         v=T[0, 0], dv=T[1, 0], u=T[0, 1], du=T[1, 1])


def integrate_frame_dz(potential: Potential, z, x_target: float,
                       tol: float = DEFAULT_TOL):
    """(frame, d frame/dz) at x_target; the derivative system is propagated
    alongside rather than finite-differenced."""
    (T, D), = propagators_at(potential, z, [x_target], tol=tol, derivative=True)
    frame = SolutionFrame(x=x_target, z=complex(z),
                          v=T[0, 0], dv=T[1, 0], u=T[0, 1], du=T[1, 1])
    dframe = FrameDerivative(vz=D[0, 0], dvz=D[1, 0], uz=D[0, 1], duz=D[1, 1])
    return frame, dframe


# ---------------------------------------------------------------------------
# Iterated-integral series oracle


def _series_nodes(potential, x, order):
    """Per-cell Gauss-Legendre nodes over [0, x], cell metadata included.

    Smooth potentials get uniform pseudo-cells; the series only needs V to
    be analytic inside each cell.
    """
    if potential.piecewise:
        cells = [(a, b) for a, b, _ in potential.cells(0.0, x)]
    else:
        n = max(4, int(math.ceil(x)))
        edges = np.linspace(0.0, x, n + 1)
        cells = list(zip(edges[:-1], edges[1:]))
    # keep cells short enough that the kernel is resolved by `order` nodes
    refined = []
    for a, b in cells:
        k = max(1, int(math.ceil((b - a) / 1.0)))
        e = np.linspace(a, b, k + 1)
        refined.extend(zip(e[:-1], e[1:]))
    ref_x, _ = gauss_legendre(order)
    nodes, weights, cell_id, cell_bounds = [], [], [], []
    for i, (a, b) in enumerate(refined):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        nodes.extend(mid + half * ref_x)
        weights.extend(half * np.ones(order))
        cell_id.extend([i] * order)
        cell_bounds.append((a, b))
    return (np.asarray(nodes), np.asarray(weights), np.asarray(cell_id),
            cell_bounds, order)


def _progressive_matrix(nodes, cell_id, cell_bounds, order):
    """Weights W[i, j] so that sum_j W[i, j] f(nodes[j]) = int_0^{nodes[i]} f
    for f analytic on each cell (full upstream cells by Gauss weights,
    the partial cell by interpolatory weights on [cell start, node])."""
    n = len(nodes)
    _, ref_w = gauss_legendre(order)
    W = np.zeros((n, n))
    for i in range(n):
        ci = cell_id[i]
        # full cells upstream
        for j0 in range(0, ci * order, order):
            cj = cell_id[j0]
            a, b = cell_bounds[cj]
            W[i, j0:j0 + order] = 0.5 * (b - a) * ref_w
        a, b = cell_bounds[ci]
        W[i, ci * order:(ci + 1) * order] = progressive_weights(a, b, order, nodes[i])
    return W


def series_tail_bound(potential: Potential, z, x: float, n_max: int) -> float:
    """Factorial tail bound for the truncated series,
    sum_{k > n_max} (b_c b_s^k I^k / k!) with I = int_0^x |V|."""
    s = branch_sqrt(z)
    im = float(np.imag(s))
    log_bc = im * x
    b_s = x if abs(s) * x < 1.0 else min(x, 1.0 / abs(s))
    I = potential.integral_abs(0.0, x)
    r = b_s * I * math.exp(min(im * x, 700.0))
    if r <= 0.0:
        return 0.0
    # sum exp(k log r - log k!) in log space to dodge overflow
    tail = 0.0
    for k in range(n_max + 1, n_max + 200):
        log_term = k * math.log(r) - math.lgamma(k + 1) + log_bc
        term = math.exp(min(log_term, 700.0))
        tail += term
        if k > r and term < 1e-18 * (1.0 + tail):
            break
    return tail


def volterra_series(potential: Potential, z, x: float, n_max: int,
                    tol: float | None = None, order: int = 20):
    """Neumann solution v(x, z) by the truncated iterated-integral series.

    Independent of the propagation route: each correction term is the
    integral of the previous one against the free kernel, evaluated by
    per-cell Gauss rules with progressive weights for the partial cell.
    Returns (value, tail_bound); if `tol` is given and the tail bound
    exceeds it, a truncation warning is emitted alongside the value.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if x == 0.0:
        return 1.0 + 0.0j, 0.0
    nodes, _, cell_id, cell_bounds, order = _series_nodes(potential, x, order)
    W = _progressive_matrix(nodes, cell_id, cell_bounds, order)
    Vn = np.array([potential(t) for t in nodes])
    # kernel matrices: K[i, j] = s(nodes[i] - nodes[j]) V(nodes[j]) W[i, j]
    diff = nodes[:, None] - nodes[None, :]
    K = free_sinc(diff, z) * (Vn[None, :] * W)
    # final row: integral up to x using full cells plus the last partial cell
    _, ref_w = gauss_legendre(order)
    w_last = np.zeros(len(nodes))
    for j0 in range(0, len(nodes), order):
        a, b = cell_bounds[cell_id[j0]]
        if b <= x * (1 + 1e-15):
            w_last[j0:j0 + order] = 0.5 * (b - a) * ref_w
    k_last = free_sinc(x - nodes, z) * Vn * w_last
    term_nodes = free_cos(nodes, z)
    total = free_cos(x, z)
    for _ in range(n_max):
        total = total + k_last @ term_nodes
        term_nodes = K @ term_nodes
    tail = series_tail_bound(potential, z, x, n_max)
    if tol is not None and tail > tol:
        warnings.warn(f"series truncation tail bound {tail:.3e} exceeds "
                      f"requested tolerance {tol:.3e}", stacklevel=2)
    return complex(total), tail


# ---------------------------------------------------------------------------
# Growth diagnostics


def check_growth_bounds(frame: SolutionFrame, potential: Potential) -> bool:
    """Check |v| against the locally-integrable growth bounds at real energy:
    exp(int |V| / sqrt(xi)) for xi >= 1, exp((1 + Im sqrt(xi)) x + int |V|)
    below 1."""
    if abs(complex(frame.z).imag) > 0:
        raise ValueError("growth bounds apply to real spectral parameter")
    xi = complex(frame.z).real
    ivabs = potential.integral_abs(0.0, frame.x)
    if xi >= 1.0:
        bound = math.exp(ivabs / math.sqrt(xi))
    else:
        im_root = float(np.imag(branch_sqrt(xi)))
        bound = math.exp((1.0 + im_root) * frame.x + ivabs)
    return bool(abs(frame.v) <= bound * (1.0 + 1e-12))


def growth_rate(potential: Potential, z, x_grid, tol: float = DEFAULT_TOL):
    """(1/x) log |v(x, z)| along the grid; -inf marks a vanishing v."""
    xs = [float(x) for x in x_grid]
    if any(x <= 0 for x in xs):
        raise ValueError("x_grid must be positive")
    out = []
    for T, _ in propagators_at(potential, z, xs, tol=tol):
        v = T[0, 0]
        out.append(-math.inf if v == 0 else math.log(abs(v)) / xs[len(out)])
    return out
