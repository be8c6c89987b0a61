"""Shared quadrature helpers: Gauss-Legendre panels and singular-endpoint rules.

Everything here is deterministic: node layouts are pure functions of the
interval decomposition, so repeated runs reproduce results bit for bit.
"""

from __future__ import annotations

import numpy as np

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1], cached per order."""
    rule = _GL_CACHE.get(n)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = rule
    return rule


def panel_nodes(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights for panels given by `edges`."""
    x, w = gauss_legendre(order)
    lo = edges[:-1]
    hi = edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def split_panels(a: float, b: float, max_len: float) -> np.ndarray:
    """Panel edges covering [a, b] with length at most `max_len`."""
    if b <= a:
        return np.array([a, b])
    n = max(1, int(np.ceil((b - a) / max_len)))
    return np.linspace(a, b, n + 1)


def geometric_panels(a: float, b: float, first: float = 1.0) -> np.ndarray:
    """Panel edges on [a, b] with geometrically growing lengths.

    Suited to integrands that flatten out at large argument (far-field
    tails after a square-root substitution).
    """
    edges = [a]
    step = first
    x = a
    while x + step < b:
        x += step
        edges.append(x)
        step *= 2.0
    edges.append(b)
    return np.asarray(edges)


def progressive_weights(cell_lo: float, cell_hi: float, order: int,
                        t: float) -> np.ndarray:
    """Interpolatory weights integrating over [cell_lo, t] from samples at the
    cell's Gauss-Legendre nodes.

    The returned w satisfies sum(w * f(nodes)) = int_{cell_lo}^{t} f for every
    polynomial f of degree < order; for analytic f on the cell the error is
    spectral in `order`.
    """
    x, _ = gauss_legendre(order)
    half = 0.5 * (cell_hi - cell_lo)
    # Map [cell_lo, t] into the reference cell [-1, 1].
    s = (t - cell_lo) / half - 1.0
    # Moments of Legendre polynomials over [-1, s]: int P_k = (P_{k+1}-P_{k-1})/(2k+1)
    pk = np.polynomial.legendre.legvander(np.array([s]), order)[0]
    moments = np.empty(order)
    moments[0] = s + 1.0
    for k in range(1, order):
        moments[k] = (pk[k + 1] - pk[k - 1]) / (2 * k + 1)
    # Solve V^T w = moments where V[i, k] = P_k(x_i).
    vand = np.polynomial.legendre.legvander(x, order - 1)
    w = np.linalg.solve(vand.T, moments)
    return half * w
