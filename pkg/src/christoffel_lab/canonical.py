"""Canonical-system view of the Schrodinger transfer matrix: j-forms,
j-monotonicity, Hermite-Biehler boundary functions, and the reproducing
kernel as a j-form entry.

The Schrodinger gauge is kept throughout: the transfer matrix T(x, z) =
[[v, -u], [-v', u']] solves j T' = (-z A + B) T with A = diag(1, 0) and
B = diag(V, -1); no Potapov-de Branges renormalization is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ode
from .kernels import KernelEval, KernelMethod, near_diagonal_threshold, \
    product_quadrature
from .potentials import Potential

J = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)
A_COEFF = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class JForm:
    """i (T*(x2) j T(x2) - T*(x1) j T(x1)); Hermitian, PSD on C+, zero on R."""

    x1: float
    x2: float
    z: complex
    matrix: np.ndarray
    quadrature: np.ndarray

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def _transfer(potential, z, x, tol):
    return ode.integrate_frame(potential, z, x, tol=tol).transfer_matrix()


def _jform_quadrature(potential, z, w, x1, x2, tol):
    """(conj w - z) int_{x1}^{x2} T(s, w)* A T(s, z) ds, each entry by the
    shared product quadrature (first-row products of T only)."""
    out = np.zeros((2, 2), dtype=complex)
    kinds = {(0, 0): "vv", (0, 1): "uv", (1, 0): "vu", (1, 1): "uu"}
    signs = {(0, 0): 1.0, (0, 1): -1.0, (1, 0): -1.0, (1, 1): 1.0}
    for (i, k), kind in kinds.items():
        # (T(s,w)* A T(s,z))[i,k] = conj(T[0,i](w)) T[0,k](z); row entries
        # of T are (v, -u), signs account for the -u
        full, _ = product_quadrature(potential, x2, z, w, tol=tol, kind=kind)
        if x1 > 0:
            head, _ = product_quadrature(potential, x1, z, w, tol=tol, kind=kind)
        else:
            head = 0.0
        out[i, k] = signs[(i, k)] * (full - head)
    return (np.conj(w) - z) * out


def j_form(potential: Potential, z, x1: float, x2: float,
           tol: float = 1e-10) -> JForm:
    """j-form between x1 and x2 from two transfer evaluations, plus the
    independent quadrature of (conj z - z) int T* A T as a cross-check."""
    if not 0 <= x1 <= x2:
        raise ValueError("need 0 <= x1 <= x2")
    z = complex(z)
    T2 = _transfer(potential, z, x2, tol) if x2 > 0 else np.eye(2, dtype=complex)
    T1 = _transfer(potential, z, x1, tol) if x1 > 0 else np.eye(2, dtype=complex)
    form = 1j * (T2.conj().T @ J @ T2 - T1.conj().T @ J @ T1)
    quad = 1j * _jform_quadrature(potential, z, z, x1, x2, tol)
    return JForm(x1=float(x1), x2=float(x2), z=z, matrix=form, quadrature=quad)


def kernel_via_jform(potential: Potential, L: float, z, w,
                     tol: float = 1e-10) -> KernelEval:
    """K_L(z, w) as the (1,1) entry of (T(L,w)* j T(L,z) - j)/(conj w - z).

    Independent of both the quadrature and boundary routes in the kernel
    module (it mixes all four transfer entries).
    """
    z = complex(z)
    w = complex(w)
    delta = np.conj(w) - z
    if abs(delta) < near_diagonal_threshold(L):
        raise ValueError("near-diagonal: use the kernel module's diagonal "
                         "or variational routes")
    Tz = _transfer(potential, z, L, tol)
    Tw = _transfer(potential, w, L, tol)
    M = Tw.conj().T @ J @ Tz - J
    value = M[0, 0] / delta
    err = 1e-15 * float(np.max(np.abs(Tw)) * np.max(np.abs(Tz))) / abs(delta)
    return KernelEval(L=float(L), z=z, w=w, value=complex(value),
                      method=KernelMethod.BOUNDARY, err_estimate=err)


# ---------------------------------------------------------------------------
# Hermite-Biehler


def hb_value(potential: Potential, L: float, z, tol: float = 1e-10) -> complex:
    """Boundary Hermite-Biehler function E_L(z) = v(L, z) + i v'(L, z)."""
    f = ode.integrate_frame(potential, z, L, tol=tol)
    return f.v + 1j * f.dv


def hb_check(potential: Potential, L: float, z_samples,
             tol: float = 1e-10) -> bool:
    """True iff |E_L(conj z)/E_L(z)| <= 1 + 1e-12 at every sample in C+."""
    for z in z_samples:
        z = complex(z)
        if z.imag <= 0:
            raise ValueError("samples must lie in the open upper half plane")
        e = hb_value(potential, L, z, tol=tol)
        if e == 0:
            return False
        e_sharp = np.conj(hb_value(potential, L, np.conj(z), tol=tol))
        if abs(e_sharp / e) > 1.0 + 1e-12:
            return False
    return True
