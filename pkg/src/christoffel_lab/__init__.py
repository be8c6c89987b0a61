"""Christoffel functions, Christoffel-Darboux kernels, Martin functions of
finite-gap sets, and Weyl spectral data for half-line Schrodinger operators."""

__version__ = "0.1.0"

from .potentials import (Constant, GridPotential, OscillatingExample,
                         Periodic, PiecewiseConstant, Potential, Zero,
                         cesaro_mean, evaluate, local_l1_sup)
from .ode import (SolutionFrame, FrameDerivative, integrate_frame,
                  integrate_frame_dz, volterra_series, check_growth_bounds,
                  growth_rate)
from .kernels import (KernelEval, KernelMethod, ExtremalFunction,
                      kernel_quadrature, kernel_boundary, kernel_diagonal,
                      christoffel, minimizer_q, extremal_function,
                      universal_u0)
from .finitegap import (FiniteGapSet, MartinData, comb_map,
                        solve_critical_points, martin_density,
                        martin_function, martin_measure_interval,
                        asymptotic_a, delta_extension, martin_data)
from .weyl import (WeylDisk, SpectralDensity, weyl_disk, m_function,
                   spectral_density, floquet_m, floquet_bands, discriminant)
from .canonical import JForm, j_form, kernel_via_jform, hb_check, hb_value
from .experiments import (SpectrumSlice, UniversalityGrid,
                          truncation_spectrum, dirichlet_zeros,
                          clock_spacing_check, universality_grid,
                          christoffel_sweep, counting_measure_compare,
                          uniform_bins)

__all__ = [name for name in dir() if not name.startswith("_")]
