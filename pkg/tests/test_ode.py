import cmath
import math

import numpy as np
import pytest

from christoffel_lab import ode
from christoffel_lab import potentials as P

ALL_TAGS = [
    P.Zero(),
    P.Constant(1.5),
    P.PiecewiseConstant(knots=(0.7, 1.9), values=(0.5, -1.0, 2.0)),
    P.Periodic(period=1.0, samples=(1.0, -0.5)),
    P.Periodic(period=2.0, amplitude=0.8, mean=0.2),
    P.OscillatingExample(),
    P.GridPotential(step=0.25, values=tuple([0.3, -0.7] * 40)),
]


def test_free_closed_form():
    for z in (4.0, 2 + 1j, -1.0, 0.0, 25 - 3j):
        for x in (0.5, 1.0, 3.0):
            f = ode.integrate_frame(P.Zero(), z, x)
            s = ode.branch_sqrt(z)
            assert abs(f.v - np.cos(s * x)) < 1e-12 * (1 + abs(f.v))
            assert abs(f.u - ode.free_sinc(x, z)) < 1e-12 * (1 + abs(f.u))
            assert abs(f.du - np.cos(s * x)) < 1e-12 * (1 + abs(f.du))


def test_constant_closed_form():
    # v(x, z) = cos(x sqrt(z - d0))
    for d0, z, x in ((1.0, 4.0, 1.0), (3.0, 2 + 2j, 2.5), (-2.0, -5.0, 1.2)):
        f = ode.integrate_frame(P.Constant(d0), z, x)
        assert abs(f.v - np.cos(ode.branch_sqrt(z - d0) * x)) < 1e-12 * (1 + abs(f.v))


def test_initial_conditions_and_wronskian():
    f0 = ode.integrate_frame(P.OscillatingExample(), 2 + 1j, 0.0)
    assert (f0.v, f0.dv, f0.u, f0.du) == (1, 0, 0, 1)
    rng = np.random.RandomState(7)
    for _ in range(50):
        V = ALL_TAGS[rng.randint(len(ALL_TAGS))]
        z = complex(rng.uniform(-1.5, 20), rng.uniform(-2, 2))
        x = rng.uniform(0.1, 5.0)
        f = ode.integrate_frame(V, z, x)
        assert abs(f.wronskian() - 1.0) < 1e-9


def test_wronskian_relative_for_growing_solutions():
    rng = np.random.RandomState(8)
    for _ in range(25):
        V = ALL_TAGS[rng.randint(len(ALL_TAGS))]
        z = complex(rng.uniform(-20, 20), rng.uniform(-5, 5))
        x = rng.uniform(0.1, 5.0)
        f = ode.integrate_frame(V, z, x)
        scale = 1.0 + abs(f.v * f.du) + abs(f.dv * f.u)
        assert abs(f.wronskian() - 1.0) < 1e-12 * scale


def test_conjugation_symmetry():
    rng = np.random.RandomState(11)
    for _ in range(20):
        V = ALL_TAGS[rng.randint(len(ALL_TAGS))]
        z = complex(rng.uniform(-10, 10), rng.uniform(0.1, 3))
        x = rng.uniform(0.2, 4.0)
        f = ode.integrate_frame(V, z, x)
        g = ode.integrate_frame(V, np.conj(z), x)
        for attr in ("v", "dv", "u", "du"):
            assert abs(getattr(g, attr) - np.conj(getattr(f, attr))) < 1e-10


def test_entirety_circle_mean():
    # discrete Cauchy test: mean over a small circle equals the center value
    V = P.PiecewiseConstant(knots=(1.0,), values=(0.0, 1.0))
    z0, r, x = 2.0 + 0.5j, 0.3, 2.0
    pts = [z0 + r * cmath.exp(2j * math.pi * k / 64) for k in range(64)]
    vals = [ode.integrate_frame(V, z, x).v for z in pts]
    center = ode.integrate_frame(V, z0, x).v
    assert abs(np.mean(vals) - center) < 1e-8


def test_smooth_vs_piecewise_routes():
    # sampled periodic (exact cells) against the cosine form integrated
    # adaptively, at a resolution where the sampled version converges
    n = 512
    period = 2.0
    xs = (np.arange(n) + 0.5) * period / n
    Vs = P.Periodic(period=period, samples=tuple(0.8 * np.cos(2 * np.pi * xs / period)))
    Vc = P.Periodic(period=period, amplitude=0.8)
    f1 = ode.integrate_frame(Vs, 3.0 + 0.5j, 4.0)
    f2 = ode.integrate_frame(Vc, 3.0 + 0.5j, 4.0, tol=1e-12)
    assert abs(f1.v - f2.v) < 5e-5


def test_volterra_zero_exact():
    for z in (4.0, 2 + 1j):
        val, tail = ode.volterra_series(P.Zero(), z, 3.0, 1)
        assert val == pytest.approx(complex(np.cos(ode.branch_sqrt(z) * 3.0)), abs=1e-14)
        assert tail == 0.0


def test_volterra_constant_closed_form():
    val, tail = ode.volterra_series(P.Constant(1.0), 4.0, 1.0, 8)
    assert abs(val - np.cos(math.sqrt(3))) <= tail + 1e-12


def test_volterra_coarse_tail_bound():
    # two terms at high energy: within exp(1/sqrt(100)) - 1 of the closed form
    val, tail = ode.volterra_series(P.Constant(1.0), 100.0, 1.0, 2)
    assert abs(val - np.cos(math.sqrt(99))) <= math.exp(1.0 / math.sqrt(100.0)) - 1.0
    assert abs(val - np.cos(math.sqrt(99))) <= tail


def test_volterra_truncation_warning():
    with pytest.warns(UserWarning, match="tail bound"):
        ode.volterra_series(P.Constant(2.0), 3.0, 4.0, 1, tol=1e-12)


@pytest.mark.parametrize("V", ALL_TAGS, ids=lambda v: type(v).__name__)
def test_oracle_equivalence_frame_vs_series(V):
    rng = np.random.RandomState(hash(type(V).__name__) % 2 ** 31)
    for _ in range(3):
        z = complex(rng.uniform(-50, 50), rng.uniform(-20, 20))
        x = rng.uniform(0.3, 4.0)
        frame = ode.integrate_frame(V, z, x, tol=1e-12)
        val, tail = ode.volterra_series(V, z, x, 40)
        assert abs(frame.v - val) <= 1e-8 * (1 + abs(val)) + tail


def test_growth_bounds_examples():
    f = ode.integrate_frame(P.Zero(), 4.0, 10.0)
    assert ode.check_growth_bounds(f, P.Zero())
    f = ode.integrate_frame(P.Constant(1.0), 4.0, 2.0)
    assert ode.check_growth_bounds(f, P.Constant(1.0))
    f = ode.integrate_frame(P.Zero(), -1.0, 1.0)
    assert ode.check_growth_bounds(f, P.Zero())


def test_growth_bounds_random():
    rng = np.random.RandomState(3)
    for _ in range(40):
        V = ALL_TAGS[rng.randint(len(ALL_TAGS))]
        xi = rng.uniform(-3, 30)
        x = rng.uniform(0.2, 6.0)
        f = ode.integrate_frame(V, xi, x)
        assert ode.check_growth_bounds(f, V)


def test_growth_rate_free_band():
    rates = ode.growth_rate(P.Zero(), 1.0, [5.0, 20.0, 80.0, 200.0])
    assert all(r <= 0.01 for r in rates)
    assert abs(rates[-1]) < 0.05


def test_growth_rate_free_below_spectrum():
    # |v| = cosh(x) at z = -1, so the rate tends to 1
    rates = ode.growth_rate(P.Zero(), -1.0, [5.0, 20.0, 80.0])
    assert abs(rates[-1] - 1.0) < 0.01


def test_growth_rate_oscillating_regular():
    xs = np.linspace(20.0, 200.0, 10)
    rates = ode.growth_rate(P.OscillatingExample(), 2.0, xs)
    assert all(r <= 0.05 for r in rates)


def test_jform_psd_from_frames():
    # i(T* j T - j) is PSD for z in C+ and vanishes on R
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    rng = np.random.RandomState(5)
    for _ in range(25):
        V = ALL_TAGS[rng.randint(len(ALL_TAGS))]
        z = complex(rng.uniform(-2, 10), rng.uniform(0.05, 2.0))
        T = ode.integrate_frame(V, z, rng.uniform(0.2, 3.0)).transfer_matrix()
        M = 1j * (T.conj().T @ J @ T - J)
        assert np.linalg.eigvalsh(M).min() >= -1e-10
        Tr = ode.integrate_frame(V, z.real, 1.0).transfer_matrix()
        Mr = 1j * (Tr.conj().T @ J @ Tr - J)
        assert np.max(np.abs(Mr)) < 1e-10


def test_det_transfer_is_one():
    rng = np.random.RandomState(9)
    for _ in range(20):
        V = ALL_TAGS[rng.randint(len(ALL_TAGS))]
        z = complex(rng.uniform(-1.5, 20), rng.uniform(-2, 2))
        T = ode.integrate_frame(V, z, rng.uniform(0.1, 4.0)).transfer_matrix()
        assert abs(np.linalg.det(T) - 1.0) < 1e-9


def test_frame_derivative_vs_finite_difference():
    for V in (P.Zero(), P.Constant(2.0), P.OscillatingExample()):
        z, x, h = 1.7, 4.0, 1e-6
        _, d = ode.integrate_frame_dz(V, z, x)
        fp = ode.integrate_frame(V, z + h, x)
        fm = ode.integrate_frame(V, z - h, x)
        assert abs(d.vz - (fp.v - fm.v) / (2 * h)) < 1e-7 * (1 + abs(d.vz))
        assert abs(d.dvz - (fp.dv - fm.dv) / (2 * h)) < 1e-7 * (1 + abs(d.dvz))
        assert abs(d.uz - (fp.u - fm.u) / (2 * h)) < 1e-7 * (1 + abs(d.uz))
