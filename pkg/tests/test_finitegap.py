import math

import numpy as np
import pytest

from christoffel_lab import finitegap as FG
from christoffel_lab.errors import BandDomainError, ConfigError, GapSolveError
from christoffel_lab.quadrature import gauss_legendre

HALF_LINE = FG.solve_critical_points(FG.FiniteGapSet(b0=0.0))
ONE_GAP = FG.solve_critical_points(FG.FiniteGapSet(b0=0.0, gaps=((1.0, 2.0),)))


def oracle_gap_critical_point(a, b, b0):
    """Independent 1-D bisection for the single-gap condition using a
    Gauss-Chebyshev rule (u = midpoint + half * cos(theta) absorbs both
    endpoint singularities)."""
    theta = (np.arange(1, 4001) - 0.5) * math.pi / 4000
    u = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(theta)

    def g(c):
        return float(np.sum((u - c) / np.sqrt(u - b0)))

    lo, hi = a + 1e-15, b - 1e-15
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if g(lo) * g(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_interlacing_validation():
    with pytest.raises(ConfigError):
        FG.FiniteGapSet(b0=0.0, gaps=((2.0, 1.0),))
    with pytest.raises(ConfigError):
        FG.FiniteGapSet(b0=0.0, gaps=((-1.0, 0.5),))
    with pytest.raises(ConfigError):
        FG.FiniteGapSet(b0=0.0, gaps=((1.0, 2.0), (1.5, 3.0)))


def test_comb_map_halfline_is_sqrt():
    for z in (4.0, 100.0, -9.0, 2 + 1j, -3 + 0.7j, 0.25):
        t = FG.comb_map(HALF_LINE, z)
        s = complex(np.sqrt(complex(z)))
        s = s if s.imag >= 0 else -s
        assert abs(t - s) < 1e-10 * (1 + abs(s))


def test_comb_map_vanishes_at_b0():
    assert FG.comb_map(HALF_LINE, 0.0) == 0.0
    assert FG.comb_map(ONE_GAP, 0.0) == 0.0


def test_comb_map_real_on_bands():
    for xi in (0.3, 0.9, 2.5, 3.0, 7.0):
        assert abs(FG.comb_map(ONE_GAP, xi).imag) < 1e-9


def test_solve_critical_points_noop_for_halfline():
    s = FG.solve_critical_points(FG.FiniteGapSet(b0=2.0))
    assert s.solved and s.critical == ()


def test_one_gap_critical_point_vs_bisection_oracle():
    c_oracle = oracle_gap_critical_point(1.0, 2.0, 0.0)
    assert ONE_GAP.critical[0] == pytest.approx(c_oracle, abs=1e-10)


def test_gap_condition_residual():
    res = abs(FG.comb_map(ONE_GAP, 2.0) - FG.comb_map(ONE_GAP, 1.0))
    assert res <= 1e-10


def test_two_gap_solve():
    s = FG.solve_critical_points(
        FG.FiniteGapSet(b0=0.0, gaps=((1.0, 1.5), (3.0, 4.0))))
    for (a, b), c in zip(s.gaps, s.critical):
        assert a < c < b
        assert abs(FG.comb_map(s, b) - FG.comb_map(s, a)) <= 1e-10
    for xi in (0.5, 2.0, 5.0):
        assert FG.martin_density(s, xi) > 0


def test_shrinking_symmetric_gap_critical_point():
    errs = []
    for h in (0.5, 0.25, 0.1):
        s = FG.solve_critical_points(
            FG.FiniteGapSet(b0=0.0, gaps=((2.0 - h, 2.0 + h),)))
        c = s.critical[0]
        assert 2.0 - h < c < 2.0 + h
        errs.append(abs(c - 2.0))
    assert errs[0] > errs[1] > errs[2]


def test_martin_density_halfline_closed_form():
    for xi in (0.25, 1.0, 4.0, 9.0, 50.0):
        assert FG.martin_density(HALF_LINE, xi) == pytest.approx(
            1.0 / (2 * math.pi * math.sqrt(xi)), rel=1e-10)
    shifted = FG.solve_critical_points(FG.FiniteGapSet(b0=5.0))
    assert FG.martin_density(shifted, 6.0) == pytest.approx(
        1.0 / (2 * math.pi), rel=1e-10)


def test_martin_density_domain_errors():
    with pytest.raises(BandDomainError):
        FG.martin_density(ONE_GAP, 1.5)  # in the gap
    with pytest.raises(BandDomainError):
        FG.martin_density(ONE_GAP, 1.0)  # band edge
    with pytest.raises(BandDomainError):
        FG.martin_density(ONE_GAP, -2.0)  # below the set


def test_martin_density_requires_solved_set():
    with pytest.raises(GapSolveError):
        FG.martin_density(FG.FiniteGapSet(b0=0.0, gaps=((1.0, 2.0),)), 0.5)


def test_density_edge_exponent():
    # f ~ C (xi - edge)^(-1/2) near a band edge: the product stabilizes
    vals = [FG.martin_density(ONE_GAP, 2.0 + d) * math.sqrt(d)
            for d in (1e-3, 1e-4, 1e-5, 1e-6)]
    assert abs(vals[-1] - vals[-2]) < 1e-3 * vals[-1]
    assert abs(vals[0] - vals[-1]) < 0.05 * vals[-1]


def test_density_monotone_under_set_inclusion():
    # bigger set, smaller density on a shared band
    for xi in np.linspace(0.2, 0.8, 20):
        f_small = FG.martin_density(ONE_GAP, float(xi))
        f_big = FG.martin_density(HALF_LINE, float(xi))
        assert f_big <= f_small + 1e-10


def test_density_cauchy_riemann_consistency():
    # pi f(xi) = lim M(xi + iy)/y, Richardson in y^2
    for set_, xi in ((HALF_LINE, 2.0), (ONE_GAP, 0.5), (ONE_GAP, 3.0)):
        f = FG.martin_density(set_, xi)
        y1, y2 = 1e-3, 5e-4
        r1 = FG.martin_function(set_, complex(xi, y1)) / y1
        r2 = FG.martin_function(set_, complex(xi, y2)) / y2
        extr = (y1 ** 2 * r2 - y2 ** 2 * r1) / (y1 ** 2 - y2 ** 2) / math.pi
        assert extr == pytest.approx(f, abs=1e-6 * (1 + f))


def test_density_smoothness_chebyshev_decay():
    # real analyticity proxy: spectral decay of Chebyshev coefficients on a
    # closed sub-band
    n = 24
    k = np.arange(n + 1)
    nodes = np.cos(math.pi * k / n)
    xs = 0.5 + 0.3 * nodes  # sub-band [0.2, 0.8] of the one-gap set
    vals = np.array([FG.martin_density(ONE_GAP, float(x)) for x in xs])
    # Chebyshev interpolation coefficients via the DCT-I formula
    coeffs = []
    for m in range(n + 1):
        w = np.ones(n + 1)
        w[0] = w[-1] = 0.5
        coeffs.append(2.0 / n * np.sum(w * vals * np.cos(math.pi * m * k / n)))
    coeffs = np.abs(np.array(coeffs))
    assert coeffs[-1] < 1e-10 * coeffs.max()


def test_martin_function_values():
    assert FG.martin_function(HALF_LINE, -4.0) == pytest.approx(2.0, rel=1e-12)
    assert FG.martin_function(HALF_LINE, -100.0) == pytest.approx(10.0, rel=1e-12)
    # zero on the set, positive elsewhere, symmetric under conjugation
    assert FG.martin_function(ONE_GAP, 2.5) == 0.0
    assert FG.martin_function(ONE_GAP, 1.5) > 0
    z = 1.3 + 0.8j
    assert FG.martin_function(ONE_GAP, z) == pytest.approx(
        FG.martin_function(ONE_GAP, np.conj(z)), rel=1e-12)
    for z in (0.5 + 1j, -3.0, 1.7 - 0.2j, 4.0):
        assert FG.martin_function(ONE_GAP, z) >= 0.0


def test_martin_function_gap_maximum_at_critical_point():
    c = ONE_GAP.critical[0]
    mc = FG.martin_function(ONE_GAP, c)
    d = 1e-4
    assert FG.martin_function(ONE_GAP, c - d) < mc
    assert FG.martin_function(ONE_GAP, c + d) < mc
    # derivative vanishes at c: central difference is second order small
    slope = (FG.martin_function(ONE_GAP, c + d) - FG.martin_function(ONE_GAP, c - d)) / (2 * d)
    assert abs(slope) < 1e-6


def test_normalization_far_field():
    for set_ in (HALF_LINE, ONE_GAP):
        t = FG.comb_map(set_, -1e6)
        assert abs(t / (1j * 1e3) - 1.0) <= 1e-3


def test_asymptotic_a_halfline_zero():
    a, res = FG.asymptotic_a(HALF_LINE)
    assert abs(a) < 1e-9
    assert res < 1e-6


def test_asymptotic_a_shifted_halfline():
    a, _ = FG.asymptotic_a(FG.solve_critical_points(FG.FiniteGapSet(b0=5.0)))
    assert a == pytest.approx(5.0, abs=1e-3)


def test_asymptotic_a_one_gap_closed_form():
    # the expansion constant equals b0 + sum(a_j + b_j - 2 c_j)
    a, _ = FG.asymptotic_a(ONE_GAP)
    expect = 0.0 + (1.0 + 2.0 - 2.0 * ONE_GAP.critical[0])
    assert a == pytest.approx(expect, abs=1e-6)


def test_delta_extension_halfline():
    e = FG.delta_extension(FG.FiniteGapSet(b0=0.0), 0.5)
    assert e.b0 == pytest.approx(-0.5) and e.gaps == ()


def test_delta_extension_gap_closes():
    e = FG.delta_extension(FG.FiniteGapSet(b0=0.0, gaps=((1.0, 2.0),)), 0.6)
    assert e.b0 == pytest.approx(-0.6) and e.gaps == ()


def test_delta_extension_gap_shrinks_by_two_delta():
    e = FG.delta_extension(FG.FiniteGapSet(b0=0.0, gaps=((1.0, 4.0),)), 0.2)
    assert e.b0 == pytest.approx(-0.2)
    (a, b), = e.gaps
    assert a == pytest.approx(1.2) and b == pytest.approx(3.8)


def test_delta_extension_adds_far_halfline():
    # a tiny delta leaves an extra gap up to 1/delta
    bands = [(0.0, 1.0)]
    e = FG.delta_extension(bands, 0.1)
    assert e.b0 == pytest.approx(-0.1)
    (a, b), = e.gaps
    assert a == pytest.approx(1.1) and b == pytest.approx(10.0)


def test_martin_measure_interval_halfline():
    got = FG.martin_measure_interval(HALF_LINE, 0.5, 4.0)
    assert got == pytest.approx((2.0 - math.sqrt(0.5)) / math.pi, rel=1e-10)
    # skips the gap
    got = FG.martin_measure_interval(ONE_GAP, 1.2, 1.8)
    assert got == 0.0


def test_martin_data_bundle():
    md = FG.martin_data(FG.FiniteGapSet(b0=5.0))
    assert md.a == pytest.approx(5.0, abs=1e-3)
    assert md.set.solved
