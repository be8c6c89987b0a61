import math

import numpy as np
import pytest

from christoffel_lab import potentials as P
from christoffel_lab.errors import ConfigError, PotentialRangeError


def test_evaluate_zero():
    assert P.evaluate(P.Zero(), 3.7) == 0.0


def test_evaluate_constant():
    assert P.evaluate(P.Constant(5.0), 100.0) == 5.0


def test_evaluate_oscillating_formula():
    # n = 1, floor(2*1*(0.1 - 1)) = floor(-1.8) = -2, even -> +1
    assert P.evaluate(P.OscillatingExample(), 0.1) == 1.0
    # direct floor-formula oracle on a grid
    V = P.OscillatingExample()
    for x in np.linspace(0.0, 9.7, 401):
        n = math.floor(x) + 1
        expected = float((-1) ** (math.floor(2 * n * (x - n)) % 2))
        assert V(float(x)) == expected


def test_evaluate_negative_x_rejected():
    with pytest.raises(PotentialRangeError):
        P.evaluate(P.Zero(), -0.1)


def test_grid_potential_range_error():
    V = P.GridPotential(step=0.5, values=(1.0, 2.0, 3.0))
    assert V(0.6) == 2.0
    with pytest.raises(PotentialRangeError):
        V(1.5)


def test_piecewise_breakpoints_must_increase():
    with pytest.raises(ConfigError):
        P.PiecewiseConstant(knots=(1.0, 1.0), values=(0.0, 1.0, 2.0))


def test_cesaro_mean_constant_exact():
    for L in (0.3, 1.0, 17.5, 1000.0):
        assert P.cesaro_mean(P.Constant(5.0), L) == pytest.approx(5.0, abs=0)


def test_cesaro_mean_zero():
    assert P.cesaro_mean(P.Zero(), 10.0) == 0.0


def test_cesaro_mean_oscillating_small():
    # regularity constant for the half line is zero
    assert abs(P.cesaro_mean(P.OscillatingExample(), 1000.0)) <= 0.02


def test_cesaro_mean_oscillating_decay():
    V = P.OscillatingExample()
    vals = [abs(P.cesaro_mean(V, L)) for L in (100.5, 300.5, 1000.5)]
    assert all(v <= 1.0 / L for v, L in zip(vals, (100.5, 300.5, 1000.5)))
    assert vals[0] >= vals[1] >= vals[2]


def test_oscillating_integral_matches_cells():
    V = P.OscillatingExample()
    for a, b in ((0.0, 2.0), (0.3, 7.9), (5.5, 5.6)):
        brute = sum(d * (x1 - x0) for x0, x1, d in V.cells(a, b))
        assert V.integral(a, b) == pytest.approx(brute, abs=1e-14)


def test_local_l1_sup_constant():
    assert P.local_l1_sup(P.Constant(-2.0), 50.0) == pytest.approx(2.0, abs=1e-15)


def test_local_l1_sup_oscillating():
    assert P.local_l1_sup(P.OscillatingExample(), 50.0) == pytest.approx(1.0, abs=1e-15)


def test_local_l1_sup_zero():
    assert P.local_l1_sup(P.Zero(), 50.0) == 0.0


def test_local_l1_sup_monotone_in_horizon():
    V = P.PiecewiseConstant(knots=(2.0, 3.0, 7.0), values=(0.0, 4.0, 1.0, 0.5))
    vals = [P.local_l1_sup(V, h) for h in (1.0, 2.5, 5.0, 10.0)]
    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_local_l1_sup_piecewise_exact():
    # window [1.5, 2.5] catches half of the tall cell: int = 0.5*4 + 0.5*0 = 2
    V = P.PiecewiseConstant(knots=(2.0, 3.0), values=(0.0, 4.0, 0.0))
    assert P.local_l1_sup(V, 5.0) == pytest.approx(4.0, abs=1e-14)
    assert V.integral_abs(1.5, 2.5) == pytest.approx(2.0, abs=1e-14)


def test_periodic_samples_and_cosine():
    Vs = P.Periodic(period=1.0, samples=(1.0, -1.0))
    assert Vs(0.25) == 1.0 and Vs(0.75) == -1.0 and Vs(1.25) == 1.0
    Vc = P.Periodic(period=2.0, amplitude=0.5, mean=1.0)
    assert Vc(0.0) == pytest.approx(1.5)
    assert Vc(1.0) == pytest.approx(0.5)
    # exact antiderivative over whole periods
    assert Vc.integral(0.0, 4.0) == pytest.approx(4.0, abs=1e-12)


def test_from_config_round_trip():
    specs = [
        {"kind": "zero"},
        {"kind": "constant", "value": 3.0},
        {"kind": "piecewise", "breakpoints": [1.0], "values": [0.0, 2.0]},
        {"kind": "periodic", "period": 1.0, "samples": [1.0, -1.0]},
        {"kind": "periodic", "period": 2.0, "amplitude": 0.3},
        {"kind": "oscillating_example"},
        {"kind": "grid", "step": 0.5, "values": [1.0, 2.0]},
    ]
    for spec in specs:
        V = P.from_config(spec)
        assert isinstance(V, P.Potential)
    with pytest.raises(ConfigError):
        P.from_config({"kind": "nope"})
    with pytest.raises(ConfigError):
        P.from_config({})
