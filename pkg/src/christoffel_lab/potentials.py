"""Half-line potentials and the global quantities attached to them.

All potentials are real valued, uniformly locally integrable and immutable
after construction, so they are safe to share across parallel sweeps.
Piecewise-described potentials expose their cell structure, which the ODE
layer uses for exact per-cell propagation and which makes every integral
here (Cesaro means, local L1 norms) exact rather than quadrature-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PotentialRangeError

TWO_PI = 2.0 * math.pi


class Potential:
    """Base class. Subclasses implement pointwise evaluation and, when the
    description is piecewise, an exact cell decomposition."""

    #: True when `cells` yields an exact piecewise-constant decomposition.
    piecewise: bool = True

    def __call__(self, x: float) -> float:
        raise NotImplementedError

    def cells(self, a: float, b: float):
        """Yield (x0, x1, value) triples covering [a, b], in order.

        Only meaningful for piecewise potentials.
        """
        raise NotImplementedError

    def breakpoints(self, a: float, b: float) -> np.ndarray:
        """Sorted interior breakpoints of the description inside (a, b)."""
        return np.array([x0 for x0, _, _ in self.cells(a, b)][1:])

    def integral(self, a: float, b: float) -> float:
        """Integral of V over [a, b], exact for piecewise descriptions."""
        return sum(val * (x1 - x0) for x0, x1, val in self.cells(a, b))

    def integral_abs(self, a: float, b: float) -> float:
        """Integral of |V| over [a, b]."""
        return sum(abs(val) * (x1 - x0) for x0, x1, val in self.cells(a, b))

    def bound_abs(self) -> float:
        """A finite upper bound for |V| (used for step-size control)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(Potential):
    """The free potential V = 0."""

    def __call__(self, x):
        return 0.0

    def cells(self, a, b):
        yield (a, b, 0.0)

    def bound_abs(self):
        return 0.0


@dataclass(frozen=True)
class Constant(Potential):
    """V = value everywhere."""

    value: float

    def __call__(self, x):
        return self.value

    def cells(self, a, b):
        yield (a, b, self.value)

    def bound_abs(self):
        return abs(self.value)


@dataclass(frozen=True)
class PiecewiseConstant(Potential):
    """V takes values[i] on [breakpoints[i], breakpoints[i+1]); the first
    value applies below breakpoints[0] and the last above breakpoints[-1]."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        if knots.size + 1 != len(self.values):
            raise ConfigError("piecewise potential needs len(values) == len(breakpoints) + 1")
        if knots.size and np.any(np.diff(knots) <= 0):
            raise ConfigError("piecewise breakpoints must be strictly increasing")

    def __call__(self, x):
        idx = int(np.searchsorted(self.knots, x, side="right"))
        return float(self.values[idx])

    def cells(self, a, b):
        edges = [a] + [k for k in self.knots if a < k < b] + [b]
        for lo, hi in zip(edges[:-1], edges[1:]):
            yield (lo, hi, self(0.5 * (lo + hi)))

    def bound_abs(self):
        return max(abs(v) for v in self.values)


@dataclass(frozen=True)
class OscillatingExample(Potential):
    """Unit-amplitude square wave whose half-period shrinks like 1/(2n).

    On [n-1, n) the value alternates between +1 and -1 over 2n equal
    sub-cells, starting at +1. Cesaro means vanish while (1/L) int |V| = 1,
    so this potential is regular without being Cesaro decaying.
    """

    def __call__(self, x):
        if x < 0:
            raise PotentialRangeError("potential defined on x >= 0")
        n = math.floor(x) + 1
        return float((-1) ** (math.floor(2 * n * (x - n)) % 2))

    def cells(self, a, b):
        # Boundaries are (n-1) + k/(2n); generate them from integer indices
        # so float roundoff at a cell edge cannot misassign the sign.
        n = math.floor(a) + 1
        start = a
        while start < b:
            width = 1.0 / (2 * n)
            k = int((start - (n - 1)) / width + 1e-9)
            k = min(max(k, 0), 2 * n - 1)
            while k < 2 * n:
                hi = min((n - 1) + (k + 1) * width, b)
                if hi > start:
                    yield (start, hi, float((-1) ** (k % 2)))
                    start = hi
                if start >= b:
                    return
                k += 1
            n += 1
            start = max(start, float(n - 1))

    @staticmethod
    def _antiderivative(x):
        # int_0^x V in O(1): every full [n-1, n) block integrates to zero,
        # so only the partial block at x contributes.
        q = math.floor(x)
        t = x - q
        n = q + 1
        w = 1.0 / (2 * n)
        m = min(int(t / w), 2 * n - 1)
        full = w if m % 2 == 1 else 0.0
        return full + (t - m * w) * ((-1) ** (m % 2))

    def integral(self, a, b):
        return self._antiderivative(b) - self._antiderivative(a)

    def integral_abs(self, a, b):
        return b - a

    def bound_abs(self):
        return 1.0


@dataclass(frozen=True)
class GridPotential(Potential):
    """Tabulated values on a uniform grid, interpreted piecewise-constant:
    values[i] holds on [i*step, (i+1)*step). Evaluation past the table is a
    range error."""

    step: float
    values: tuple

    def __post_init__(self):
        if self.step <= 0:
            raise ConfigError("grid potential step must be positive")

    @property
    def x_max(self):
        return self.step * len(self.values)

    def __call__(self, x):
        if x < 0 or x >= self.x_max:
            raise PotentialRangeError(
                f"x = {x:.6g} outside tabulated range [0, {self.x_max:.6g})")
        return float(self.values[int(x / self.step)])

    def cells(self, a, b):
        if a < 0 or b > self.x_max:
            raise PotentialRangeError(
                f"[{a:.6g}, {b:.6g}] outside tabulated range [0, {self.x_max:.6g}]")
        i0 = int(a / self.step)
        x = a
        for i in range(i0, len(self.values)):
            hi = min((i + 1) * self.step, b)
            if hi <= x:
                continue
            yield (x, hi, float(self.values[i]))
            x = hi
            if x >= b:
                break

    def bound_abs(self):
        return max(abs(v) for v in self.values)


@dataclass(frozen=True)
class Periodic(Potential):
    """Periodic potential, either sampled (piecewise constant over one
    period, repeated) or the closed form mean + amplitude*cos(2 pi x/period
    + phase)."""

    period: float
    samples: tuple = ()
    amplitude: float = 0.0
    mean: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.period <= 0:
            raise ConfigError("period must be positive")
        if self.samples and self.amplitude:
            raise ConfigError("give either samples or a cosine closed form, not both")
        object.__setattr__(self, "piecewise", bool(self.samples))

    def __call__(self, x):
        t = math.fmod(x, self.period)
        if t < 0:
            t += self.period
        if self.samples:
            i = min(int(t / self.period * len(self.samples)), len(self.samples) - 1)
            return float(self.samples[i])
        return self.mean + self.amplitude * math.cos(TWO_PI * t / self.period + self.phase)

    def cells(self, a, b):
        if not self.samples:
            raise NotImplementedError("closed-form periodic potential has no cells")
        h = self.period / len(self.samples)
        k = math.floor(a / h)
        x = a
        while x < b:
            hi = min((k + 1) * h, b)
            if hi > x:
                yield (x, hi, float(self.samples[k % len(self.samples)]))
                x = hi
            k += 1

    def integral(self, a, b):
        if self.samples:
            return super().integral(a, b)
        w = TWO_PI / self.period
        anti = lambda x: self.mean * x + self.amplitude * math.sin(w * x + self.phase) / w
        return anti(b) - anti(a)

    def integral_abs(self, a, b):
        if self.samples:
            return super().integral_abs(a, b)
        # |mean + A cos| integrated numerically on a fine grid (only used
        # for bounds, not for quantities with tight tolerances)
        xs = np.linspace(a, b, max(64, int(64 * (b - a) / self.period) + 1))
        vals = np.abs(self.mean + self.amplitude * np.cos(TWO_PI * xs / self.period + self.phase))
        return float(np.trapezoid(vals, xs))

    def bound_abs(self):
        if self.samples:
            return max(abs(v) for v in self.samples)
        return abs(self.mean) + abs(self.amplitude)


def evaluate(potential: Potential, x: float) -> float:
    """Pointwise value V(x) for x >= 0."""
    if x < 0:
        raise PotentialRangeError("potential defined on x >= 0")
    return potential(x)


def cesaro_mean(potential: Potential, length: float) -> float:
    """(1/L) int_0^L V, exact for piecewise descriptions."""
    if length <= 0:
        raise ValueError("length must be positive")
    return potential.integral(0.0, length) / length


def local_l1_sup(potential: Potential, horizon: float) -> float:
    """sup over x in [0, horizon] of int_x^{x+1} |V|.

    The window integral is piecewise linear in x between description
    breakpoints, so evaluating at every breakpoint (shifted by the window
    ends) is exact for piecewise potentials. Smooth potentials fall back to
    a fine shift grid.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if potential.piecewise:
        knots = potential.breakpoints(0.0, horizon + 1.0)
        candidates = {0.0, horizon}
        for k in knots:
            for x in (k, k - 1.0):
                if 0.0 <= x <= horizon:
                    candidates.add(float(x))
        xs = sorted(candidates)
    else:
        xs = np.linspace(0.0, horizon, 512)
    return max(potential.integral_abs(x, x + 1.0) for x in xs)


_KINDS = ("zero", "constant", "piecewise", "periodic", "oscillating_example", "grid")


def from_config(cfg: dict) -> Potential:
    """Build a potential from a config mapping with a "kind" tag."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("potential config must be a mapping with a 'kind' tag")
    kind = cfg["kind"]
    if kind == "zero":
        return Zero()
    if kind == "constant":
        return Constant(value=float(cfg["value"]))
    if kind == "piecewise":
        return PiecewiseConstant(knots=tuple(float(x) for x in cfg["breakpoints"]),
                                 values=tuple(float(v) for v in cfg["values"]))
    if kind == "periodic":
        if "samples" in cfg:
            return Periodic(period=float(cfg["period"]),
                            samples=tuple(float(v) for v in cfg["samples"]))
        return Periodic(period=float(cfg["period"]),
                        amplitude=float(cfg.get("amplitude", 0.0)),
                        mean=float(cfg.get("mean", 0.0)),
                        phase=float(cfg.get("phase", 0.0)))
    if kind == "oscillating_example":
        return OscillatingExample()
    if kind == "grid":
        return GridPotential(step=float(cfg["step"]),
                             values=tuple(float(v) for v in cfg["values"]))
    raise ConfigError(f"unknown potential kind {kind!r}; expected one of {_KINDS}")
