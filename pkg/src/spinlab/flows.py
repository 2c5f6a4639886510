"""Two deterministic flows that bracket the quantum chain results.

The mean-field magnetization obeys a closed nonlinear ODE system: the
transverse components rotate at a rate set by the conserved longitudinal
component, so the planar radius and the third component are constants of
motion.  A classical fixed-step fourth-order integrator reproduces this to
tight tolerances and exposes any drift.

The baker map supplies the classical picture of entropy growth: fine-grained
densities never converge, but block averages do.  The map is piecewise
affine with dyadic pieces, so its action on a piecewise-constant density is
an exact reindexing provided the representation grid is allowed to halve its
cell height (and double its cell width) once per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAGNETIZATION_RANGE = 2.0
MEAN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MagnetizationState:
    """Mean-field magnetization components, each confined to [-2, 2]."""

    m1: float
    m2: float
    m3: float
    t: float = 0.0

    def __post_init__(self):
        for name in ("m1", "m2", "m3"):
            v = getattr(self, name)
            if abs(v) > MAGNETIZATION_RANGE + 1e-9:
                raise ValueError(f"{name} = {v} outside [-2, 2]")


@dataclass(frozen=True)
class MeanFieldTrajectory:
    a: float
    c: float
    m3: float
    times: np.ndarray
    m1: np.ndarray
    m2: np.ndarray

    def __post_init__(self):
        if not len(self.times) == len(self.m1) == len(self.m2):
            raise ValueError("trajectory arrays must share one length")
        for arr in (self.times, self.m1, self.m2):
            arr.setflags(write=False)

    @property
    def planar_radius_drift(self) -> float:
        radius = np.hypot(self.m1, self.m2)
        return float(np.max(np.abs(radius - radius[0])))

    def final(self) -> MagnetizationState:
        return MagnetizationState(m1=float(self.m1[-1]), m2=float(self.m2[-1]),
                                  m3=self.m3, t=float(self.times[-1]))

    def rows(self):
        return [(float(t), float(x), float(y), self.m3)
                for t, x, y in zip(self.times, self.m1, self.m2)]


def meanfield_flow(a: float, c: float, m0: MagnetizationState,
                   t_end: float, dt: float) -> MeanFieldTrajectory:
    """Integrate the transverse pair with the classical one-step RK4 scheme.

    The longitudinal component enters only as the constant rotation rate
    2(a - c) m3, so it is carried unchanged (structural conservation).
    Negative t_end integrates backwards.
    """
    if dt <= 0.0:
        raise ValueError("step size must be positive")
    rate = 2.0 * (a - c) * m0.m3

    def rhs(u):
        return np.array([rate * u[1], -rate * u[0]])

    sign = 1.0 if t_end >= 0.0 else -1.0
    duration = abs(t_end)
    steps = max(0, math.ceil(duration / dt - 1e-12))
    times = [m0.t]
    points = [np.array([m0.m1, m0.m2])]
    elapsed = 0.0
    for i in range(steps):
        target = min((i + 1) * dt, duration)
        h = sign * (target - elapsed)
        u = points[-1]
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * h * k1)
        k3 = rhs(u + 0.5 * h * k2)
        k4 = rhs(u + h * k3)
        points.append(u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        elapsed = target
        times.append(m0.t + sign * elapsed)
    track = np.array(points)
    return MeanFieldTrajectory(a=a, c=c, m3=m0.m3, times=np.array(times),
                               m1=track[:, 0], m2=track[:, 1])


# --------------------------------------------------------------------------
# baker-map coarse graining
# --------------------------------------------------------------------------

def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridDensity:
    """Non-negative piecewise-constant density of unit mean on a dyadic grid.

    values[ix, iy] is the density on the cell with x in [ix/nx, (ix+1)/nx)
    and y in [iy/ny, (iy+1)/ny).  Rectangular shapes arise from transport
    steps; initial densities are square.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or not (_is_pow2(v.shape[0]) and _is_pow2(v.shape[1])):
            raise ValueError("density grid must be 2d with power-of-two sides")
        if np.min(v) < 0.0:
            raise ValueError("density must be non-negative")
        if abs(float(np.mean(v)) - 1.0) > MEAN_TOLERANCE:
            raise ValueError("density must have unit mean")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, m: int) -> "GridDensity":
        return cls(np.ones((1 << m, 1 << m)))

    @classmethod
    def left_half(cls, m: int) -> "GridDensity":
        """Indicator of x < 1/2, scaled to unit mean."""
        if m < 1:
            raise ValueError("need at least a 2x2 grid")
        v = np.zeros((1 << m, 1 << m))
        v[: 1 << (m - 1), :] = 2.0
        return cls(v)

    @classmethod
    def normalized(cls, values) -> "GridDensity":
        v = np.asarray(values, dtype=float)
        mean = float(np.mean(v))
        if mean <= 0.0:
            raise ValueError("cannot normalize a zero density")
        return cls(v / mean)


def baker_step(rho: GridDensity) -> GridDensity:
    """One exact transport step: stretch in x, squeeze and stack in y.

    The preimage of each target cell is exactly one source cell, so the new
    array is a permutation of the old one: the left x-half becomes the
    bottom y-half and the right x-half becomes the top.
    """
    nx = rho.values.shape[0]
    if nx < 2:
        raise ValueError("x resolution exhausted; start from a finer grid")
    half = nx // 2
    out = np.concatenate([rho.values[:half, :], rho.values[half:, :]], axis=1)
    return GridDensity(out)


def coarse_average(rho: GridDensity, k: int) -> np.ndarray:
    """Block averages over a 2^k x 2^k partition of the unit square."""
    nx, ny = rho.values.shape
    cells = 1 << k
    if k < 0 or nx < cells or ny < cells:
        raise ValueError(f"grid {nx}x{ny} cannot be averaged at level {k}")
    blocked = rho.values.reshape(cells, nx // cells, cells, ny // cells)
    return blocked.mean(axis=(1, 3))


def max_deviation(coarse: np.ndarray) -> float:
    return float(np.max(np.abs(coarse - 1.0)))


def baker_coarse_grain(rho0: GridDensity, steps: int, k: int) -> list[np.ndarray]:
    """Coarse views of the first `steps` transport iterates, initial included.

    Each step halves the x resolution, so the coarse partition stays
    resolvable only for steps <= log2(nx) - k; beyond that the request is
    refused rather than silently approximated.
    """
    nx = rho0.values.shape[0]
    if steps < 0:
        raise ValueError("step count must be non-negative")
    if nx >> steps < 1 << k:
        raise ValueError(
            f"{steps} steps exhaust the x resolution of a {nx}-column grid at level {k}")
    out = [coarse_average(rho0, k)]
    rho = rho0
    mean0 = float(np.mean(rho0.values))
    for _ in range(steps):
        rho = baker_step(rho)
        assert abs(float(np.mean(rho.values)) - mean0) < 1e-12
        out.append(coarse_average(rho, k))
    return out
