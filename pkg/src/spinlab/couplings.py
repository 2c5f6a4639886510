"""Pair-coupling profiles J(|x|) and the lattice norms built from them.

The translation-invariant two-body interactions used everywhere else are
fixed by a coupling profile (exponential, power-law, finite-range, constant
mean-field, or tabulated) plus a model kind deciding which on-site axes the
pair term couples.  This module also owns the F-function machinery: the
uniform norm ||F||, the convolution constant C_F, the interaction F-norm,
and the exponential-weight norms that give a Lieb-Robinson velocity.

Sups over the infinite chain are evaluated on growing windows with a
stationarity-under-doubling stop rule; series get certified tail bounds
(geometric for exponential profiles, integral comparison for power laws).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple, Union

import numpy as np


# --------------------------------------------------------------------------
# coupling profiles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Exponential:
    """J(x) = xi^-|x|, xi > 1."""
    xi: float

    def __post_init__(self):
        if not self.xi > 1:
            raise ValueError(f"exponential profile needs xi > 1, got {self.xi}")


@dataclass(frozen=True)
class Dyson:
    """J(x) = |x|^-alpha, alpha > 1."""
    alpha: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError(f"power-law profile needs alpha > 1, got {self.alpha}")


@dataclass(frozen=True)
class FiniteRange:
    """J(x) = strength for 0 < |x| <= cutoff, else 0."""
    strength: float
    cutoff: int

    def __post_init__(self):
        if self.cutoff < 1:
            raise ValueError("cutoff must be a positive integer")


@dataclass(frozen=True)
class MeanField:
    """Constant profile with transverse/longitudinal amplitudes (a, c).

    The 1/(4|Lambda|) volume normalization belongs to the consumer; the
    spatial profile itself is 1 on every pair.
    """
    a: float
    c: float


@dataclass(frozen=True)
class Custom:
    """Tabulated |x| -> J; either a finite mapping or a callable."""
    table: Union[Mapping[int, float], Callable[[int], float]]


CouplingSpec = Union[Exponential, Dyson, FiniteRange, MeanField, Custom]


def coupling_value(spec: CouplingSpec, x: int) -> float:
    """J(|x|); zero on site (x = 0) for every variant."""
    r = abs(int(x))
    if r == 0:
        return 0.0
    if isinstance(spec, Exponential):
        return spec.xi ** -r
    if isinstance(spec, Dyson):
        return float(r) ** -spec.alpha
    if isinstance(spec, FiniteRange):
        return spec.strength if r <= spec.cutoff else 0.0
    if isinstance(spec, MeanField):
        return 1.0
    if isinstance(spec, Custom):
        if callable(spec.table):
            return float(spec.table(r))
        return float(spec.table.get(r, 0.0))
    raise TypeError(f"unknown coupling spec {spec!r}")


def coupling_label(spec: CouplingSpec) -> str:
    if isinstance(spec, Exponential):
        return f"exponential(xi={spec.xi:g})"
    if isinstance(spec, Dyson):
        return f"dyson(alpha={spec.alpha:g})"
    if isinstance(spec, FiniteRange):
        return f"finite_range(J={spec.strength:g},L={spec.cutoff})"
    if isinstance(spec, MeanField):
        return f"mean_field(a={spec.a:g},c={spec.c:g})"
    return "custom"


class SummabilityResult(NamedTuple):
    value: float         # certified estimate of the two-sided lattice sum
    radius: int          # truncation radius of the explicitly summed part
    error_bound: float   # certified absolute error of `value`


def summability(spec: CouplingSpec, rel_tol: float = 1e-10) -> SummabilityResult:
    """sum_{x in Z, x != 0} |J(|x|)| to certified relative accuracy.

    Exponential tails are resummed exactly (geometric); power-law tails use
    the two-sided integral bracket around the truncation radius, taking the
    midpoint as the estimate and half the bracket width as the error.
    """
    if isinstance(spec, MeanField):
        raise ValueError("mean-field profile is volume-normalized, not summable")

    if isinstance(spec, Exponential):
        radius = max(8, int(math.ceil(-math.log(rel_tol) / math.log(spec.xi))) + 8)
        r = np.arange(1, radius + 1, dtype=float)
        partial = 2.0 * float(np.sum(spec.xi ** -r))
        tail = 2.0 * spec.xi ** -float(radius) / (spec.xi - 1.0)
        return SummabilityResult(partial + tail, radius, 4e-16 * (partial + tail))

    if isinstance(spec, Dyson):
        a = spec.alpha
        integral = lambda x: x ** (1.0 - a) / (a - 1.0)
        total, radius = 0.0, 0
        while radius < (1 << 28):
            new_radius = max(4 * radius, 1024)
            r = np.arange(radius + 1, new_radius + 1, dtype=float)
            total += float(np.sum(r ** -a))
            radius = new_radius
            mid = 0.5 * (integral(radius) + integral(radius + 1.0))
            err = 0.5 * (integral(radius) - integral(radius + 1.0))
            value = 2.0 * (total + mid)
            if 2.0 * err <= rel_tol * value:
                return SummabilityResult(value, radius, 2.0 * err)
        raise ValueError(f"summability tail did not certify for {spec!r}")

    if isinstance(spec, FiniteRange):
        value = 2.0 * abs(spec.strength) * spec.cutoff
        return SummabilityResult(value, spec.cutoff, 0.0)

    if isinstance(spec, Custom) and not callable(spec.table):
        radius = max((abs(r) for r in spec.table), default=0)
        value = 2.0 * sum(abs(v) for r, v in spec.table.items() if r != 0)
        return SummabilityResult(value, radius, 0.0)

    # callable table: no analytic tail, Cauchy test on doubling partial sums
    total, radius = 0.0, 0
    while radius < (1 << 20):
        new_radius = max(2 * radius, 16)
        inc = sum(abs(float(spec.table(r))) for r in range(radius + 1, new_radius + 1))
        total, radius = total + inc, new_radius
        if 2.0 * inc <= rel_tol * max(total, 1e-300):
            return SummabilityResult(2.0 * total, radius, 2.0 * inc)
    raise ValueError("custom coupling table fails the Cauchy summability test")


# --------------------------------------------------------------------------
# F-functions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLawF:
    """F(r) = (1 + r)^-(2 nu + eps); integrable with a finite convolution constant."""
    nu: int = 1
    eps: float = 1.0

    @property
    def exponent(self) -> float:
        return 2.0 * self.nu + self.eps

    def __call__(self, r) -> np.ndarray | float:
        return (1.0 + np.abs(r)) ** -self.exponent


@dataclass(frozen=True)
class TableF:
    """Finite non-increasing table; zero beyond the table (compact support)."""
    values: tuple[float, ...]

    def __post_init__(self):
        if any(b > a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("F table must be non-increasing")
        if self.values and self.values[0] <= 0:
            raise ValueError("F must be positive at 0")

    def __call__(self, r) -> np.ndarray | float:
        r = np.abs(np.asarray(r))
        vals = np.asarray(self.values + (0.0,))
        return vals[np.minimum(r, len(self.values))]


FFunction = Union[PowerLawF, TableF]


class FConstants(NamedTuple):
    uniform_norm: float   # sup_x sum_y F(d(x,y))
    convolution: float    # C_F: sup of the convolution ratio
    window: int


def f_function_constants(f: FFunction, tol: float = 1e-6, max_window: int = 1 << 22) -> FConstants:
    """||F|| and C_F on growing windows, stopped when stationary under doubling."""
    window = 64
    prev = None
    while window <= max_window:
        r = np.arange(1, window + 1)
        uniform = float(f(0)) + 2.0 * float(np.sum(f(r)))

        # convolution ratio C(d) = sum_z F(|z|) F(|z-d|) / F(d), z in [-window, d+window]
        conv = 0.0
        for d in range(0, min(window, 4096) + 1):
            fd = float(f(d))
            if fd == 0.0:
                continue  # pairs beyond compact support carry no constraint
            z = np.arange(-window, d + window + 1)
            ratio = float(np.sum(f(z) * f(z - d))) / fd
            conv = max(conv, ratio)

        if prev is not None and abs(uniform - prev[0]) < tol and abs(conv - prev[1]) < tol:
            return FConstants(uniform, conv, window)
        prev = (uniform, conv)
        window *= 2
    raise RuntimeError("F-function constants not stationary; divergence suspected")


# --------------------------------------------------------------------------
# two-body interactions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class InteractionSpec:
    """Translation-invariant two-body interaction of a given model kind.

    kind 'gim' couples the 3-axes with profile j2; 'xy' couples the 1- and
    2-axes with profile j1; 'heisenberg' does both.  pair_norm returns the
    operator norm of the (unordered) pair term at distance r.
    """

    kind: str
    j1: CouplingSpec | None = None
    j2: CouplingSpec | None = None

    def __post_init__(self):
        if self.kind not in ("gim", "xy", "heisenberg"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "gim" and self.j2 is None:
            raise ValueError("gim interaction needs j2")
        if self.kind == "xy" and self.j1 is None:
            raise ValueError("xy interaction needs j1")
        if self.kind == "heisenberg" and (self.j1 is None or self.j2 is None):
            raise ValueError("heisenberg interaction needs j1 and j2")

    def pair_norm(self, r: int) -> float:
        # spectrum of j1*(s1s1 + s2s2) + j2*s3s3 is {j2, j2, -j2 +- 2 j1}
        a1 = abs(coupling_value(self.j1, r)) if self.j1 is not None else 0.0
        a2 = abs(coupling_value(self.j2, r)) if self.j2 is not None else 0.0
        return 2.0 * a1 + a2


def f_norm(phi: InteractionSpec, f: FFunction, tol: float = 1e-8, max_window: int = 1 << 22) -> float:
    """sup over pairs of (pair-term norm) / F(distance); on-site terms excluded."""
    window = 64
    prev = None
    while window <= max_window:
        best = 0.0
        for r in range(1, window + 1):
            fr = float(f(r))
            if fr == 0.0:
                pn = phi.pair_norm(r)
                if pn != 0.0:
                    raise RuntimeError("interaction reaches beyond the F support")
                continue
            best = max(best, phi.pair_norm(r) / fr)
        if prev is not None and abs(best - prev) < tol:
            return best
        prev = best
        window *= 2
    raise RuntimeError("interaction F-norm not stationary under window doubling")


def exp_weighted_norm(phi: InteractionSpec, lam: float, max_radius: int = 200000) -> float:
    """||Phi||_lam = sum_{x != 0} ||Phi({0,x})|| e^{lam |x|}; inf if divergent."""
    total = 0.0
    prev_term = math.inf
    grew = 0
    negligible = 0
    for r in range(1, max_radius + 1):
        term = phi.pair_norm(r) * math.exp(lam * r)
        total += 2.0 * term
        if term > prev_term:
            grew += 1
            if grew >= 64:
                return math.inf
        else:
            grew = 0
        if term <= 1e-18 * max(total, 1e-300):
            negligible += 1
            if negligible >= 64:
                return total
        else:
            negligible = 0
        if total > 1e200:
            return math.inf
        prev_term = term
    return math.inf


class VelocityResult(NamedTuple):
    velocity: float
    lam: float
    weighted_norm: float


def lr_velocity(phi: InteractionSpec, lam_grid) -> VelocityResult:
    """min over the grid of 2 ||Phi||_lam / lam; error if no weight converges."""
    best = None
    for lam in lam_grid:
        if lam <= 0:
            raise ValueError("exponential weights need lam > 0")
        norm = exp_weighted_norm(phi, lam)
        if not math.isfinite(norm):
            continue
        v = 2.0 * norm / lam
        if best is None or v < best.velocity:
            best = VelocityResult(v, lam, norm)
    if best is None:
        raise ValueError("no finite exponentially weighted norm on the grid")
    return best


def coupling_from_config(cfg: Mapping[str, object]) -> CouplingSpec:
    """Build a coupling from CLI config keys: variant plus xi/alpha/J/L/a/c."""
    variant = str(cfg.get("variant", "exponential")).lower()
    if variant == "exponential":
        return Exponential(float(cfg.get("xi", 2.0)))
    if variant == "dyson":
        return Dyson(float(cfg.get("alpha", 2.0)))
    if variant == "finite_range":
        return FiniteRange(float(cfg.get("J", 1.0)), int(cfg.get("L", 1)))
    if variant == "mean_field":
        return MeanField(float(cfg.get("a", 1.0)), float(cfg.get("c", 0.0)))
    raise ValueError(f"unknown coupling variant {variant!r}")
