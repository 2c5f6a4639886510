"""Von Neumann entropy and its inequality suite on spin-chain blocks.

Conventions: natural logarithm, k_B = 1, so a qubit carries at most log 2
nats.  Eigenvalues below 1e-14 contribute zero (the x log x = 0 convention
applied against round-off), and anything below -1e-12 rejects the input.

The headline experiment evolves a transversely polarized product state under
a diagonal Ising chain and tracks block entropy per site: zero at t = 0,
growing toward the log 2 ceiling as the block entangles with the rest of the
chain, while the global state stays pure throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .couplings import CouplingSpec, InteractionSpec, coupling_label
from .engine import MAX_DENSE_SITES, Propagator, build_hamiltonian
from .gim import GImSystem, evolve_diagonal
from .pauli import Block, partial_trace, plus_x_state, reduce_vector

LOG2 = math.log(2.0)
EIGENVALUE_FLOOR = 1e-14
NEGATIVITY_TOL = -1e-12


def von_neumann(rho: np.ndarray) -> float:
    """-Tr rho log rho in nats."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValueError(f"trace is {np.trace(rho).real}, not 1")
    lam = np.linalg.eigvalsh(rho)
    if lam[0] < NEGATIVITY_TOL:
        raise ValueError(f"negative eigenvalue {lam[0]}")
    lam = lam[lam > EIGENVALUE_FLOOR]
    return float(-np.sum(lam * np.log(lam)))


def binary_entropy(mu: float) -> float:
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mixing weight {mu} outside [0, 1]")
    if mu in (0.0, 1.0):
        return 0.0
    return -mu * math.log(mu) - (1.0 - mu) * math.log(1.0 - mu)


def trace_norm_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    if rho1.shape != rho2.shape:
        raise ValueError("shape mismatch")
    return float(np.sum(np.abs(np.linalg.eigvalsh(rho1 - rho2))))


# --------------------------------------------------------------------------
# entropy density
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EntropyDensityEstimate:
    """Block entropy per site over growing centered blocks, plus running inf.

    Finite data never certifies the infinite-volume density; this records the
    sampled sequence and its minimum, nothing more.
    """

    block_sizes: tuple[int, ...]
    values: tuple[float, ...]
    inf_value: float
    log_base: str = "e"

    def __post_init__(self):
        if not self.block_sizes or list(self.block_sizes) != sorted(set(self.block_sizes)):
            raise ValueError("block sizes must be strictly ascending and nonempty")
        if any(v < -1e-12 or v > LOG2 + 1e-12 for v in self.values):
            raise ValueError("per-site entropy outside [0, log 2]")
        if abs(self.inf_value - min(self.values)) > 1e-15:
            raise ValueError("inf_value must be the minimum of the recorded values")


def entropy_density(provider: Callable[[Block], np.ndarray], sizes) -> EntropyDensityEstimate:
    """Per-site entropies of provider states on centered blocks of the given sizes.

    The provider must be restriction-consistent: tracing its state on a larger
    block down to a smaller one reproduces the smaller state within 1e-10.
    """
    sizes = [int(k) for k in sizes]
    blocks = [Block.centered(k) for k in sizes]
    states = [np.asarray(provider(b), dtype=complex) for b in blocks]
    for small_b, small_rho, big_b, big_rho in zip(blocks, states, blocks[1:], states[1:]):
        if not small_b.issubset(big_b):
            raise ValueError("centered blocks must be nested; got non-ascending sizes")
        restricted = partial_trace(big_rho, big_b, small_b)
        if np.max(np.abs(restricted - small_rho)) > 1e-10:
            raise ValueError(
                f"provider inconsistent under restriction {big_b.sites} -> {small_b.sites}")
    values = tuple(von_neumann(rho) / k for k, rho in zip(sizes, states))
    return EntropyDensityEstimate(
        block_sizes=tuple(sizes), values=values, inf_value=min(values))


# --------------------------------------------------------------------------
# inequality checks
# --------------------------------------------------------------------------

def fannes_a(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """l1 gap of the ascending-sorted spectra; at most the trace distance."""
    if rho1.shape != rho2.shape:
        raise ValueError("blocks do not match")
    lam1 = np.linalg.eigvalsh(rho1)
    lam2 = np.linalg.eigvalsh(rho2)
    return float(np.sum(np.abs(lam1 - lam2)))


def fannes_check(rho1: np.ndarray, rho2: np.ndarray) -> tuple[float, float]:
    """Entropy continuity: |S1 - S2| <= n_sites * a * log 2 + e.

    Returns (lhs, rhs).  A violation is an implementation bug, not physics,
    so it raises instead of reporting.
    """
    dim = rho1.shape[0]
    n_sites = dim.bit_length() - 1
    if 1 << n_sites != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    lhs = abs(von_neumann(rho1) - von_neumann(rho2))
    rhs = n_sites * fannes_a(rho1, rho2) * LOG2 + math.e
    if lhs > rhs + 1e-12:
        raise AssertionError(f"entropy continuity bound broken: {lhs} > {rhs}")
    return lhs, rhs


@dataclass(frozen=True)
class SSAReport:
    s123: float
    s12: float
    s13: float
    s1: float
    s2: float
    s3: float
    s23: float
    conditional_slack: float   # s13 - s1 - (s123 - s12), nonnegative up to tol
    subadditivity_slack: float  # s2 + s3 - s23


def strong_subadditivity_check(rho: np.ndarray, region: Block,
                               b1: Block, b2: Block, b3: Block,
                               slack: float = 1e-9) -> SSAReport:
    """S123 + S1 <= S12 + S13 plus the two-block special case on (b2, b3)."""
    sets = [set(b.sites) for b in (b1, b2, b3)]
    if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
        raise ValueError("blocks must be pairwise disjoint")
    for b in (b1, b2, b3):
        if not b.issubset(region):
            raise ValueError(f"block {b.sites} outside region {region.sites}")

    def union(*blocks):
        return Block(tuple(sorted(s for b in blocks for s in b.sites)))

    def s(b):
        return von_neumann(partial_trace(rho, region, b))

    s123, s12, s13 = s(union(b1, b2, b3)), s(union(b1, b2)), s(union(b1, b3))
    s1, s2, s3, s23 = s(b1), s(b2), s(b3), s(union(b2, b3))
    cond = s13 - s1 - (s123 - s12)
    sub = s2 + s3 - s23
    if cond < -slack:
        raise AssertionError(f"strong subadditivity broken by {cond}")
    if sub < -slack:
        raise AssertionError(f"subadditivity broken by {sub}")
    return SSAReport(s123=s123, s12=s12, s13=s13, s1=s1, s2=s2, s3=s3, s23=s23,
                     conditional_slack=cond, subadditivity_slack=sub)


def mixing_bounds_check(rho1: np.ndarray, rho2: np.ndarray, mu: float) -> tuple[float, float, float]:
    """mu S1 + (1-mu) S2 <= S(mix) <= same + h(mu); returns (lower, mixed, upper)."""
    lower = mu * von_neumann(rho1) + (1.0 - mu) * von_neumann(rho2)
    mixed = von_neumann(mu * rho1 + (1.0 - mu) * rho2)
    upper = lower + binary_entropy(mu)
    if not lower - 1e-9 <= mixed <= upper + 1e-9:
        raise AssertionError(
            f"mixing entropy {mixed} outside [{lower}, {upper}]")
    return lower, mixed, upper


# --------------------------------------------------------------------------
# locality gap and the second-law experiment
# --------------------------------------------------------------------------

def locality_entropy_gap(m: InteractionSpec, v0: np.ndarray, t: float,
                         inner: Block, region: Block) -> tuple[float, float]:
    """Block entropies from global versus inner-only evolution.

    Returns (S of the inner restriction of the globally evolved state,
    S of the inner restriction evolved by the inner Hamiltonian alone).
    The second is time-independent by unitary invariance; the difference
    isolates what the boundary couplings did.
    """
    if region.size > MAX_DENSE_SITES:
        raise ValueError(f"region of {region.size} sites exceeds {MAX_DENSE_SITES}")
    if not inner.issubset(region):
        raise ValueError("inner block must lie inside the region")
    prop = Propagator.from_model(m, region)
    s_global = von_neumann(reduce_vector(prop.evolve(v0, t), region, inner))
    rho0 = reduce_vector(np.asarray(v0, dtype=complex), region, inner)
    inner_prop = Propagator.from_model(m, inner)
    # e^{-iHt} rho e^{iHt} is the Heisenberg map at -t
    s_local = von_neumann(inner_prop.heisenberg_dense(rho0, -t))
    return s_global, s_local


@dataclass(frozen=True)
class SecondLawTable:
    """Entropy-per-site samples from the diagonal-chain growth experiment."""

    rows: tuple[tuple[float, int, float], ...]  # (t, block size, nats per site)
    n_sites: int
    coupling: str

    def series(self, block_size: int) -> list[tuple[float, float]]:
        return [(t, v) for t, k, v in self.rows if k == block_size]


def second_law_experiment(spec: CouplingSpec, n_sites: int, block_sizes,
                          t_grid) -> SecondLawTable:
    region = Block.centered(n_sites)
    sys = GImSystem(spec, region)
    blocks = [Block.centered(int(k)) for k in block_sizes]
    for b in blocks:
        if not b.issubset(region):
            raise ValueError(f"block {b.sites} does not fit inside {region.sites}")
    v0 = plus_x_state(n_sites)
    rows = []
    for t in t_grid:
        vt = evolve_diagonal(sys, v0, float(t))
        for b in blocks:
            s = von_neumann(reduce_vector(vt, region, b))
            rows.append((float(t), b.size, s / b.size))
    return SecondLawTable(rows=tuple(rows), n_sites=n_sites,
                          coupling=coupling_label(spec))
