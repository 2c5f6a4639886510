"""Repeated-measurement history statistics for a two-branch mixture.

An infinite ensemble prepared as a mixture of two product branches is
measured one site per step.  Each branch assigns outcome 0 the probability
p1 resp. p2, so a length-n outcome record alpha has weight

    W(alpha) = mu p1^l (1-p1)^(n-l) + (1-mu) p2^l (1-p2)^(n-l),

with l the number of zeros in alpha.  The weight of a history and the
branch posterior after seeing it depend on alpha only through l, so every
ensemble sum collapses to a binomial aggregation and stays exact at any n.

The module also carries the two finite-size counterparts: an explicit
system/pointer unitary model whose readout statistics must reproduce
W(alpha), and the finite-volume collapse average, whose entropy strictly
drops where the infinite-volume mean entropy is conserved.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .entropy import von_neumann

MAX_ENUMERATION_STEPS = 20
MAX_APPARATUS_STEPS = 10
LINEAR_SPACE_STEPS = 50


class ImpossibleHistoryError(ValueError):
    """Both branches assign the history probability zero; no posterior exists."""


@dataclass(frozen=True)
class MeasurementModel:
    """Mixture weight, the two per-step outcome-0 probabilities, step count."""

    mu: float
    p1: float
    p2: float
    n: int

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError(f"mixing weight must be strictly inside (0,1), got {self.mu}")
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability, got {p}")
        if self.n < 0:
            raise ValueError("step count must be non-negative")


@dataclass(frozen=True)
class History:
    bits: tuple[int, ...]
    zeros: int
    weight: float
    posterior: float


@dataclass(frozen=True)
class BranchEntropies:
    """Per-site entropies (nats) of the two branches, given analytically."""

    s1: float
    s2: float

    def __post_init__(self):
        for s in (self.s1, self.s2):
            if not -1e-12 <= s <= math.log(2.0) + 1e-12:
                raise ValueError(f"per-site entropy {s} outside [0, log 2]")


def _check_bits(m: MeasurementModel, bits) -> tuple[int, ...]:
    bits = tuple(int(b) for b in bits)
    if len(bits) != m.n:
        raise ValueError(f"history length {len(bits)} != n = {m.n}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("history bits must be 0 or 1")
    return bits


def _log_branch(p: float, zeros: int, n: int) -> float:
    """log[p^l (1-p)^(n-l)] with the 0^0 = 1 convention."""
    def log_pow(base, k):
        if k == 0:
            return 0.0
        return k * math.log(base) if base > 0.0 else -math.inf
    return log_pow(p, zeros) + log_pow(1.0 - p, n - zeros)


def history_weight(m: MeasurementModel, bits) -> tuple[float, float]:
    """Weight and branch-1 posterior of one outcome record.

    Linear arithmetic up to 50 steps, log-space beyond; a history both
    branches exclude raises ImpossibleHistoryError.
    """
    bits = _check_bits(m, bits)
    zeros = bits.count(0)
    if m.n <= LINEAR_SPACE_STEPS:
        q1 = m.p1 ** zeros * (1.0 - m.p1) ** (m.n - zeros)
        q2 = m.p2 ** zeros * (1.0 - m.p2) ** (m.n - zeros)
        w1 = m.mu * q1
        w = w1 + (1.0 - m.mu) * q2
        if w == 0.0:
            raise ImpossibleHistoryError(f"history {bits} has weight zero in both branches")
        return w, w1 / w
    lw1 = math.log(m.mu) + _log_branch(m.p1, zeros, m.n)
    lw2 = math.log(1.0 - m.mu) + _log_branch(m.p2, zeros, m.n)
    if lw1 == -math.inf and lw2 == -math.inf:
        raise ImpossibleHistoryError(f"history {bits} has weight zero in both branches")
    lw = np.logaddexp(lw1, lw2)
    return float(np.exp(lw)), float(np.exp(lw1 - lw))


def history_table(m: MeasurementModel) -> list[History]:
    """Every history record, by raw enumeration; cross-check scale only."""
    if m.n > MAX_ENUMERATION_STEPS:
        raise ValueError(f"enumeration over 2^{m.n} histories refused; aggregate instead")
    out = []
    for bits in itertools.product((0, 1), repeat=m.n):
        w, post = history_weight(m, bits)
        out.append(History(bits=bits, zeros=bits.count(0), weight=w, posterior=post))
    return out


# --------------------------------------------------------------------------
# binomial aggregation: exact ensemble sums at any n
# --------------------------------------------------------------------------

def _branch_masses(m: MeasurementModel) -> tuple[np.ndarray, np.ndarray]:
    """Per-zero-count W-masses of the two branches, binomial factor included.

    Direct pmf evaluation keeps each term accurate to machine precision;
    far-tail underflow to zero is harmless in every aggregate below.
    """
    l = np.arange(m.n + 1)
    return m.mu * binom.pmf(l, m.n, m.p1), (1.0 - m.mu) * binom.pmf(l, m.n, m.p2)


def weight_normalization(m: MeasurementModel) -> float:
    """Sum of W over all histories; asserted to be 1 branch by branch."""
    m1, m2 = _branch_masses(m)
    s1 = float(np.sum(m1)) / m.mu
    s2 = float(np.sum(m2)) / (1.0 - m.mu)
    assert abs(s1 - 1.0) < 1e-12 and abs(s2 - 1.0) < 1e-12, (s1, s2)
    total = m.mu * s1 + (1.0 - m.mu) * s2
    assert abs(total - 1.0) < 1e-12
    return total


def posterior_martingale(m: MeasurementModel) -> float:
    """Sum of W(alpha) mu_alpha over all histories; equals mu identically."""
    m1, m2 = _branch_masses(m)
    total = m1 + m2
    with np.errstate(invalid="ignore"):
        posterior = np.where(total > 0.0, m1 / total, 0.0)
    return float(np.sum(total * posterior))


def mean_entropy_average(m: MeasurementModel, s: BranchEntropies) -> tuple[float, float]:
    """Collapse-averaged mean entropy against the pre-measurement value.

    The average of mu_alpha s1 + (1-mu_alpha) s2 under W equals the affine
    combination mu s1 + (1-mu) s2 exactly; both sides are returned and the
    equality is asserted at 1e-12.
    """
    m1, m2 = _branch_masses(m)
    s_av = s.s1 * float(np.sum(m1)) + s.s2 * float(np.sum(m2))
    s_initial = m.mu * s.s1 + (1.0 - m.mu) * s.s2
    assert abs(s_av - s_initial) < 1e-12, (s_av, s_initial)
    return s_av, s_initial


@dataclass(frozen=True)
class PurificationReport:
    n: int
    undecided_mass: float
    mean_l_over_n_branch1: float
    mean_l_over_n_branch2: float


def purification_stats(m: MeasurementModel, eps: float) -> PurificationReport:
    """W-mass of histories whose posterior is still eps-far from both 0 and 1.

    Distinguishable branches drive this mass to zero as records lengthen;
    identical branches never decide, so p1 = p2 is rejected.
    """
    if m.p1 == m.p2:
        raise ValueError("indistinguishable branches never purify")
    if m.n < 1:
        raise ValueError("need at least one measurement step")
    if not 0.0 < eps < 0.5:
        raise ValueError("threshold must lie in (0, 0.5)")
    m1, m2 = _branch_masses(m)
    mass = m1 + m2
    with np.errstate(invalid="ignore"):
        posterior = np.where(mass > 0.0, m1 / mass, 0.0)
    undecided = (np.minimum(posterior, 1.0 - posterior) > eps) & (mass > 0.0)
    l = np.arange(m.n + 1)
    return PurificationReport(
        n=m.n,
        undecided_mass=float(np.sum(mass[undecided])),
        mean_l_over_n_branch1=float(np.sum(l * binom.pmf(l, m.n, m.p1))) / m.n,
        mean_l_over_n_branch2=float(np.sum(l * binom.pmf(l, m.n, m.p2))) / m.n,
    )


def purification_schedule(mu: float, p1: float, p2: float, eps: float,
                          n_schedule) -> list[PurificationReport]:
    return [purification_stats(MeasurementModel(mu, p1, p2, int(n)), eps)
            for n in n_schedule]


# --------------------------------------------------------------------------
# explicit system/pointer apparatus
# --------------------------------------------------------------------------

def apparatus_branch_state(p: float, n: int) -> np.ndarray:
    """Post-measurement state of one branch: n system qubits, n pointers.

    Each system qubit starts in sqrt(p)|0> + sqrt(1-p)|1>, each pointer in
    |0>; step k flips pointer k exactly on the system-bit-1 component.  The
    returned vector lives on 2n sites, system block first.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"need a probability, got {p}")
    if not 1 <= n <= MAX_APPARATUS_STEPS:
        raise ValueError(f"apparatus model limited to {MAX_APPARATUS_STEPS} steps")
    local = np.array([math.sqrt(p), math.sqrt(1.0 - p)])
    system = local
    for _ in range(n - 1):
        system = np.kron(system, local)
    pointers = np.zeros(1 << n)
    pointers[0] = 1.0
    state = np.kron(system, pointers).astype(complex)

    total = 2 * n
    idx = np.arange(1 << total)
    for k in range(n):
        sys_bit = 1 << (total - 1 - k)
        ptr_bit = 1 << (n - 1 - k)
        # controlled flip is an involutive permutation of basis states
        state = state[np.where(idx & sys_bit, idx ^ ptr_bit, idx)]
    return state


def _pointer_weights(state: np.ndarray, n: int) -> np.ndarray:
    """Per-pointer-configuration probability; cross blocks must vanish."""
    blocks = state.reshape(1 << n, 1 << n)
    overlaps = blocks.conj().T @ blocks
    weights = np.real(np.diag(overlaps)).copy()
    off = overlaps - np.diag(np.diag(overlaps))
    assert np.max(np.abs(off)) < 1e-12, "pointer readout blocks are not orthogonal"
    return weights


def apparatus_simulate(m: MeasurementModel) -> dict[tuple[int, ...], float]:
    """Readout distribution of the explicit apparatus, keyed by outcome record."""
    if m.n > MAX_APPARATUS_STEPS:
        raise ValueError(f"apparatus model limited to {MAX_APPARATUS_STEPS} steps")
    if m.n < 1:
        raise ValueError("need at least one measurement step")
    w1 = _pointer_weights(apparatus_branch_state(m.p1, m.n), m.n)
    w2 = _pointer_weights(apparatus_branch_state(m.p2, m.n), m.n)
    mixed = m.mu * w1 + (1.0 - m.mu) * w2
    out = {}
    for bits in itertools.product((0, 1), repeat=m.n):
        i = 0
        for b in bits:
            i = (i << 1) | b
        out[bits] = float(mixed[i])
    return out


# --------------------------------------------------------------------------
# finite-volume collapse: entropy strictly drops
# --------------------------------------------------------------------------

def _check_projector_family(projectors, dim: int):
    mats = [np.asarray(p, dtype=complex) for p in projectors]
    total = np.zeros((dim, dim), dtype=complex)
    for p in mats:
        if p.shape != (dim, dim):
            raise ValueError("projector shape does not match the state")
        if np.max(np.abs(p - p.conj().T)) > 1e-10 or np.max(np.abs(p @ p - p)) > 1e-10:
            raise ValueError("family members must be orthogonal projectors")
        total += p
    if np.max(np.abs(total - np.eye(dim))) > 1e-10:
        raise ValueError("projector family must resolve the identity")
    for i, p in enumerate(mats):
        for q in mats[i + 1:]:
            if np.max(np.abs(p @ q)) > 1e-10:
                raise ValueError("projector family must be mutually orthogonal")
    return mats


def finite_collapse_average(rho: np.ndarray, projectors) -> tuple[float, float]:
    """Average post-collapse entropy against the entropy of the input state.

    Requires a decoherent input (no cross-block coherences).  With at least
    two populated blocks the average is strictly below S(rho) by the mixing
    entropy of the block weights; a single populated block gives equality.
    """
    rho = np.asarray(rho, dtype=complex)
    mats = _check_projector_family(projectors, rho.shape[0])
    for i, p in enumerate(mats):
        for j, q in enumerate(mats):
            if i != j and np.linalg.norm(p @ rho @ q, 2) > 1e-12:
                raise ValueError("state is not decoherent for this projector family")
    s_before = von_neumann(rho)
    s_av = 0.0
    populated = 0
    for p in mats:
        w = float(np.real(np.trace(p @ rho)))
        if w <= 1e-12:
            continue
        populated += 1
        s_av += w * von_neumann(p @ rho @ p / w)
    if populated >= 2:
        assert s_av < s_before - 1e-12, (s_av, s_before)
    return s_av, s_before


@dataclass(frozen=True)
class SpectrumReport:
    left: tuple[float, ...]
    right: tuple[float, ...]
    max_gap: float


def svd_spectrum_check(a: np.ndarray) -> SpectrumReport:
    """Eigenvalues of A A-dagger against A-dagger A; the multisets coincide."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square operator")
    left = np.linalg.eigvalsh(a @ a.conj().T)
    right = np.linalg.eigvalsh(a.conj().T @ a)
    gap = float(np.max(np.abs(left - right))) if a.shape[0] else 0.0
    assert gap < 1e-10, gap
    return SpectrumReport(left=tuple(map(float, left)),
                          right=tuple(map(float, right)), max_gap=gap)
