"""Dense finite-chain Hamiltonians and exact unitary evolution.

Evolution goes through a full Hermitian eigendecomposition, traded
deliberately for exactness over speed.  A Propagator caches the eigensystem
of one (model, region) pair so that grids of times and observables reuse the
single expensive factorization; on this hardware eigh at 4096 dimensions
costs about a minute, after which each evolution is two matrix-vector
products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .couplings import InteractionSpec, coupling_value, summability
from .pauli import Block, PauliString, apply_string, embed, string_perm_phase

MAX_DENSE_SITES = 12
MAX_PULSE_SITES = 24


def model_terms(m: InteractionSpec, region: Block) -> list[tuple[float, PauliString]]:
    """Weighted Pauli strings of H = sum_{x<y} j1 (s1s1 + s2s2) + j2 s3s3."""
    terms = []
    for i, x in enumerate(region.sites):
        for y in region.sites[i + 1:]:
            j1 = coupling_value(m.j1, x - y) if m.j1 is not None else 0.0
            j2 = coupling_value(m.j2, x - y) if m.j2 is not None else 0.0
            if j1 != 0.0:
                terms.append((j1, PauliString.from_map({x: 1, y: 1})))
                terms.append((j1, PauliString.from_map({x: 2, y: 2})))
            if j2 != 0.0:
                terms.append((j2, PauliString.from_map({x: 3, y: 3})))
    return terms


def check_stability(m: InteractionSpec) -> None:
    """Summable coupling profiles only; raises where the tail diverges."""
    for spec in (m.j1, m.j2):
        if spec is not None:
            summability(spec)


def build_hamiltonian(m: InteractionSpec, region: Block) -> np.ndarray:
    if region.size > MAX_DENSE_SITES:
        raise ValueError(
            f"dense build on {region.size} sites exceeds {MAX_DENSE_SITES}")
    check_stability(m)
    h = np.zeros((region.dim, region.dim), dtype=complex)
    for coeff, s in model_terms(m, region):
        h += coeff * embed(s, region)
    return h


@dataclass(frozen=True)
class Propagator:
    """Eigendecomposition of one Hamiltonian, reused across times."""

    region: Block
    eigenvalues: np.ndarray
    basis: np.ndarray  # unitary, columns are eigenvectors

    @classmethod
    def from_hamiltonian(cls, h: np.ndarray, region: Block) -> "Propagator":
        if h.shape != (region.dim, region.dim):
            raise ValueError(f"hamiltonian shape {h.shape} does not match region dim {region.dim}")
        if np.max(np.abs(h - h.conj().T)) > 1e-10:
            raise ValueError("hamiltonian must be Hermitian")
        w, u = np.linalg.eigh(h)
        w.flags.writeable = False
        u.flags.writeable = False
        return cls(region=region, eigenvalues=w, basis=u)

    @classmethod
    def from_model(cls, m: InteractionSpec, region: Block) -> "Propagator":
        return cls.from_hamiltonian(build_hamiltonian(m, region), region)

    def evolve(self, v: np.ndarray, t: float) -> np.ndarray:
        """e^{-iHt} v."""
        v = np.asarray(v, dtype=complex)
        if v.shape != (self.region.dim,):
            raise ValueError(f"state shape {v.shape} does not match region dim {self.region.dim}")
        coeffs = self.basis.conj().T @ v
        return self.basis @ (np.exp(-1j * t * self.eigenvalues) * coeffs)

    def heisenberg_dense(self, a: np.ndarray, t: float) -> np.ndarray:
        """e^{iHt} A e^{-iHt} as an explicit matrix (four dense products)."""
        if a.shape != (self.region.dim, self.region.dim):
            raise ValueError("observable does not match region dimension")
        m = self.basis.conj().T @ a @ self.basis
        phase = np.exp(1j * t * self.eigenvalues)
        return self.basis @ (np.outer(phase, phase.conj()) * m) @ self.basis.conj().T

    def heisenberg_matvec(self, s: PauliString, t: float, v: np.ndarray) -> np.ndarray:
        """tau_t(S) v without forming the evolved operator."""
        return self.evolve(apply_string(s, self.region, self.evolve(v, t)), -t)

    def unitary(self, t: float) -> np.ndarray:
        """Dense e^{-iHt}; one matrix product, worth caching on time grids."""
        return (self.basis * np.exp(-1j * t * self.eigenvalues)) @ self.basis.conj().T


def evolve(h: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
    """One-shot e^{-iHt} v; eigendecomposes per call, prefer Propagator on grids."""
    dim = h.shape[0]
    region = Block.interval(0, int(math.log2(dim)) - 1)
    return Propagator.from_hamiltonian(h, region).evolve(v, t)


def heisenberg_picture(h: np.ndarray, a: np.ndarray, t: float) -> np.ndarray:
    dim = h.shape[0]
    region = Block.interval(0, int(math.log2(dim)) - 1)
    return Propagator.from_hamiltonian(h, region).heisenberg_dense(a, t)


def pulse_prepare(n_sites: int, theta: float = math.pi / 4) -> np.ndarray:
    """Sudden transverse pulse exp(i theta sigma^2) per site on the all-down state.

    The rotation sends |down> = (0, 1) to (sin theta, cos theta); theta = pi/4
    yields the +x-polarized product state, theta = pi/2 the full flip to +z.
    """
    if not 1 <= n_sites <= MAX_PULSE_SITES:
        raise ValueError(f"n_sites must be in [1, {MAX_PULSE_SITES}]")
    local = np.array([math.sin(theta), math.cos(theta)], dtype=complex)
    v = local
    for _ in range(n_sites - 1):
        v = np.kron(v, local)
    return v
