"""Finite-block Pauli algebra on a chain of spin-1/2 sites.

Conventions used by every other module:

* A block is an ascending tuple of signed lattice coordinates.  The tensor
  product is laid out in ascending site order, leftmost factor = smallest
  site.  For a block of k sites, the basis index i in [0, 2^k) carries the
  local basis state of the site at position p in bit (k-1-p) of i, so the
  smallest site owns the most significant bit.
* Local basis: |0> is the +1 eigenvector of sigma^3, |1> the -1 eigenvector.
* Pauli strings are sparse maps site -> axis in {1,2,3}; the empty string is
  the identity.  Embedded strings are generalized permutation matrices, and
  most routines exploit that instead of building dense factors.

Only two-dimensional on-site algebras are exercised; LOCAL_DIM exists so the
dimension shows up by name in entropy bounds rather than as a bare 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

LOCAL_DIM = 2

ID2 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA = {0: ID2, 1: SIGMA1, 2: SIGMA2, 3: SIGMA3}

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-12


# --------------------------------------------------------------------------
# blocks and strings
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    """Ascending tuple of distinct lattice sites; owns the tensor layout."""

    sites: tuple[int, ...]

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if list(sites) != sorted(set(sites)):
            raise ValueError(f"block sites must be distinct and ascending: {sites}")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def interval(cls, lo: int, hi: int) -> "Block":
        """Closed interval [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        return cls(tuple(range(lo, hi + 1)))

    @classmethod
    def centered(cls, n_sites: int) -> "Block":
        """Interval of n_sites sites around the origin, [-n, n] for odd n_sites.

        Even sizes take one extra site on the right, [-(n-1), n].
        """
        if n_sites < 1:
            raise ValueError("need at least one site")
        lo = -((n_sites - 1) // 2)
        return cls.interval(lo, lo + n_sites - 1)

    @property
    def size(self) -> int:
        return len(self.sites)

    @property
    def dim(self) -> int:
        return LOCAL_DIM ** self.size

    def position(self, site: int) -> int:
        try:
            return self.sites.index(site)
        except ValueError:
            raise KeyError(f"site {site} not in block {self.sites}") from None

    def __contains__(self, site: int) -> bool:
        return site in self.sites

    def issubset(self, other: "Block") -> bool:
        return set(self.sites) <= set(other.sites)


@dataclass(frozen=True)
class PauliString:
    """Sparse product of on-site sigma^1/sigma^2/sigma^3 factors."""

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple(sorted((int(x), int(a)) for x, a in self.factors))
        sites = [x for x, _ in pairs]
        if len(sites) != len(set(sites)):
            raise ValueError(f"site repeated in Pauli string: {pairs}")
        if any(a not in (1, 2, 3) for _, a in pairs):
            raise ValueError(f"axes must be 1, 2 or 3: {pairs}")
        object.__setattr__(self, "factors", pairs)

    @classmethod
    def from_map(cls, m: Mapping[int, int]) -> "PauliString":
        return cls(tuple(m.items()))

    @classmethod
    def single(cls, site: int, axis: int) -> "PauliString":
        return cls(((site, axis),))

    @classmethod
    def identity(cls) -> "PauliString":
        return cls(())

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(x for x, _ in self.factors)

    def axis_at(self, site: int) -> int:
        """Axis acting at `site`, 0 if the string is the identity there."""
        for x, a in self.factors:
            if x == site:
                return a
        return 0

    def translated(self, dx: int) -> "PauliString":
        return PauliString(tuple((x + dx, a) for x, a in self.factors))


def strings_commute(s1: PauliString, s2: PauliString) -> bool:
    """Strings commute iff they anticommute on an even number of shared sites."""
    clashes = 0
    for x, a in s1.factors:
        b = s2.axis_at(x)
        if b and b != a:
            clashes += 1
    return clashes % 2 == 0


# --------------------------------------------------------------------------
# embedding into a block
# --------------------------------------------------------------------------

def string_perm_phase(s: PauliString, b: Block) -> tuple[np.ndarray, np.ndarray]:
    """Generalized-permutation form of an embedded string.

    Returns (perm, phase) with embed(s, b)[i, perm[i]] = phase[i] and all
    other entries zero.  perm is an involution (strings square to identity).
    """
    k = b.size
    dim = b.dim
    idx = np.arange(dim, dtype=np.int64)
    flip = 0
    phase = np.ones(dim, dtype=complex)
    for x, a in s.factors:
        shift = k - 1 - b.position(x)
        bit = (idx >> shift) & 1
        if a == 1:
            flip |= 1 << shift
        elif a == 2:
            flip |= 1 << shift
            phase = phase * np.where(bit == 1, 1j, -1j)
        else:
            phase = phase * np.where(bit == 1, -1.0, 1.0)
    return idx ^ flip, phase


def embed(s: PauliString, b: Block) -> np.ndarray:
    """Dense matrix of the string on the block (ascending tensor layout)."""
    for x in s.support:
        if x not in b:
            raise ValueError(f"string site {x} outside block {b.sites}")
    perm, phase = string_perm_phase(s, b)
    m = np.zeros((b.dim, b.dim), dtype=complex)
    m[np.arange(b.dim), perm] = phase
    return m


def apply_string(s: PauliString, b: Block, v: np.ndarray) -> np.ndarray:
    """embed(s, b) @ v without building the matrix."""
    for x in s.support:
        if x not in b:
            raise ValueError(f"string site {x} outside block {b.sites}")
    perm, phase = string_perm_phase(s, b)
    return phase * v[perm]


# --------------------------------------------------------------------------
# states and density matrices
# --------------------------------------------------------------------------

def check_state_vector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n2 = float(np.vdot(v, v).real)
    if abs(n2 - 1.0) > 1e-12:
        raise ValueError(f"state vector not normalized: |v|^2 = {n2!r}")
    return v

def check_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; returns symmetrized rho."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm_gap = float(np.max(np.abs(rho - rho.conj().T)))
    if herm_gap > HERMITICITY_TOL:
        raise ValueError(f"density matrix not Hermitian: max |rho - rho^+| = {herm_gap:g}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix trace {tr!r} != 1")
    sym = 0.5 * (rho + rho.conj().T)
    evals = np.linalg.eigvalsh(sym)
    if float(evals.min()) < EIGENVALUE_FLOOR:
        raise ValueError(f"density matrix has negative eigenvalue {evals.min():g}")
    return sym


def dm_from_vector(v: np.ndarray) -> np.ndarray:
    v = check_state_vector(v)
    return np.outer(v, v.conj())


def expectation(state: np.ndarray, a: np.ndarray) -> complex:
    """<A> in a state vector (1d) or density matrix (2d)."""
    state = np.asarray(state)
    a = np.asarray(a)
    dim = state.shape[0]
    if a.shape != (dim, dim):
        raise ValueError(f"operator shape {a.shape} does not match state dim {dim}")
    if state.ndim == 1:
        return complex(np.vdot(state, a @ state))
    if state.ndim == 2:
        return complex(np.trace(state @ a))
    raise ValueError(f"state must be a vector or a matrix, got ndim={state.ndim}")


def expect_string(v: np.ndarray, b: Block, s: PauliString) -> complex:
    """<v| sigma^s |v> through the permutation form; O(2^k)."""
    return complex(np.vdot(v, apply_string(s, b, v)))


def _positions(block: Block, keep: Block) -> list[int]:
    if not keep.issubset(block):
        raise ValueError(f"block {keep.sites} not contained in {block.sites}")
    return [block.position(x) for x in keep.sites]


def partial_trace(rho: np.ndarray, block: Block, keep: Block) -> np.ndarray:
    """Trace out every site of `block` not in `keep`."""
    kp = _positions(block, keep)
    if len(kp) == block.size:
        return np.asarray(rho, dtype=complex)
    k = block.size
    other = [p for p in range(k) if p not in kp]
    dk = LOCAL_DIM ** len(kp)
    de = LOCAL_DIM ** len(other)
    t = np.asarray(rho, dtype=complex).reshape((LOCAL_DIM,) * (2 * k))
    order = kp + other + [k + p for p in kp] + [k + p for p in other]
    t = t.transpose(order).reshape(dk, de, dk, de)
    return np.einsum("aebe->ab", t)


def reduce_vector(v: np.ndarray, block: Block, keep: Block) -> np.ndarray:
    """Reduced density matrix of a pure state; cheaper than tracing the projector."""
    kp = _positions(block, keep)
    k = block.size
    other = [p for p in range(k) if p not in kp]
    a = np.asarray(v, dtype=complex).reshape((LOCAL_DIM,) * k)
    a = a.transpose(kp + other).reshape(LOCAL_DIM ** len(kp), LOCAL_DIM ** len(other))
    return a @ a.conj().T


# --------------------------------------------------------------------------
# simple state constructors
# --------------------------------------------------------------------------

def basis_state(b: Block, bits: Iterable[int]) -> np.ndarray:
    bits = list(bits)
    if len(bits) != b.size:
        raise ValueError("one bit per site required")
    i = 0
    for bit in bits:
        i = (i << 1) | (int(bit) & 1)
    v = np.zeros(b.dim, dtype=complex)
    v[i] = 1.0
    return v


def plus_x_state(n_sites: int) -> np.ndarray:
    """Product of +1 eigenvectors of sigma^1 on every site."""
    dim = LOCAL_DIM ** n_sites
    return np.full(dim, dim ** -0.5, dtype=complex)


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density_matrix(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Wishart-style random mixed state of the given rank (full rank by default)."""
    r = dim if rank is None else rank
    w = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    rho = w @ w.conj().T
    return rho / np.trace(rho).real
