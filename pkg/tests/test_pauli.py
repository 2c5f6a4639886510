import numpy as np
import pytest

from spinlab.pauli import (
    Block, PauliString, SIGMA, ID2, SIGMA1, SIGMA3,
    embed, apply_string, string_perm_phase, strings_commute,
    partial_trace, reduce_vector, dm_from_vector, expectation, expect_string,
    check_density_matrix, basis_state, plus_x_state, random_state,
    random_density_matrix,
)


def kron_embed(s: PauliString, b: Block) -> np.ndarray:
    """Independent dense oracle: explicit tensor product, ascending site order."""
    m = np.array([[1.0 + 0j]])
    for x in b.sites:
        m = np.kron(m, SIGMA[s.axis_at(x)])
    return m


def random_string(rng, b: Block) -> PauliString:
    pairs = []
    for x in b.sites:
        a = rng.integers(0, 4)
        if a:
            pairs.append((x, int(a)))
    return PauliString(tuple(pairs))


# ---------------------------------------------------------------- blocks

def test_block_validation():
    with pytest.raises(ValueError):
        Block((3, 1))
    with pytest.raises(ValueError):
        Block((1, 1))
    assert Block.interval(-2, 2).sites == (-2, -1, 0, 1, 2)
    assert Block.centered(5).sites == (-2, -1, 0, 1, 2)
    assert Block.centered(4).sites == (-1, 0, 1, 2)
    assert Block.centered(20).sites == tuple(range(-9, 11))
    assert Block.interval(0, 1).position(1) == 1
    with pytest.raises(KeyError):
        Block.interval(0, 1).position(5)


# ----------------------------------------------------------------- embed

def test_embed_examples():
    b1 = Block((0,))
    assert np.array_equal(embed(PauliString.identity(), b1), ID2)
    assert np.array_equal(embed(PauliString.single(0, 1), b1), SIGMA1)
    b2 = Block((0, 1))
    zz = embed(PauliString(((0, 3), (1, 3))), b2)
    assert np.array_equal(zz, np.diag([1, -1, -1, 1]).astype(complex))


def test_embed_outside_block():
    with pytest.raises(ValueError):
        embed(PauliString.single(7, 1), Block((0, 1)))
    with pytest.raises(ValueError):
        apply_string(PauliString.single(7, 1), Block((0, 1)), np.zeros(4))


def test_embed_matches_kron_oracle():
    rng = np.random.default_rng(7)
    for _ in range(60):
        lo = int(rng.integers(-3, 1))
        b = Block.interval(lo, lo + int(rng.integers(0, 4)))
        s = random_string(rng, b)
        assert np.allclose(embed(s, b), kron_embed(s, b), atol=1e-14)


def test_embedded_strings_are_hermitian_unitary_involutions():
    rng = np.random.default_rng(11)
    for _ in range(40):
        b = Block.interval(0, int(rng.integers(0, 4)))
        s = random_string(rng, b)
        m = embed(s, b)
        assert np.allclose(m, m.conj().T, atol=1e-14)
        assert np.allclose(m @ m, np.eye(b.dim), atol=1e-14)
        if s.factors:
            assert abs(np.trace(m)) < 1e-14


def test_apply_string_matches_dense():
    rng = np.random.default_rng(3)
    b = Block.interval(-1, 2)
    for _ in range(25):
        s = random_string(rng, b)
        v = random_state(rng, b.dim)
        assert np.allclose(apply_string(s, b, v), embed(s, b) @ v, atol=1e-13)


def test_perm_phase_is_involution():
    b = Block.interval(0, 2)
    s = PauliString(((0, 2), (1, 1), (2, 3)))
    perm, phase = string_perm_phase(s, b)
    assert np.array_equal(perm[perm], np.arange(b.dim))


# ------------------------------------------------------------ commutation

def test_commute_parity_rule_vs_dense():
    rng = np.random.default_rng(23)
    b = Block.interval(0, 3)
    for _ in range(200):
        s1, s2 = random_string(rng, b), random_string(rng, b)
        m1, m2 = embed(s1, b), embed(s2, b)
        dense = np.allclose(m1 @ m2, m2 @ m1, atol=1e-13)
        assert strings_commute(s1, s2) == dense


# ---------------------------------------------------------- partial trace

def test_partial_trace_product_state():
    rng = np.random.default_rng(5)
    r1 = random_density_matrix(rng, 2)
    r2 = random_density_matrix(rng, 4)
    rho = np.kron(r1, r2)
    b = Block((0, 1, 2))
    assert np.allclose(partial_trace(rho, b, Block((0,))), r1, atol=1e-13)
    assert np.allclose(partial_trace(rho, b, Block((1, 2))), r2, atol=1e-13)


def test_partial_trace_bell_state():
    b = Block((0, 1))
    v = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    red = partial_trace(dm_from_vector(v), b, Block((0,)))
    assert np.allclose(red, np.eye(2) / 2, atol=1e-14)


def test_partial_trace_keep_all_and_errors():
    rng = np.random.default_rng(9)
    b = Block((0, 1))
    rho = random_density_matrix(rng, 4)
    assert np.allclose(partial_trace(rho, b, b), rho)
    with pytest.raises(ValueError):
        partial_trace(rho, b, Block((5,)))


def test_partial_trace_preserves_dm_invariants():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        k = int(rng.integers(2, 7))
        b = Block.interval(0, k - 1)
        rho = random_density_matrix(rng, b.dim, rank=int(rng.integers(1, b.dim + 1)))
        keep_sites = sorted(rng.choice(k, size=int(rng.integers(1, k)), replace=False))
        red = partial_trace(rho, b, Block(tuple(int(x) for x in keep_sites)))
        check_density_matrix(red)  # raises on any violation


def test_partial_trace_compatibility_with_embed():
    # expectation of an observable supported in `keep` is unchanged by reduction
    rng = np.random.default_rng(31)
    b = Block.interval(0, 4)
    keep = Block((1, 3))
    for _ in range(30):
        rho = random_density_matrix(rng, b.dim)
        s = random_string(rng, keep)
        full = expectation(rho, embed(s, b))
        red = expectation(partial_trace(rho, b, keep), embed(s, keep))
        assert abs(full - red) < 1e-10


def test_reduce_vector_matches_partial_trace():
    rng = np.random.default_rng(13)
    b = Block.interval(-2, 2)
    for _ in range(20):
        v = random_state(rng, b.dim)
        keep = Block((-1, 2))
        assert np.allclose(
            reduce_vector(v, b, keep),
            partial_trace(dm_from_vector(v), b, keep),
            atol=1e-13,
        )


# ----------------------------------------------------------- expectations

def test_expectation_examples():
    b = Block((0, 1))
    rho = np.eye(4, dtype=complex) / 4
    assert abs(expectation(rho, embed(PauliString.single(0, 3), b))) < 1e-14

    v = plus_x_state(3)
    b3 = Block.centered(3)
    assert abs(expectation(v, embed(PauliString.single(0, 1), b3)) - 1) < 1e-12
    assert abs(expectation(v, embed(PauliString.single(0, 3), b3))) < 1e-14
    assert abs(expect_string(v, b3, PauliString.single(0, 1)) - 1) < 1e-12


def test_expectation_hermitian_real_and_bounded():
    rng = np.random.default_rng(17)
    b = Block.interval(0, 2)
    for _ in range(20):
        rho = random_density_matrix(rng, b.dim)
        s = random_string(rng, b)
        val = expectation(rho, embed(s, b))
        assert abs(val.imag) < 1e-12
        assert abs(val) <= 1 + 1e-12


def test_expectation_shape_mismatch():
    with pytest.raises(ValueError):
        expectation(np.zeros(4), np.eye(8))


# ------------------------------------------------------- density matrices

def test_dm_from_vector_examples():
    assert np.array_equal(dm_from_vector(np.array([1, 0], dtype=complex)), np.diag([1, 0]).astype(complex))
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    assert np.allclose(dm_from_vector(plus), np.full((2, 2), 0.5), atol=1e-15)
    rng = np.random.default_rng(1)
    v = random_state(rng, 8)
    p = dm_from_vector(v)
    assert np.allclose(p @ p, p, atol=1e-12)
    with pytest.raises(ValueError):
        dm_from_vector(np.array([1.0, 1.0]))


def test_check_density_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        check_density_matrix(np.array([[0.5, 0.5], [0.0, 0.5]]))  # not Hermitian
    with pytest.raises(ValueError):
        check_density_matrix(np.eye(2))  # trace 2
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.5, -0.5]))  # negative eigenvalue


def test_basis_state_bit_layout():
    b = Block((0, 1))
    v = basis_state(b, [1, 0])  # site 0 down, site 1 up -> index 0b10
    assert v[2] == 1
    zz = embed(PauliString(((0, 3),)), b)
    assert expectation(v, zz) == pytest.approx(-1)
