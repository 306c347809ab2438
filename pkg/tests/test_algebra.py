import random

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from prodchain.algebra import (
    DEFAULT_GROUP,
    DEFAULT_RING,
    GROUP_ORDER,
    TARGET_GENERATOR,
    TARGET_MODULUS,
    TEST_GROUP,
    TEST_RING,
    GroupElement,
    LatticeBasis,
    PairingGroup,
    RingElement,
    RingParams,
    SmallRingElement,
    _is_prime,
    basis_from_seed,
    integer_determinant,
    lattice_point,
    pairing_eval,
    ring_add,
    ring_mul,
    ring_sub,
    sample_small,
)


def schoolbook(a, b, n, q):
    """Full product, then X^n = -1 folded in one coefficient at a time."""
    prod = [0] * (2 * n)
    for i in range(n):
        for j in range(n):
            prod[i + j] += a[i] * b[j]
    for k in range(2 * n - 1, n - 1, -1):
        prod[k - n] -= prod[k]
    return [c % q for c in prod[:n]]


def elems(params):
    coeffs = st.lists(st.integers(0, params.q - 1), min_size=params.n, max_size=params.n)
    return coeffs.map(lambda c: RingElement(params, tuple(c)))


# -- ring --------------------------------------------------------------------


@pytest.mark.parametrize("q,n", [(17, 4), (97, 8), (12289, 256), (7681, 256)])
def test_ring_params_accepts_ntt_friendly(q, n):
    assert RingParams(q, n).n == n


@pytest.mark.parametrize("q,n", [(15, 4), (19, 4), (17, 6), (17, 2), (13, 4)])
def test_ring_params_rejects(q, n):
    with pytest.raises(ValueError):
        RingParams(q, n)


def test_negacyclic_identity_every_ring():
    for params in (TEST_RING, RingParams(97, 8), DEFAULT_RING):
        n = params.n
        got = ring_mul(RingElement.monomial(params, n - 1), RingElement.monomial(params, 1))
        assert got == -RingElement.one(params)


def test_ring_mul_known_small_product():
    # (1 + X)(1 + X^3) = 1 + X + X^3 + X^4 = X + X^3 (mod X^4 + 1)
    a = RingElement.from_ints(TEST_RING, [1, 1])
    b = RingElement.from_ints(TEST_RING, [1, 0, 0, 1])
    assert ring_mul(a, b).coeffs == (0, 1, 0, 1)


def test_ring_mul_matches_schoolbook_default_ring():
    rng = random.Random(5)
    for _ in range(5):
        a = [rng.randrange(12289) for _ in range(256)]
        b = [rng.randrange(12289) for _ in range(256)]
        got = ring_mul(RingElement(DEFAULT_RING, tuple(a)), RingElement(DEFAULT_RING, tuple(b)))
        assert list(got.coeffs) == schoolbook(a, b, 256, 12289)


def test_ring_mul_python_fallback_large_modulus():
    # n * (q - 1)^2 exceeds int64, so the pure-Python path runs
    params = RingParams(q=2147483713, n=4)
    rng = random.Random(1)
    for _ in range(20):
        a = [rng.randrange(params.q) for _ in range(4)]
        b = [rng.randrange(params.q) for _ in range(4)]
        got = ring_mul(RingElement(params, tuple(a)), RingElement(params, tuple(b)))
        assert list(got.coeffs) == schoolbook(a, b, 4, params.q)


@given(elems(TEST_RING), elems(TEST_RING), elems(TEST_RING))
def test_ring_axioms(a, b, c):
    assert ring_mul(a, b) == ring_mul(b, a)
    assert ring_mul(ring_mul(a, b), c) == ring_mul(a, ring_mul(b, c))
    assert ring_mul(a, ring_add(b, c)) == ring_add(ring_mul(a, b), ring_mul(a, c))
    assert ring_sub(ring_add(a, b), b) == a
    assert ring_mul(a, RingElement.one(TEST_RING)) == a
    assert a + (-a) == RingElement.zero(TEST_RING)


def test_ring_mismatched_params():
    with pytest.raises(ValueError):
        ring_mul(RingElement.one(TEST_RING), RingElement.one(RingParams(97, 8)))


def test_ring_element_validation():
    with pytest.raises(ValueError):
        RingElement(TEST_RING, (0, 0, 0))
    with pytest.raises(ValueError):
        RingElement(TEST_RING, (0, 0, 0, 17))
    with pytest.raises(ValueError):
        RingElement.from_ints(TEST_RING, [1] * 5)


@given(elems(DEFAULT_RING))
def test_ring_bytes_round_trip(a):
    data = a.to_bytes()
    assert len(data) == 512
    assert RingElement.from_bytes(DEFAULT_RING, data) == a


def test_ring_encoding_is_little_endian_16_bit():
    a = RingElement.from_ints(DEFAULT_RING, [1, 258, 0, 12288])
    assert a.to_bytes()[:8] == bytes([1, 0, 2, 1, 0, 0, 0x00, 0x30])


def test_sample_small_deterministic_and_ternary():
    s = sample_small(b"seed")
    assert s == sample_small(b"seed")
    assert s != sample_small(b"seed2")
    assert set(s.coeffs) <= {-1, 0, 1}
    assert len(s.coeffs) == 256
    counts = [s.coeffs.count(v) for v in (-1, 0, 1)]
    assert min(counts) > 50  # roughly uniform over 256 draws


def test_sample_small_rejects_empty_seed():
    with pytest.raises(ValueError):
        sample_small(b"")


def test_small_element_lift():
    s = SmallRingElement(TEST_RING, (-1, 0, 1, -1))
    assert s.lift().coeffs == (16, 0, 1, 16)
    with pytest.raises(ValueError):
        SmallRingElement(TEST_RING, (2, 0, 0, 0))


# -- lattices ------------------------------------------------------------------


@given(st.lists(st.lists(st.integers(-20, 20), min_size=5, max_size=5), min_size=5, max_size=5))
def test_integer_determinant_matches_sympy(rows):
    assert integer_determinant(rows) == sympy.Matrix(rows).det()


def test_integer_determinant_needs_pivot_swap():
    rows = [[0, 1, 2], [1, 0, 3], [4, -3, 8]]
    assert integer_determinant(rows) == sympy.Matrix(rows).det()


def test_basis_from_seed_full_rank_and_bounded():
    b = basis_from_seed(b"acme")
    assert b.dim == 8
    assert sympy.Matrix(b.vectors).det() != 0
    assert all(-8 <= x <= 8 for v in b.vectors for x in v)
    assert b == basis_from_seed(b"acme")
    assert b != basis_from_seed(b"acme!")


def test_lattice_basis_rejects_singular():
    with pytest.raises(ValueError):
        LatticeBasis(((1, 2), (2, 4)))
    with pytest.raises(ValueError):
        LatticeBasis(((1, 2, 3), (0, 1, 1)))


def test_lattice_point_is_row_combination():
    b = LatticeBasis(((1, 0), (1, 2)))
    assert lattice_point(b, (3, -1)) == (2, -2)
    with pytest.raises(ValueError):
        lattice_point(b, (1,))


def test_basis_encoding_length():
    b = basis_from_seed(b"x", 4)
    assert len(b.to_bytes()) == 2 + 16 * 8


# -- group and pairing ---------------------------------------------------------


def test_group_parameters_are_prime():
    assert sympy.isprime(GROUP_ORDER)
    assert sympy.isprime(TARGET_MODULUS)
    assert (TARGET_MODULUS - 1) % GROUP_ORDER == 0
    assert pow(TARGET_GENERATOR, GROUP_ORDER, TARGET_MODULUS) == 1
    assert TARGET_GENERATOR % TARGET_MODULUS != 1


@given(st.integers(2, 10**6))
def test_is_prime_matches_sympy(n):
    assert _is_prime(n) == sympy.isprime(n)


def test_pairing_group_validation():
    with pytest.raises(ValueError):
        PairingGroup(order=100, modulus=607, target_generator=64)
    with pytest.raises(ValueError):
        PairingGroup(order=101, modulus=607, target_generator=1)
    with pytest.raises(ValueError):
        PairingGroup(order=101, modulus=607, target_generator=3)  # 3 has order 606


def test_pairing_bilinear_exhaustive_small_group():
    g = TEST_GROUP
    P = g.generator
    base = g.pair(P, P)
    for a in range(g.order):
        for b in range(0, g.order, 7):
            assert g.pair(a * P, b * P) == base ** (a * b)


def test_pairing_non_degenerate_and_symmetric():
    P = DEFAULT_GROUP.generator
    assert not DEFAULT_GROUP.pair(P, P).is_identity()
    a, b = DEFAULT_GROUP.element(123456789), DEFAULT_GROUP.element(987654321)
    assert pairing_eval(a, b) == pairing_eval(b, a)
    assert DEFAULT_GROUP.pair(a + b, P) == DEFAULT_GROUP.pair(a, P) * DEFAULT_GROUP.pair(b, P)


def test_pairing_rejects_order_mismatch():
    with pytest.raises(ValueError):
        DEFAULT_GROUP.pair(DEFAULT_GROUP.generator, TEST_GROUP.generator)


def test_group_element_arithmetic():
    P = TEST_GROUP.generator
    assert (100 * P + P).is_identity()
    assert (-(3 * P)).value == 98
    with pytest.raises(ValueError):
        GroupElement(101, 101)
    with pytest.raises(ValueError):
        P + DEFAULT_GROUP.generator


@given(st.integers(0, GROUP_ORDER - 1))
def test_group_element_bytes_round_trip(k):
    e = DEFAULT_GROUP.element(k)
    assert GroupElement.from_bytes(e.to_bytes()) == e


def test_group_element_decode_rejects_out_of_range():
    with pytest.raises(ValueError):
        GroupElement.from_bytes((2**64 - 1).to_bytes(8, "little"))
    with pytest.raises(ValueError):
        GroupElement.from_bytes(b"\x00" * 7)
