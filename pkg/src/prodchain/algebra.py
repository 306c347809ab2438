"""Ring, lattice and pairing-group arithmetic.

Two independent layers live here:

* the polynomial ring ``Z_q[X]/(X^n + 1)`` together with integer lattice
  bases, used for key derivation and hashing;
* a prime-order cyclic group with a symmetric bilinear map, used by the
  signcryption keys.

The default pairing realization is *transparent*: a group element ``aP`` is
stored as the scalar ``a`` and ``e(aP, bP) = g^(ab) mod p``. It is bilinear and
non-degenerate, which is all the protocol needs to be checked end to end, but
discrete logs are trivial so it offers no security. Treat it as test-grade.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for n < 3.3e24
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# Polynomial ring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RingParams:
    q: int
    n: int

    def __post_init__(self):
        if self.n < 4 or self.n & (self.n - 1):
            raise ValueError(f"ring degree must be a power of two >= 4, got {self.n}")
        if not _is_prime(self.q):
            raise ValueError(f"modulus {self.q} is not prime")
        if self.q % (2 * self.n) != 1:
            raise ValueError(f"modulus {self.q} is not 1 mod 2n = {2 * self.n}")


DEFAULT_RING = RingParams(q=12289, n=256)
TEST_RING = RingParams(q=17, n=4)


@dataclass(frozen=True)
class RingElement:
    params: RingParams
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.params.n:
            raise ValueError(f"expected {self.params.n} coefficients, got {len(self.coeffs)}")
        if any(not 0 <= c < self.params.q for c in self.coeffs):
            raise ValueError("coefficients must lie in [0, q)")

    @classmethod
    def from_ints(cls, params: RingParams, values: Sequence[int]) -> RingElement:
        """Build an element from arbitrary integers, reducing mod q and padding with zeros."""
        if len(values) > params.n:
            raise ValueError(f"too many coefficients for degree {params.n}")
        padded = list(values) + [0] * (params.n - len(values))
        return cls(params, tuple(int(v) % params.q for v in padded))

    @classmethod
    def zero(cls, params: RingParams) -> RingElement:
        return cls(params, (0,) * params.n)

    @classmethod
    def one(cls, params: RingParams) -> RingElement:
        return cls.from_ints(params, [1])

    @classmethod
    def monomial(cls, params: RingParams, degree: int, coeff: int = 1) -> RingElement:
        values = [0] * params.n
        values[degree] = coeff
        return cls.from_ints(params, values)

    def __neg__(self) -> RingElement:
        q = self.params.q
        return RingElement(self.params, tuple((-c) % q for c in self.coeffs))

    def __add__(self, other: RingElement) -> RingElement:
        return ring_add(self, other)

    def __mul__(self, other: RingElement) -> RingElement:
        return ring_mul(self, other)

    def to_bytes(self) -> bytes:
        if self.params.q > 1 << 16:
            raise ValueError("16-bit residue encoding needs q <= 65536")
        return struct.pack(f"<{self.params.n}H", *self.coeffs)

    @classmethod
    def from_bytes(cls, params: RingParams, data: bytes) -> RingElement:
        if len(data) != 2 * params.n:
            raise ValueError(f"expected {2 * params.n} bytes, got {len(data)}")
        return cls(params, struct.unpack(f"<{params.n}H", data))


@dataclass(frozen=True)
class SmallRingElement:
    """Element of R_q whose coefficients are all in {-1, 0, 1}."""

    params: RingParams
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.params.n:
            raise ValueError(f"expected {self.params.n} coefficients, got {len(self.coeffs)}")
        if any(c not in (-1, 0, 1) for c in self.coeffs):
            raise ValueError("small ring coefficients must be in {-1, 0, 1}")

    def lift(self) -> RingElement:
        return RingElement.from_ints(self.params, self.coeffs)


def _check_same(a, b):
    if a.params != b.params:
        raise ValueError(f"ring parameter mismatch: {a.params} vs {b.params}")


def ring_add(a: RingElement, b: RingElement) -> RingElement:
    _check_same(a, b)
    q = a.params.q
    return RingElement(a.params, tuple((x + y) % q for x, y in zip(a.coeffs, b.coeffs)))


def ring_sub(a: RingElement, b: RingElement) -> RingElement:
    _check_same(a, b)
    q = a.params.q
    return RingElement(a.params, tuple((x - y) % q for x, y in zip(a.coeffs, b.coeffs)))


def ring_mul(a: RingElement, b: RingElement) -> RingElement:
    """Negacyclic product: full convolution folded with X^n = -1."""
    _check_same(a, b)
    n, q = a.params.n, a.params.q
    if n * (q - 1) ** 2 < 2**62:
        full = np.convolve(np.array(a.coeffs, dtype=np.int64), np.array(b.coeffs, dtype=np.int64))
        full = np.concatenate([full, np.zeros(1, dtype=np.int64)])
        folded = (full[:n] - full[n:]) % q
        return RingElement(a.params, tuple(int(c) for c in folded))
    out = [0] * n
    for i, x in enumerate(a.coeffs):
        if not x:
            continue
        for j, y in enumerate(b.coeffs):
            k = i + j
            if k < n:
                out[k] += x * y
            else:
                out[k - n] -= x * y
    return RingElement(a.params, tuple(c % q for c in out))


def _xof(seed: bytes, label: bytes, length: int) -> bytes:
    return hashlib.shake_256(label + len(seed).to_bytes(4, "big") + seed).digest(length)


def sample_small(seed: bytes, params: RingParams = DEFAULT_RING) -> SmallRingElement:
    """Deterministically sample a uniform {-1, 0, 1} polynomial from ``seed``."""
    if not seed:
        raise ValueError("seed must be nonempty")
    coeffs: list[int] = []
    counter = 0
    while len(coeffs) < params.n:
        block = _xof(seed + counter.to_bytes(4, "big"), b"prodchain/small", 2 * params.n)
        # bytes >= 255 are rejected so that byte % 3 is exactly uniform
        coeffs.extend(b % 3 - 1 for b in block if b < 255)
        counter += 1
    return SmallRingElement(params, tuple(coeffs[: params.n]))


# ---------------------------------------------------------------------------
# Integer lattices
# ---------------------------------------------------------------------------

BASIS_DIM = 8
_BASIS_BOUND = 8


def integer_determinant(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    m = [list(map(int, r)) for r in rows]
    size = len(m)
    if any(len(r) != size for r in m):
        raise ValueError("matrix must be square")
    sign, prev = 1, 1
    for k in range(size - 1):
        if m[k][k] == 0:
            for i in range(k + 1, size):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[-1][-1] if size else 1


@dataclass(frozen=True)
class LatticeBasis:
    vectors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        m = len(self.vectors)
        if m == 0 or any(len(v) != m for v in self.vectors):
            raise ValueError("basis must be a nonempty m x m integer matrix")
        if integer_determinant(self.vectors) == 0:
            raise ValueError("basis vectors are linearly dependent")

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def to_bytes(self) -> bytes:
        flat = [x for v in self.vectors for x in v]
        return struct.pack(f">H{len(flat)}q", self.dim, *flat)


def basis_from_seed(seed: bytes, dim: int = BASIS_DIM) -> LatticeBasis:
    """Full-rank integer basis with entries in [-8, 8], derived from ``seed``."""
    if not seed:
        raise ValueError("seed must be nonempty")
    span = 2 * _BASIS_BOUND + 1
    counter = 0
    while True:
        raw = _xof(seed + counter.to_bytes(4, "big"), b"prodchain/basis", 2 * dim * dim)
        entries = [int.from_bytes(raw[i : i + 2], "big") % span - _BASIS_BOUND for i in range(0, len(raw), 2)]
        rows = tuple(tuple(entries[r * dim : (r + 1) * dim]) for r in range(dim))
        if integer_determinant(rows) != 0:
            return LatticeBasis(rows)
        counter += 1


def lattice_point(basis: LatticeBasis, x: Sequence[int]) -> tuple[int, ...]:
    """Integer combination sum_i x_i * b_i."""
    if len(x) != basis.dim:
        raise ValueError(f"coefficient vector has dimension {len(x)}, basis has {basis.dim}")
    out = [0] * basis.dim
    for xi, b in zip(x, basis.vectors):
        if xi:
            for j, bj in enumerate(b):
                out[j] += xi * bj
    return tuple(out)


# ---------------------------------------------------------------------------
# Prime-order group with a symmetric pairing (transparent realization)
# ---------------------------------------------------------------------------

GROUP_ORDER = 2**64 - 59
TARGET_MODULUS = 6 * GROUP_ORDER + 1
TARGET_GENERATOR = 64


@dataclass(frozen=True)
class GroupScalar:
    value: int
    order: int = GROUP_ORDER

    def __post_init__(self):
        if not 0 <= self.value < self.order:
            raise ValueError(f"scalar {self.value} outside [0, {self.order})")

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(8, "little")


@dataclass(frozen=True)
class GroupElement:
    """The element ``value * P`` of the additive cyclic group of prime ``order``."""

    value: int
    order: int = GROUP_ORDER

    def __post_init__(self):
        if not 0 <= self.value < self.order:
            raise ValueError(f"group element {self.value} outside [0, {self.order})")

    def __add__(self, other: GroupElement) -> GroupElement:
        if self.order != other.order:
            raise ValueError("group order mismatch")
        return GroupElement((self.value + other.value) % self.order, self.order)

    def __neg__(self) -> GroupElement:
        return GroupElement((-self.value) % self.order, self.order)

    def __rmul__(self, k: int) -> GroupElement:
        return GroupElement(int(k) * self.value % self.order, self.order)

    def is_identity(self) -> bool:
        return self.value == 0

    def to_bytes(self) -> bytes:
        if self.order >= 1 << 64:
            raise ValueError("8-byte element encoding needs order < 2^64")
        return self.value.to_bytes(8, "little")

    @classmethod
    def from_bytes(cls, data: bytes, order: int = GROUP_ORDER) -> GroupElement:
        if len(data) != 8:
            raise ValueError(f"group element encoding is 8 bytes, got {len(data)}")
        return cls(int.from_bytes(data, "little"), order)


@dataclass(frozen=True)
class PairingOutput:
    value: int
    modulus: int

    def __mul__(self, other: PairingOutput) -> PairingOutput:
        if self.modulus != other.modulus:
            raise ValueError("target group mismatch")
        return PairingOutput(self.value * other.value % self.modulus, self.modulus)

    def __pow__(self, k: int) -> PairingOutput:
        return PairingOutput(pow(self.value, k, self.modulus), self.modulus)

    def is_identity(self) -> bool:
        return self.value == 1


@dataclass(frozen=True)
class PairingGroup:
    """A prime-order group plus an order-``order`` subgroup of ``Z_modulus^*`` as target."""

    order: int = GROUP_ORDER
    modulus: int = TARGET_MODULUS
    target_generator: int = TARGET_GENERATOR

    def __post_init__(self):
        if not _is_prime(self.order) or not _is_prime(self.modulus):
            raise ValueError("group order and target modulus must be prime")
        if (self.modulus - 1) % self.order:
            raise ValueError("order must divide modulus - 1")
        g = self.target_generator % self.modulus
        if g in (0, 1) or pow(g, self.order, self.modulus) != 1:
            raise ValueError("target generator must have order exactly `order`")

    @property
    def generator(self) -> GroupElement:
        return GroupElement(1, self.order)

    def element(self, k: int) -> GroupElement:
        return GroupElement(int(k) % self.order, self.order)

    def scalar(self, k: int) -> GroupScalar:
        return GroupScalar(int(k) % self.order, self.order)

    def pair(self, a: GroupElement, b: GroupElement) -> PairingOutput:
        if a.order != self.order or b.order != self.order:
            raise ValueError("pairing inputs must come from groups of the same order")
        exponent = a.value * b.value % self.order
        return PairingOutput(pow(self.target_generator, exponent, self.modulus), self.modulus)


DEFAULT_GROUP = PairingGroup()
# order 101 inside Z_607^*; small enough for exhaustive tests
TEST_GROUP = PairingGroup(order=101, modulus=607, target_generator=pow(2, 6, 607))


def pairing_eval(a: GroupElement, b: GroupElement, group: PairingGroup = DEFAULT_GROUP) -> PairingOutput:
    return group.pair(a, b)
