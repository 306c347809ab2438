"""Multi-receiver signcryption and unsigncryption.

Signcrypt, for sender key ``(K+, K-)`` and receivers ``K_1+ .. K_N+``::

    T   = rP
    y   = m XOR mask(H1(R), |m|)
    h   = H2(y, T, K_1+, ..., K_N+)
    w   = K- * h * P
    z_i = pad(R) XOR H3(T, K_i+, r * K_i+)

Receiver ``i`` recovers ``R`` from ``z_i`` with the Diffie-Hellman value
``K_i- * T``, strips the mask from ``y`` and accepts iff
``e(P, w) == e(K+, h * P)``. The signature covers ``y``, ``T`` and the ordered
receiver list; it does not cover the key wraps ``z_j``, so a damaged wrap is
only noticed by the receiver it belongs to.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Sequence

from .algebra import DEFAULT_GROUP, GroupElement, PairingGroup
from .hashing import H3_BITS, Digest, expand_mask, h1, h2, h3
from .identity import KeyPair

WIRE_VERSION = 1
PSEUDO_ID_BYTES = 32
ELEMENT_BYTES = 8
WRAP_BYTES = H3_BITS // 8


class SigncryptionError(Exception):
    pass


class VerificationError(SigncryptionError):
    """The pairing check failed: abort the transaction."""


class DeserializationError(SigncryptionError):
    """Recovered bytes do not decode to a plaintext (wrong key or damaged wrap)."""


class MalformedCiphertext(SigncryptionError):
    pass


@dataclass(frozen=True)
class Plaintext:
    d: bytes
    iden_p: Digest
    initiator_pub: GroupElement

    def __post_init__(self):
        if not self.d:
            raise ValueError("product information must be nonempty")
        if len(self.iden_p) != PSEUDO_ID_BYTES:
            raise ValueError(f"pseudo-identity must be {PSEUDO_ID_BYTES} bytes")

    def to_bytes(self) -> bytes:
        return len(self.d).to_bytes(4, "big") + self.d + self.iden_p + self.initiator_pub.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, order: int = DEFAULT_GROUP.order) -> Plaintext:
        if len(data) < 4:
            raise DeserializationError("plaintext too short")
        size = int.from_bytes(data[:4], "big")
        if size == 0 or len(data) != 4 + size + PSEUDO_ID_BYTES + ELEMENT_BYTES:
            raise DeserializationError("plaintext length prefix inconsistent")
        d = data[4 : 4 + size]
        iden = data[4 + size : 4 + size + PSEUDO_ID_BYTES]
        raw_pub = int.from_bytes(data[-ELEMENT_BYTES:], "little")
        if raw_pub >= order:
            raise DeserializationError("initiator key out of range")
        return cls(d, iden, GroupElement(raw_pub, order))


@dataclass(frozen=True)
class Ciphertext:
    t: GroupElement
    y: bytes
    w: GroupElement
    z: tuple[bytes, ...]

    def __post_init__(self):
        if not self.z:
            raise ValueError("ciphertext needs at least one key wrap")
        if any(len(zi) != WRAP_BYTES for zi in self.z):
            raise ValueError(f"every key wrap must be {WRAP_BYTES} bytes")

    def to_bytes(self) -> bytes:
        return b"".join(
            [
                bytes([WIRE_VERSION]),
                self.t.to_bytes(),
                len(self.y).to_bytes(4, "big"),
                self.y,
                self.w.to_bytes(),
                len(self.z).to_bytes(2, "big"),
                *self.z,
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes, order: int = DEFAULT_GROUP.order) -> Ciphertext:
        try:
            version, t_raw, ylen = struct.unpack_from(">B8sI", data, 0)
            if version != WIRE_VERSION:
                raise MalformedCiphertext(f"unsupported ciphertext version {version}")
            pos = 13
            y = data[pos : pos + ylen]
            if len(y) != ylen:
                raise MalformedCiphertext("truncated masked message")
            pos += ylen
            w_raw, count = struct.unpack_from(">8sH", data, pos)
            pos += 10
            if len(data) != pos + count * WRAP_BYTES:
                raise MalformedCiphertext("key wrap section has wrong length")
            z = tuple(data[pos + i * WRAP_BYTES : pos + (i + 1) * WRAP_BYTES] for i in range(count))
            return cls(GroupElement.from_bytes(t_raw, order), y, GroupElement.from_bytes(w_raw, order), z)
        except (struct.error, ValueError) as exc:
            if isinstance(exc, MalformedCiphertext):
                raise
            raise MalformedCiphertext(str(exc)) from exc

    @property
    def receiver_count(self) -> int:
        return len(self.z)


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b, strict=True))


def _mask(r: GroupElement, nbytes: int) -> bytes:
    if nbytes == 0:
        return b""
    return expand_mask(h1(r), nbytes * 8)


def _draw_nonces(rng_seed: bytes, group: PairingGroup) -> tuple[int, int]:
    counter = 0
    while True:
        raw = hashlib.shake_256(b"prodchain/signcrypt" + counter.to_bytes(4, "big") + rng_seed).digest(32)
        r = int.from_bytes(raw[:16], "little") % group.order
        big_r = int.from_bytes(raw[16:], "little") % group.order
        if r and big_r:
            return r, big_r
        counter += 1


def _wrap_plain(big_r: GroupElement) -> bytes:
    return big_r.to_bytes() + b"\x00" * (WRAP_BYTES - ELEMENT_BYTES)


def signcrypt(
    sender: KeyPair,
    receivers: Sequence[GroupElement],
    m: Plaintext,
    rng_seed: bytes,
    group: PairingGroup = DEFAULT_GROUP,
) -> Ciphertext:
    if not receivers:
        raise ValueError("signcryption needs at least one receiver")
    if sender.private.value == 0:
        raise ValueError("sender private key must be nonzero")
    r, big_r_val = _draw_nonces(rng_seed, group)
    big_r = group.element(big_r_val)
    t = r * group.generator
    body = m.to_bytes()
    y = _xor(body, _mask(big_r, len(body)))
    h = h2(y, t, receivers, group.order)
    w = group.element(sender.private.value * h.value)
    z = tuple(_xor(_wrap_plain(big_r), h3(t, k, r * k)) for k in receivers)
    return Ciphertext(t, y, w, z)


def verify_only(
    sender_pub: GroupElement,
    all_receiver_pubs: Sequence[GroupElement],
    c: Ciphertext,
    group: PairingGroup = DEFAULT_GROUP,
) -> bool:
    """Check the signature without decrypting; any node can run it."""
    if not all_receiver_pubs:
        return False
    h = h2(c.y, c.t, all_receiver_pubs, group.order)
    return group.pair(group.generator, c.w) == group.pair(sender_pub, h.value * group.generator)


def unsigncrypt(
    receiver_index: int,
    receiver: KeyPair,
    sender_pub: GroupElement,
    all_receiver_pubs: Sequence[GroupElement],
    c: Ciphertext,
    group: PairingGroup = DEFAULT_GROUP,
) -> Plaintext:
    if not 0 <= receiver_index < c.receiver_count:
        raise IndexError(f"receiver index {receiver_index} outside 0..{c.receiver_count - 1}")
    wrap = _xor(c.z[receiver_index], h3(c.t, receiver.public, receiver.private.value * c.t))
    raw_r = int.from_bytes(wrap[:ELEMENT_BYTES], "little")
    recovered_ok = not any(wrap[ELEMENT_BYTES:]) and raw_r < group.order
    if not verify_only(sender_pub, all_receiver_pubs, c, group):
        raise VerificationError("pairing check failed")
    if not recovered_ok:
        raise DeserializationError("key wrap did not open with this receiver key")
    body = _xor(c.y, _mask(group.element(raw_r), len(c.y)))
    m = Plaintext.from_bytes(body, group.order)
    if m.initiator_pub != sender_pub:
        raise VerificationError("plaintext names a different initiator key")
    return m
