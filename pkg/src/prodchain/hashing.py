"""LASH-style matrix-compression hash and the protocol hash functions.

The compression hash runs a Merkle-Damgard chain over 512-bit message blocks.
Each step maps the state ``s`` (``rows`` residues mod 257) and the bit vector
``m`` of the next block to::

    s' = A1 . s^3 + A2 . m   (mod 257)

where ``A = [A1 | A2]`` is a public ``rows x cols`` matrix expanded from a fixed
seed. Cubing permutes Z_257 (gcd(3, 256) = 1) and ``A1`` is invertible, so a
step is injective in ``s`` for a fixed block, and any change confined to a
single block changes the final state. The state is serialized as a base-257
integer truncated to ``output_bits``.

H1, H2 and H3 are the compression hash over distinct one-byte domain tags.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .algebra import GROUP_ORDER, GroupElement, GroupScalar

Digest = bytes

PUBLIC_SEED = b"PRODCHAIN public LASH matrix v1"

TAG_H1 = b"\x01"
TAG_H2 = b"\x02"
TAG_H3 = b"\x03"

H1_BITS = 256  # n, matches the default ring degree
H3_BITS = 256  # l, the agreed public wrap length

_CHUNK = 7  # 257^7 < 2^63
_TABLE_BLOCKS = 32


@dataclass(frozen=True)
class HashParams:
    rows: int = 160
    cols: int = 672
    modulus: int = 257
    output_bits: int = 256
    seed: bytes = PUBLIC_SEED

    def __post_init__(self):
        if self.output_bits % 8 or self.output_bits <= 0:
            raise ValueError("output_bits must be a positive multiple of 8")
        if self.rows * np.log2(self.modulus) < self.output_bits:
            raise ValueError("rows * log2(modulus) must cover output_bits")
        if self.cols <= self.rows or (self.cols - self.rows) % 8:
            raise ValueError("cols - rows must be a positive multiple of 8 (block bits)")
        if self.modulus > 1 << 9:
            raise ValueError("modulus too large for exact float64 accumulation")

    @property
    def block_bits(self) -> int:
        return self.cols - self.rows

    @property
    def digest_size(self) -> int:
        return self.output_bits // 8


DEFAULT_HASH = HashParams()


def _rank_mod(mat: np.ndarray, p: int) -> int:
    m = mat.copy() % p
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        pivots = np.nonzero(m[rank:, c])[0]
        if pivots.size == 0:
            continue
        pr = rank + pivots[0]
        m[[rank, pr]] = m[[pr, rank]]
        m[rank] = m[rank] * pow(int(m[rank, c]), -1, p) % p
        others = np.nonzero(m[:, c])[0]
        others = others[others != rank]
        m[others] = (m[others] - np.outer(m[others, c], m[rank])) % p
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass(frozen=True)
class _Tables:
    a1: np.ndarray  # rows x rows
    a2t: np.ndarray  # block_bits x rows
    by_byte: np.ndarray  # (block_bytes, 256, rows): A2 contribution of byte value v at position j
    iv: np.ndarray
    cube: np.ndarray


@lru_cache(maxsize=8)
def _tables(params: HashParams) -> _Tables:
    p = params.modulus
    counter = 0
    while True:
        raw = hashlib.shake_256(params.seed + counter.to_bytes(4, "big")).digest(
            2 * (params.rows * params.cols + params.rows)
        )
        words = np.frombuffer(raw, dtype=">u2").astype(np.int64) % p
        a = words[: params.rows * params.cols].reshape(params.rows, params.cols)
        iv = words[params.rows * params.cols :]
        a1, a2 = a[:, : params.rows], a[:, params.rows :]
        if _rank_mod(a1, p) == params.rows and np.all(a2.any(axis=0)):
            break
        counter += 1
    # float64 keeps BLAS in play and is exact: all sums stay far below 2^53
    a2t = np.ascontiguousarray(a2.T, dtype=np.float64)
    byte_bits = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1).astype(np.float64)
    by_byte = np.einsum("vk,jkr->jvr", byte_bits, a2t.reshape(-1, 8, params.rows)) % p
    tables = _Tables(
        a1=np.ascontiguousarray(a1, dtype=np.float64),
        a2t=a2t,
        by_byte=by_byte,
        iv=iv,
        cube=(np.arange(p) ** 3 % p).astype(np.float64),
    )
    for arr in (tables.a1, tables.a2t, tables.by_byte, tables.iv, tables.cube):
        arr.setflags(write=False)
    return tables


def _pad(data: bytes, block_bytes: int) -> bytes:
    tail = len(data) * 8
    padded = data + b"\x80"
    padded += b"\x00" * (-(len(padded) + 8) % block_bytes)
    return padded + tail.to_bytes(8, "big")


def lash_compress(data: bytes, params: HashParams = DEFAULT_HASH) -> Digest:
    if not data:
        raise ValueError("hash input must be nonempty")
    tab = _tables(params)
    p = params.modulus
    block_bytes = params.block_bits // 8
    blocks = np.frombuffer(_pad(bytes(data), block_bytes), dtype=np.uint8).reshape(-1, block_bytes)
    if len(blocks) <= _TABLE_BLOCKS:
        feed = tab.by_byte[np.arange(block_bytes), blocks].sum(axis=1)
    else:
        feed = np.unpackbits(blocks, axis=1).astype(np.float64) @ tab.a2t
    state = tab.iv
    for u in feed:
        state = ((tab.a1 @ tab.cube[state] + u) % p).astype(np.int64)
    return _serialize(state, params)


def _serialize(state: np.ndarray, params: HashParams) -> bytes:
    # base-p integer sum(s_i * p^i), built from int64 chunks of _CHUNK digits
    p = params.modulus
    pad = -len(state) % _CHUNK
    digits = np.concatenate([state, np.zeros(pad, dtype=np.int64)]).reshape(-1, _CHUNK)
    weights = p ** np.arange(_CHUNK, dtype=np.int64)
    base = p**_CHUNK
    acc = 0
    for chunk in reversed((digits * weights).sum(axis=1).tolist()):
        acc = acc * base + chunk
    return (acc % (1 << params.output_bits)).to_bytes(params.digest_size, "little")


def expand_mask(seed: bytes, length_bits: int, params: HashParams = DEFAULT_HASH) -> bytes:
    """Counter-mode stream ``H(seed || 0) || H(seed || 1) || ...`` cut to ``length_bits``.

    Returned as ``ceil(length_bits / 8)`` bytes with unused trailing bits zeroed.
    """
    if length_bits < 1:
        raise ValueError("length_bits must be >= 1")
    nbytes = -(-length_bits // 8)
    out = bytearray()
    counter = 0
    while len(out) < nbytes:
        out += lash_compress(seed + counter.to_bytes(4, "big"), params)
        counter += 1
    del out[nbytes:]
    spare = nbytes * 8 - length_bits
    if spare:
        out[-1] &= (0xFF << spare) & 0xFF
    return bytes(out)


def _fit(digest: bytes, bits: int, params: HashParams) -> bytes:
    if bits == params.output_bits:
        return digest
    return expand_mask(digest, bits, params)


def h1(r: GroupElement, bits: int = H1_BITS, params: HashParams = DEFAULT_HASH) -> bytes:
    return _fit(lash_compress(TAG_H1 + r.to_bytes(), params), bits, params)


def h2(
    y: bytes,
    t: GroupElement,
    receiver_keys: Sequence[GroupElement],
    order: int = GROUP_ORDER,
    params: HashParams = DEFAULT_HASH,
) -> GroupScalar:
    if not receiver_keys:
        raise ValueError("h2 needs at least one receiver key")
    payload = bytearray(TAG_H2)
    payload += len(y).to_bytes(4, "big") + y + t.to_bytes()
    payload += len(receiver_keys).to_bytes(2, "big")
    for k in receiver_keys:
        payload += k.to_bytes()
    digest = lash_compress(bytes(payload), params)
    return GroupScalar(int.from_bytes(digest, "little") % order, order)


def h3(
    t: GroupElement,
    k: GroupElement,
    shared: GroupElement,
    bits: int = H3_BITS,
    params: HashParams = DEFAULT_HASH,
) -> bytes:
    return _fit(lash_compress(TAG_H3 + t.to_bytes() + k.to_bytes() + shared.to_bytes(), params), bits, params)
