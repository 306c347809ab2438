"""Hash-chained PRODBLOCK ledger."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .hashing import Digest, lash_compress
from .identity import DocumentType, ProofMetrics, Registry, Role, StakeholderWallet, register
from .signcryption import WRAP_BYTES, Ciphertext, MalformedCiphertext
from .algebra import GroupElement

MAGIC = b"PRDC"
FILE_VERSION = 1
DIGEST_BYTES = 32
ZERO_DIGEST = b"\x00" * DIGEST_BYTES
GENESIS_INITIATOR = b"\xff" * DIGEST_BYTES
GENESIS_PAYLOAD = Ciphertext(GroupElement(0), b"", GroupElement(0), (b"\x00" * WRAP_BYTES,))
GENESIS_BLOCKS = 2

_HEADER = struct.Struct(">Q32sd32sI")

GENESIS_ORGANIZATIONS = (
    ProofMetrics(DocumentType.TRADE_LICENSE, b"PRODCHAIN virtual organization 1", Role.MANUFACTURER),
    ProofMetrics(DocumentType.TRADE_LICENSE, b"PRODCHAIN virtual organization 2", Role.DISTRIBUTOR),
    ProofMetrics(DocumentType.TRADE_LICENSE, b"PRODCHAIN virtual organization 3", Role.RETAILER),
)


class LedgerError(ValueError):
    def __init__(self, message: str, field: str | None = None, index: int | None = None):
        super().__init__(message)
        self.field = field
        self.index = index


def _header_bytes(height: int, prev_hash: bytes, timestamp: float, initiator: bytes, payload: bytes) -> bytes:
    return _HEADER.pack(height, prev_hash, timestamp, initiator, len(payload)) + payload


@dataclass(frozen=True)
class Prodblock:
    height: int
    prev_hash: Digest
    timestamp: float
    initiator: Digest
    payload: Ciphertext
    block_hash: Digest

    @classmethod
    def seal(cls, height: int, prev_hash: Digest, timestamp: float, initiator: Digest, payload: Ciphertext) -> Prodblock:
        body = _header_bytes(height, prev_hash, timestamp, initiator, payload.to_bytes())
        return cls(height, prev_hash, timestamp, initiator, payload, lash_compress(body))

    @cached_property
    def payload_bytes(self) -> bytes:
        return self.payload.to_bytes()

    @cached_property
    def computed_hash(self) -> Digest:
        return lash_compress(_header_bytes(self.height, self.prev_hash, self.timestamp, self.initiator, self.payload_bytes))

    def to_bytes(self) -> bytes:
        return _header_bytes(self.height, self.prev_hash, self.timestamp, self.initiator, self.payload_bytes) + self.block_hash

    @classmethod
    def from_bytes(cls, data: bytes) -> Prodblock:
        if len(data) < _HEADER.size + DIGEST_BYTES:
            raise LedgerError("block too short", field="length")
        height, prev, ts, initiator, size = _HEADER.unpack_from(data)
        if len(data) != _HEADER.size + size + DIGEST_BYTES:
            raise LedgerError("payload length field disagrees with block size", field="payload_length")
        try:
            payload = Ciphertext.from_bytes(data[_HEADER.size : _HEADER.size + size])
        except MalformedCiphertext as exc:
            raise LedgerError(f"payload does not decode: {exc}", field="payload") from exc
        return cls(height, prev, ts, initiator, payload, data[-DIGEST_BYTES:])

    def describe(self) -> dict:
        return {
            "height": self.height,
            "prev_hash": self.prev_hash.hex(),
            "timestamp": self.timestamp,
            "initiator": self.initiator.hex(),
            "block_hash": self.block_hash.hex(),
            "payload_bytes": len(self.payload_bytes),
            "receivers": self.payload.receiver_count,
        }


def _genesis_blocks() -> tuple[Prodblock, ...]:
    blocks: list[Prodblock] = []
    prev = ZERO_DIGEST
    for h in range(GENESIS_BLOCKS):
        b = Prodblock.seal(h, prev, 0.0, GENESIS_INITIATOR, GENESIS_PAYLOAD)
        blocks.append(b)
        prev = b.block_hash
    return tuple(blocks)


_GENESIS: tuple[Prodblock, ...] | None = None


def genesis_blocks() -> tuple[Prodblock, ...]:
    global _GENESIS
    if _GENESIS is None:
        _GENESIS = _genesis_blocks()
    return _GENESIS


@dataclass
class Chain:
    blocks: list[Prodblock]
    registry: Registry = field(default_factory=Registry)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def tip(self) -> Prodblock:
        return self.blocks[-1]

    def to_bytes(self) -> bytes:
        out = bytearray(MAGIC + bytes([FILE_VERSION]))
        for b in self.blocks:
            raw = b.to_bytes()
            out += len(raw).to_bytes(4, "big") + raw
        return bytes(out)


def genesis() -> Chain:
    registry = Registry()
    for pm in GENESIS_ORGANIZATIONS:
        register(pm, registry)
    return Chain(list(genesis_blocks()), registry)


def build_block(chain: Chain, initiator: StakeholderWallet, payload: Ciphertext, timestamp: float) -> Prodblock:
    if initiator.pseudo_id not in chain.registry:
        raise LedgerError("initiator is not a registered stakeholder", field="initiator")
    if timestamp < chain.tip.timestamp:
        raise LedgerError(f"timestamp {timestamp} precedes tip timestamp {chain.tip.timestamp}", field="timestamp")
    return Prodblock.seal(chain.tip.height + 1, chain.tip.block_hash, float(timestamp), initiator.pseudo_id, payload)


def append(chain: Chain, block: Prodblock) -> Chain:
    tip = chain.tip
    if block.height != tip.height + 1:
        raise LedgerError(f"height {block.height} does not follow tip {tip.height}", field="height")
    if block.prev_hash != tip.block_hash:
        raise LedgerError("prev_hash does not match the tip hash", field="prev_hash")
    if block.block_hash != block.computed_hash:
        raise LedgerError("block_hash does not match block contents", field="block_hash")
    if block.timestamp < tip.timestamp:
        raise LedgerError("timestamp regression", field="timestamp")
    chain.blocks.append(block)
    return chain


def _first_bad(blocks: Iterable[Prodblock | None]) -> int | None:
    gen = genesis_blocks()
    prev_hash, prev_ts = ZERO_DIGEST, 0.0
    for i, b in enumerate(blocks):
        if (
            b is None
            or b.height != i
            or b.prev_hash != prev_hash
            or b.block_hash != b.computed_hash
            or b.timestamp < prev_ts
            or (i < GENESIS_BLOCKS and b.block_hash != gen[i].block_hash)
        ):
            return i
        prev_hash, prev_ts = b.block_hash, b.timestamp
    return None


def validate_chain(chain: Chain | Sequence[Prodblock]) -> int | None:
    """Index of the first block whose link or hash fails, or None if valid."""
    blocks = chain.blocks if isinstance(chain, Chain) else chain
    if len(blocks) < GENESIS_BLOCKS:
        return len(blocks)
    return _first_bad(blocks)


def _decode_or_none(raw: bytes) -> Prodblock | None:
    try:
        return Prodblock.from_bytes(raw)
    except LedgerError:
        return None


def validate_encoded(raw_blocks: Sequence[bytes]) -> int | None:
    """Like validate_chain, over encoded blocks; an undecodable block is bad."""
    if len(raw_blocks) < GENESIS_BLOCKS:
        return len(raw_blocks)
    return _first_bad(_decode_or_none(r) for r in raw_blocks)


# -- ledger files -------------------------------------------------------------


def split_ledger_bytes(data: bytes) -> list[bytes]:
    if data[:4] != MAGIC:
        raise LedgerError("not a ledger file (bad magic)", field="magic")
    if len(data) < 5 or data[4] != FILE_VERSION:
        raise LedgerError("unsupported ledger file version", field="version")
    out, pos = [], 5
    while pos < len(data):
        if pos + 4 > len(data):
            raise LedgerError("truncated length prefix", field="framing", index=len(out))
        size = int.from_bytes(data[pos : pos + 4], "big")
        raw = data[pos + 4 : pos + 4 + size]
        if len(raw) != size:
            raise LedgerError("truncated block", field="framing", index=len(out))
        out.append(raw)
        pos += 4 + size
    return out


def chain_from_bytes(data: bytes, registry: Registry | None = None) -> Chain:
    blocks = []
    for i, raw in enumerate(split_ledger_bytes(data)):
        try:
            blocks.append(Prodblock.from_bytes(raw))
        except LedgerError as exc:
            exc.index = i
            raise
    return Chain(blocks, registry if registry is not None else Registry())


def write_chain(chain: Chain, path: str | Path) -> None:
    Path(path).write_bytes(chain.to_bytes())


def read_chain(path: str | Path) -> Chain:
    return chain_from_bytes(Path(path).read_bytes())


def show_block(chain: Chain, height: int) -> str:
    for b in chain.blocks:
        if b.height == height:
            return json.dumps(b.describe(), indent=2, sort_keys=True)
    raise LedgerError(f"no block at height {height}", field="height")
