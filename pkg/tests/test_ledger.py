import json
import random

import pytest

from prodchain import ledger
from prodchain.identity import ProofMetrics, issue_wallet
from prodchain.ledger import GENESIS_BLOCKS, LedgerError, Prodblock
from prodchain.signcryption import Plaintext, signcrypt


def _payload(wallet, receivers, i):
    pubs = [r.keys.public for r in receivers]
    return signcrypt(wallet.keys, pubs, Plaintext(f"batch {i}".encode(), wallet.pseudo_id, wallet.keys.public), str(i).encode())


@pytest.fixture(scope="module")
def chain():
    c = ledger.genesis()
    members = list(c.registry)
    for i in range(6):
        w = members[i % 3]
        ledger.append(c, ledger.build_block(c, w, _payload(w, members, i), float(i + 1)))
    return c


def test_genesis_shape():
    g = ledger.genesis()
    assert len(g) == GENESIS_BLOCKS
    assert [b.height for b in g.blocks] == [0, 1]
    assert g.blocks[0].prev_hash == ledger.ZERO_DIGEST
    assert g.blocks[1].prev_hash == g.blocks[0].block_hash
    assert len(g.registry) == 3
    assert ledger.validate_chain(g) is None
    assert ledger.genesis().blocks == g.blocks


def test_valid_chain(chain):
    assert len(chain) == 8
    assert ledger.validate_chain(chain) is None
    assert chain.tip.height == 7


def test_hash_covers_every_field(chain):
    b = chain.blocks[3]
    assert b.block_hash == b.computed_hash
    for field, value in [("height", 9), ("prev_hash", b"\x01" * 32), ("timestamp", 99.0), ("initiator", b"\x02" * 32)]:
        kwargs = {**b.__dict__, field: value}
        kwargs.pop("payload_bytes", None)
        kwargs.pop("computed_hash", None)
        assert Prodblock(**kwargs).computed_hash != b.block_hash


def test_block_bytes_round_trip(chain):
    for b in chain.blocks:
        assert Prodblock.from_bytes(b.to_bytes()) == b


def test_unregistered_initiator_rejected(chain):
    outsider = issue_wallet(ProofMetrics("national-id", b"nobody", "customer"))
    with pytest.raises(LedgerError) as err:
        ledger.build_block(chain, outsider, chain.tip.payload, 100.0)
    assert err.value.field == "initiator"


def test_timestamp_regression_rejected(chain):
    w = next(iter(chain.registry))
    with pytest.raises(LedgerError) as err:
        ledger.build_block(chain, w, chain.tip.payload, 0.5)
    assert err.value.field == "timestamp"


@pytest.mark.parametrize("field", ["height", "prev_hash", "block_hash"])
def test_append_checks(chain, field):
    w = next(iter(chain.registry))
    good = ledger.build_block(chain, w, chain.tip.payload, 50.0)
    if field == "height":
        bad = Prodblock.seal(good.height + 1, good.prev_hash, 50.0, good.initiator, good.payload)
    elif field == "prev_hash":
        bad = Prodblock.seal(good.height, b"\x00" * 32, 50.0, good.initiator, good.payload)
    else:
        bad = Prodblock(good.height, good.prev_hash, 50.0, good.initiator, good.payload, b"\x00" * 32)
    copy = ledger.Chain(list(chain.blocks), chain.registry)
    with pytest.raises(LedgerError) as err:
        ledger.append(copy, bad)
    assert err.value.field == field
    assert len(copy) == len(chain)


def test_validate_reports_first_bad_index(chain):
    blocks = list(chain.blocks)
    b = blocks[4]
    blocks[4] = Prodblock(b.height, b.prev_hash, b.timestamp + 1, b.initiator, b.payload, b.block_hash)
    assert ledger.validate_chain(blocks) == 4
    # re-sealing hides the edit in block 4 but breaks the link in block 5
    blocks[4] = Prodblock.seal(b.height, b.prev_hash, b.timestamp + 1, b.initiator, b.payload)
    assert ledger.validate_chain(blocks) == 5


def test_validate_rejects_forged_genesis():
    g = ledger.genesis_blocks()
    fake = Prodblock.seal(0, ledger.ZERO_DIGEST, 1.0, g[0].initiator, g[0].payload)
    assert ledger.validate_chain([fake, g[1]]) == 0
    assert ledger.validate_chain([g[0]]) == 1


def test_file_round_trip(tmp_path, chain):
    path = tmp_path / "ledger.bin"
    ledger.write_chain(chain, path)
    data = path.read_bytes()
    assert data[:5] == b"PRDC\x01"
    assert ledger.read_chain(path).blocks == chain.blocks
    assert ledger.validate_encoded(ledger.split_ledger_bytes(data)) is None


@pytest.mark.parametrize(
    "data,field",
    [(b"XXXX\x01", "magic"), (b"PRDC\x02", "version"), (b"PRDC\x01\x00\x00", "framing"), (b"PRDC\x01\x00\x00\x00\x09ab", "framing")],
)
def test_file_framing_errors(data, field):
    with pytest.raises(LedgerError) as err:
        ledger.split_ledger_bytes(data)
    assert err.value.field == field


def test_byte_mutations_sampled(chain):
    """Random single-byte edits to the encoded chain, validated from bytes."""
    raw = [b.to_bytes() for b in chain.blocks]
    rng = random.Random(3)
    for _ in range(300):
        k = rng.randrange(len(raw))
        j = rng.randrange(len(raw[k]))
        mutated = bytearray(raw[k])
        mutated[j] ^= rng.randrange(1, 256)
        assert ledger.validate_encoded(raw[:k] + [bytes(mutated)] + raw[k + 1 :]) == k


def test_show_block(chain):
    info = json.loads(ledger.show_block(chain, 3))
    assert info["height"] == 3
    assert info["block_hash"] == chain.blocks[3].block_hash.hex()
    assert info["receivers"] == 3
    with pytest.raises(LedgerError):
        ledger.show_block(chain, 99)
