"""Key center: stakeholder registration, partial keys and key generation."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

from .algebra import (
    BASIS_DIM,
    DEFAULT_GROUP,
    DEFAULT_RING,
    GroupElement,
    GroupScalar,
    LatticeBasis,
    PairingGroup,
    basis_from_seed,
    sample_small,
)
from .hashing import Digest, lash_compress


class RegistrationError(ValueError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class DocumentType(str, enum.Enum):
    TRADE_LICENSE = "trade-license"
    NATIONAL_ID = "national-id"
    INTERNATIONAL_ID = "international-id"


class Role(str, enum.Enum):
    SUPPLIER = "supplier"
    MANUFACTURER = "manufacturer"
    DISTRIBUTOR = "distributor"
    RETAILER = "retailer"
    CUSTOMER = "customer"
    LOGISTICS = "logistics"


@dataclass(frozen=True)
class ProofMetrics:
    """Registration evidence. Fields may hold raw strings until validated."""

    document_type: DocumentType | str
    document_bytes: bytes
    stakeholder_role: Role | str

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> ProofMetrics:
        """Build from a config mapping; the document is given as text or bytes."""
        missing = [k for k in ("document_type", "document", "stakeholder_role") if k not in data]
        if missing:
            raise RegistrationError(f"missing field {missing[0]!r}", field=missing[0])
        doc = data["document"]
        if isinstance(doc, str):
            doc = doc.encode()
        return validate_credentials(cls(str(data["document_type"]), bytes(doc), str(data["stakeholder_role"])))

    def canonical_bytes(self) -> bytes:
        pm = validate_credentials(self)
        dt = pm.document_type.value.encode()
        role = pm.stakeholder_role.value.encode()
        return (
            len(dt).to_bytes(1, "big") + dt
            + len(role).to_bytes(1, "big") + role
            + len(pm.document_bytes).to_bytes(4, "big") + pm.document_bytes
        )


def validate_credentials(pm: ProofMetrics) -> ProofMetrics:
    try:
        doc_type = DocumentType(pm.document_type)
    except ValueError:
        raise RegistrationError(f"unknown document type {pm.document_type!r}", field="document_type") from None
    try:
        role = Role(pm.stakeholder_role)
    except ValueError:
        raise RegistrationError(f"unknown stakeholder role {pm.stakeholder_role!r}", field="stakeholder_role") from None
    if not isinstance(pm.document_bytes, (bytes, bytearray)) or not pm.document_bytes:
        raise RegistrationError("identity document is empty", field="document_bytes")
    return ProofMetrics(doc_type, bytes(pm.document_bytes), role)


def generate_basis(pm: ProofMetrics, dim: int = BASIS_DIM) -> LatticeBasis:
    """The random basis seeded by the proof metrics."""
    return basis_from_seed(lash_compress(b"basis" + pm.canonical_bytes()), dim)


@dataclass(frozen=True)
class PartialKey:
    value: bytes

    def __post_init__(self):
        if not self.value:
            raise ValueError("partial key must be nonempty")


def derive_partial_key(pm: ProofMetrics) -> PartialKey:
    return PartialKey(lash_compress(generate_basis(pm).to_bytes()))


@dataclass(frozen=True)
class KeyPair:
    private: GroupScalar
    public: GroupElement

    def __post_init__(self):
        if self.private.value == 0:
            raise ValueError("private key must be nonzero")
        if self.public.value != self.private.value or self.public.order != self.private.order:
            raise ValueError("public key must equal private * P")


def keypair_from_private(k: int, group: PairingGroup = DEFAULT_GROUP) -> KeyPair:
    """Key pair for an explicit private scalar (public = k * P)."""
    return KeyPair(group.scalar(k), int(k) * group.generator)


def _small_to_scalar(coeffs: tuple[int, ...], order: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * 3 + (c + 1)
    return acc % order


def generate_keypair(partial: PartialKey, pm: ProofMetrics, group: PairingGroup = DEFAULT_GROUP) -> KeyPair:
    """Private scalar from a {-1,0,1} sample seeded by the partial key and the PM digest."""
    seed = partial.value + lash_compress(pm.canonical_bytes())
    counter = 0
    while True:
        small = sample_small(seed + counter.to_bytes(4, "big"), DEFAULT_RING)
        k = _small_to_scalar(small.coeffs, group.order)
        if k:
            return keypair_from_private(k, group)
        counter += 1


def noise_commitment(partial: PartialKey, keys: KeyPair) -> Digest:
    """Binding of the public key to a small ring noise term.

    The additive noise in the original key equation would break pairing
    verification, so it only survives as this auxiliary commitment.
    """
    noise = sample_small(partial.value + b"noise", DEFAULT_RING).lift()
    return lash_compress(b"commit" + keys.public.to_bytes() + noise.to_bytes())


@dataclass(frozen=True)
class StakeholderWallet:
    pseudo_id: Digest
    keys: KeyPair
    role: Role
    commitment: Digest = b""

    def export(self) -> dict:
        """Public half of the wallet (no private key)."""
        return {
            "pseudo_id": self.pseudo_id.hex(),
            "role": self.role.value,
            "public_key": self.keys.public.to_bytes().hex(),
            "commitment": self.commitment.hex(),
        }


def pseudo_identity(pm: ProofMetrics) -> Digest:
    return lash_compress(pm.canonical_bytes())


def issue_wallet(pm: ProofMetrics) -> StakeholderWallet:
    pm = validate_credentials(pm)
    partial = derive_partial_key(pm)
    keys = generate_keypair(partial, pm)
    return StakeholderWallet(pseudo_identity(pm), keys, pm.stakeholder_role, noise_commitment(partial, keys))


@dataclass
class Registry:
    wallets: dict[Digest, StakeholderWallet] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.wallets)

    def __contains__(self, pseudo_id: object) -> bool:
        return pseudo_id in self.wallets

    def __iter__(self) -> Iterator[StakeholderWallet]:
        return iter(self.wallets.values())

    def get(self, pseudo_id: Digest) -> StakeholderWallet | None:
        return self.wallets.get(pseudo_id)

    def add(self, wallet: StakeholderWallet) -> None:
        if wallet.pseudo_id in self.wallets:
            raise RegistrationError("pseudo-identity already registered (re-used credentials)", field="pseudo_id")
        self.wallets[wallet.pseudo_id] = wallet

    def copy(self) -> Registry:
        return Registry(dict(self.wallets))


def register(pm: ProofMetrics, registry: Registry) -> StakeholderWallet:
    wallet = issue_wallet(pm)
    registry.add(wallet)
    return wallet


# -- wallet files -----------------------------------------------------------


def write_wallet(wallet: StakeholderWallet, prefix: str | Path) -> tuple[Path, Path]:
    """Write ``<prefix>.wallet.json`` (public) and ``<prefix>.key`` (private).

    The key file holds the private scalar in clear; keep it readable by its
    owner only.
    """
    prefix = Path(prefix)
    public_path = prefix.with_name(prefix.name + ".wallet.json")
    key_path = prefix.with_name(prefix.name + ".key")
    public_path.write_text(json.dumps(wallet.export(), indent=2, sort_keys=True) + "\n")
    key_path.write_text(json.dumps(private_record(wallet), indent=2, sort_keys=True) + "\n")
    key_path.chmod(0o600)
    return public_path, key_path


def private_record(wallet: StakeholderWallet) -> dict:
    return {"pseudo_id": wallet.pseudo_id.hex(), "private_key": wallet.keys.private.to_bytes().hex()}


def read_public(path: str | Path) -> tuple[Digest, GroupElement]:
    data = json.loads(Path(path).read_text())
    return bytes.fromhex(data["pseudo_id"]), GroupElement.from_bytes(bytes.fromhex(data["public_key"]))


def read_keypair(path: str | Path) -> KeyPair:
    data = json.loads(Path(path).read_text())
    return keypair_from_private(int.from_bytes(bytes.fromhex(data["private_key"]), "little"))
