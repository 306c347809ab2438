"""Deterministic discrete-event simulation of a PRODCHAIN network.

Every block goes through the real protocol code: the initiator signcrypts the
product payload for all other nodes, endorsers run ``verify_only`` and the PoA
gate, the ordered block is appended to a shared hash-chained ledger, and each
node commits it after its own delay.

Cost model, per node ``i`` and block ``b``::

    start   = max(submit_b, free_i)
    service = delay_i + bytes_b * 8 / link_rate + congestion_cost * max(0, k - knee) * k
    commit  = start + service
    free_i  = commit + contention_cost * (endorsers - 1) * service

``delay_i`` defaults to the measured per-node commit times of the 20-node
testbed, ``k`` is the number of transactions in the block. Contention is
charged after the commit, so it slows the pipeline without changing the
latency of an isolated block.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Sequence

from .identity import DocumentType, ProofMetrics, Role, StakeholderWallet, issue_wallet
from .ledger import Chain, LedgerError, Prodblock, append, build_block, genesis
from .poa import (
    Access,
    EndorserView,
    PoAConfig,
    RatingState,
    ServiceRecord,
    access_decision,
    endorse_proposal,
    update_rating,
)
from .signcryption import Ciphertext, Plaintext, signcrypt, verify_only

# per-node commit times (s) measured on the 20-node testbed, nodes 1..20
TESTBED_COMMIT_DELAYS = (
    6.43, 7.33, 4.66, 4.00, 6.00,
    5.33, 3.67, 5.33, 9.88, 11.01,
    6.67, 7.01, 6.50, 7.00, 10.33,
    10.33, 9.80, 7.66, 5.33, 5.00,
)

FAILURE_CLASSES = ("consensus", "syntax", "version")

KIND_ORDER = {"submit": 0, "endorse": 1, "commit": 2, "read-request": 3, "read-response": 4}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    node_count: int = 20
    endorser_count: int = 19
    tx_per_block: int = 1
    block_count: int = 10
    commit_delays: tuple[float, ...] | None = None
    network_threshold: float = 1.0
    error_rates: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rng_seed: int = 0
    link_rate: float = 120_000.0  # bits/s; inf disables serialization cost
    submit_interval: float = 3.0
    commit_jitter: float = 0.0  # uniform +/- fraction of each commit delay
    tx_bytes: int = 64
    congestion_knee: int = 600
    congestion_cost: float = 5e-5
    contention_cost: float = 0.0015
    read_lookup_cost: float = 3.0  # seconds per log2(chain length)
    endorsement_quorum: float = 0.5
    service_events: tuple[tuple[int, ServiceRecord], ...] = ()

    def __post_init__(self):
        if self.commit_delays is None:
            tiled = tuple(TESTBED_COMMIT_DELAYS[i % len(TESTBED_COMMIT_DELAYS)] for i in range(self.node_count))
            object.__setattr__(self, "commit_delays", tiled)
        else:
            object.__setattr__(self, "commit_delays", tuple(float(d) for d in self.commit_delays))
        object.__setattr__(self, "error_rates", tuple(float(p) for p in self.error_rates))
        self.validate()

    def validate(self) -> None:
        def bad(name, why):
            raise ScenarioError(f"{name}: {why}")

        if self.node_count < 2:
            bad("node_count", "must be >= 2")
        if not 1 <= self.endorser_count <= self.node_count - 1:
            bad("endorser_count", f"must be in 1..{self.node_count - 1}")
        if not 1 <= self.tx_per_block <= 1000:
            bad("tx_per_block", "must be in 1..1000")
        if self.block_count < 1:
            bad("block_count", "must be >= 1")
        if len(self.commit_delays) != self.node_count:
            bad("commit_delays", f"needs {self.node_count} values, got {len(self.commit_delays)}")
        if any(d < 0 or not math.isfinite(d) for d in self.commit_delays):
            bad("commit_delays", "must be finite and >= 0")
        if not 0 < self.network_threshold <= 1:
            bad("network_threshold", "must be in (0, 1]")
        if len(self.error_rates) != 3 or any(not 0 <= p <= 1 for p in self.error_rates):
            bad("error_rates", "needs three probabilities in [0, 1]")
        if sum(self.error_rates) > 1:
            bad("error_rates", "probabilities sum above 1")
        if not self.link_rate > 0:
            bad("link_rate", "must be > 0")
        for name in ("submit_interval", "commit_jitter", "congestion_cost", "contention_cost", "read_lookup_cost"):
            if getattr(self, name) < 0:
                bad(name, "must be >= 0")
        if self.commit_jitter >= 1:
            bad("commit_jitter", "must be < 1")
        if self.tx_bytes < 1:
            bad("tx_bytes", "must be >= 1")
        if self.congestion_knee < 0:
            bad("congestion_knee", "must be >= 0")
        if not 0 < self.endorsement_quorum <= 1:
            bad("endorsement_quorum", "must be in (0, 1]")
        for node, _ in self.service_events:
            if not 1 <= node <= self.node_count:
                bad("service_events", f"node {node} outside 1..{self.node_count}")

    # -- flat key-value text format ------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "service_events":
                text = "; ".join(
                    f"{n}:{r.service_type.value}:{r.scheduled_time!r}:{r.actual_time!r}" for n, r in value
                )
            elif isinstance(value, tuple):
                text = ", ".join(repr(v) for v in value)
            else:
                text = repr(value)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Scenario:
        known = {f.name: f for f in fields(cls)}
        values: dict[str, object] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ScenarioError(f"line {lineno}: expected 'key = value'")
            key, _, value = (part.strip() for part in line.partition("="))
            if key not in known:
                raise ScenarioError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise ScenarioError(f"line {lineno}: duplicate key {key!r}")
            try:
                values[key] = _parse_value(key, value)
            except (ValueError, TypeError) as exc:
                raise ScenarioError(f"line {lineno}: bad value for {key}: {exc}") from None
        return cls(**values)

    @classmethod
    def from_file(cls, path: str | Path) -> Scenario:
        return cls.from_text(Path(path).read_text())


_INT_FIELDS = {"node_count", "endorser_count", "tx_per_block", "block_count", "rng_seed", "tx_bytes", "congestion_knee"}


def _parse_value(key: str, value: str):
    if key in _INT_FIELDS:
        return int(value)
    if key in ("commit_delays", "error_rates"):
        return tuple(float(v) for v in value.split(",") if v.strip())
    if key == "service_events":
        events = []
        for item in filter(None, (s.strip() for s in value.split(";"))):
            node, kind, scheduled, actual = (p.strip() for p in item.split(":"))
            events.append((int(node), ServiceRecord(kind, float(scheduled), float(actual))))
        return tuple(events)
    return float(value)


@dataclass(frozen=True)
class SimEvent:
    time: float
    kind: str
    subject: int  # block index, or read id (== block index)
    node: int = -1

    def sort_key(self) -> tuple:
        return (self.time, KIND_ORDER[self.kind], self.node, self.subject)


@dataclass(frozen=True)
class BlockRecord:
    index: int
    initiator: int
    submit_time: float
    commit_times: tuple[float, ...]  # per node, empty if the block failed
    failure: str | None
    block_bytes: int
    tx_count: int

    @property
    def committed(self) -> bool:
        return self.failure is None


@dataclass(frozen=True)
class ReadRecord:
    block: int
    node: int
    request_time: float
    response_time: float


@dataclass(frozen=True)
class SimResult:
    node_count: int
    tx_per_block: int
    network_threshold: float
    blocks: tuple[BlockRecord, ...]
    reads: tuple[ReadRecord, ...]
    events: tuple[SimEvent, ...] = ()
    chain: Chain | None = field(default=None, compare=False, repr=False)

    @property
    def committed_blocks(self) -> int:
        return sum(b.committed for b in self.blocks)

    def to_dict(self) -> dict:
        d = {
            "node_count": self.node_count,
            "tx_per_block": self.tx_per_block,
            "network_threshold": self.network_threshold,
            "blocks": [asdict(b) for b in self.blocks],
            "reads": [asdict(r) for r in self.reads],
            "events": [asdict(e) for e in self.events],
        }
        if self.chain is not None:
            d["chain_length"] = len(self.chain)
            d["chain_tip"] = self.chain.tip.block_hash.hex()
        return d

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()


@lru_cache(maxsize=4)
def node_wallets(node_count: int) -> tuple[StakeholderWallet, ...]:
    roles = list(Role)
    return tuple(
        issue_wallet(ProofMetrics(DocumentType.TRADE_LICENSE, f"PRODCHAIN node {i + 1}".encode(), roles[i % len(roles)]))
        for i in range(node_count)
    )


def serialization_time(nbytes: int, link_rate: float) -> float:
    return 0.0 if math.isinf(link_rate) else nbytes * 8 / link_rate


class _Simulation:
    def __init__(self, s: Scenario):
        self.s = s
        self.rng = random.Random(s.rng_seed)
        self.poa = PoAConfig(endorsement_quorum=s.endorsement_quorum)
        self.wallets = node_wallets(s.node_count)
        self.pubs = [w.keys.public for w in self.wallets]
        self.chain = genesis()
        for w in self.wallets:
            if w.pseudo_id not in self.chain.registry:
                self.chain.registry.add(w)
        self.ratings = [RatingState() for _ in range(s.node_count)]
        for node, record in s.service_events:
            self.ratings[node - 1] = update_rating(self.ratings[node - 1], record, self.poa)
        self.free = [0.0] * s.node_count
        self.queue: list[tuple] = []
        self.log: list[SimEvent] = []
        self.pending: dict[int, dict] = {}
        self.records: dict[int, BlockRecord] = {}
        self.reads: list[ReadRecord] = []
        self.confirm_needed = math.ceil(s.network_threshold * s.node_count - 1e-9)

    def push(self, ev: SimEvent) -> None:
        heapq.heappush(self.queue, (ev.sort_key(), ev))

    def run(self) -> SimResult:
        s = self.s
        for b in range(s.block_count):
            self.push(SimEvent(b * s.submit_interval, "submit", b, b % s.node_count))
        while self.queue:
            _, ev = heapq.heappop(self.queue)
            self.log.append(ev)
            getattr(self, "_on_" + ev.kind.replace("-", "_"))(ev)
        blocks = tuple(self.records[b] for b in range(s.block_count))
        reads = tuple(sorted(self.reads, key=lambda r: (r.request_time, r.block)))
        return SimResult(s.node_count, s.tx_per_block, s.network_threshold, blocks, reads, tuple(self.log), self.chain)

    def _endorsers(self, initiator: int) -> list[int]:
        n = self.s.node_count
        return [(initiator + j) % n for j in range(1, self.s.endorser_count + 1)]

    def _on_submit(self, ev: SimEvent) -> None:
        s, b, init = self.s, ev.subject, ev.node
        wallet = self.wallets[init]
        d = self.rng.randbytes(s.tx_per_block * s.tx_bytes)
        receivers = [p for i, p in enumerate(self.pubs) if i != init]
        payload = signcrypt(wallet.keys, receivers, Plaintext(d, wallet.pseudo_id, wallet.keys.public), self.rng.randbytes(16))

        u = self.rng.random()
        failure = None
        acc = 0.0
        for cls, p in zip(FAILURE_CLASSES, s.error_rates):
            acc += p
            if u < acc:
                failure = cls
                break
        if failure == "syntax":
            # damaged signature material: flip one bit of the masked message
            pos = self.rng.randrange(len(payload.y) * 8)
            y = bytearray(payload.y)
            y[pos // 8] ^= 1 << (pos % 8)
            payload = replace(payload, y=bytes(y))
        endorsers = self._endorsers(init)
        self.pending[b] = {
            "payload": payload,
            "receivers": receivers,
            "injected": failure,
            "endorsers": len(endorsers),
            "seen": 0,
            "submit": ev.time,
        }
        for e in endorsers:
            self.push(SimEvent(ev.time, "endorse", b, e))

    def _on_endorse(self, ev: SimEvent) -> None:
        p = self.pending[ev.subject]
        p["seen"] += 1
        if p["seen"] == p["endorsers"]:
            self._decide(ev.subject, ev.time)

    def _decide(self, b: int, now: float) -> None:
        s, p = self.s, self.pending[b]
        init = b % s.node_count
        wallet = self.wallets[init]
        payload: Ciphertext = p["payload"]
        # every endorser evaluates the same pure check on the same inputs
        sig_ok = verify_only(wallet.keys.public, p["receivers"], payload)
        access = access_decision(self.ratings[init])
        views = [EndorserView(sig_ok, access)] * p["endorsers"]
        if p["injected"] == "consensus":
            agreeing = max(0, math.ceil(self.poa.endorsement_quorum * p["endorsers"]) - 1)
            views = views[:agreeing] + [EndorserView(sig_ok, Access.SEVERITY_CONCERN)] * (p["endorsers"] - agreeing)
        decision = endorse_proposal(payload, views, self.poa)
        payload_bytes = len(payload.to_bytes())
        if not decision.accepted:
            cls = "syntax" if decision.reason == "signature" else "consensus"
            self._fail(b, init, p["submit"], cls, payload_bytes)
            return
        block = build_block(self.chain, wallet, payload, now)
        if p["injected"] == "version":
            # proposal built against an outdated ledger version
            block = Prodblock.seal(block.height, self.chain.blocks[-2].block_hash, now, wallet.pseudo_id, payload)
        try:
            append(self.chain, block)
        except LedgerError:
            self._fail(b, init, p["submit"], "version", payload_bytes)
            return
        self._schedule_commits(b, init, p["submit"], block)

    def _fail(self, b: int, init: int, submit: float, cls: str, nbytes: int) -> None:
        self.records[b] = BlockRecord(b, init, submit, (), cls, nbytes, self.s.tx_per_block)

    def _schedule_commits(self, b: int, init: int, submit: float, block: Prodblock) -> None:
        s = self.s
        nbytes = len(block.to_bytes())
        ser = serialization_time(nbytes, s.link_rate)
        k = s.tx_per_block
        congestion = s.congestion_cost * max(0, k - s.congestion_knee) * k
        contention = s.contention_cost * (s.endorser_count - 1)
        commits = []
        for i in range(s.node_count):
            delay = s.commit_delays[i]
            if s.commit_jitter:
                delay *= 1 + self.rng.uniform(-s.commit_jitter, s.commit_jitter)
            service = delay + ser + congestion
            t = max(submit, self.free[i]) + service
            self.free[i] = t + contention * service
            commits.append(t)
            self.push(SimEvent(t, "commit", b, i))
        self.records[b] = BlockRecord(b, init, submit, tuple(commits), None, nbytes, k)
        self.pending[b]["commits_seen"] = 0
        self.pending[b]["bytes"] = nbytes

    def _on_commit(self, ev: SimEvent) -> None:
        p = self.pending[ev.subject]
        p["commits_seen"] += 1
        if p["commits_seen"] == self.confirm_needed:
            reader = self.rng.randrange(self.s.node_count)
            self.push(SimEvent(ev.time, "read-request", ev.subject, reader))

    def _on_read_request(self, ev: SimEvent) -> None:
        s = self.s
        lookup = s.read_lookup_cost * math.log2(len(self.chain))
        transfer = serialization_time(self.pending[ev.subject]["bytes"], s.link_rate)
        done = ev.time + lookup + transfer
        self.reads.append(ReadRecord(ev.subject, ev.node, ev.time, done))
        self.push(SimEvent(done, "read-response", ev.subject, ev.node))

    def _on_read_response(self, ev: SimEvent) -> None:
        pass


def run_scenario(s: Scenario) -> SimResult:
    if not isinstance(s, Scenario):
        raise ScenarioError("run_scenario expects a Scenario")
    s.validate()
    return _Simulation(s).run()


def channel_capacity(result: SimResult, link_rate: float) -> float:
    """Upper bound on tx/s from link rate and mean committed bytes per transaction."""
    committed = [b for b in result.blocks if b.committed]
    if not committed or math.isinf(link_rate):
        return math.inf
    bytes_per_tx = sum(b.block_bytes for b in committed) / sum(b.tx_count for b in committed)
    return link_rate / (8 * bytes_per_tx)


def sweep_blocksize(base: Scenario, tx_counts: Sequence[int]) -> list[tuple[int, float]]:
    from .metrics import transaction_throughput

    if not tx_counts:
        raise ScenarioError("tx_counts must be nonempty")
    for k in tx_counts:
        if not 1 <= k <= 1000:
            raise ScenarioError(f"tx_per_block {k} outside 1..1000")
    return [(k, transaction_throughput(run_scenario(replace(base, tx_per_block=k)))) for k in tx_counts]


def sweep_endorsers(base: Scenario, endorser_counts: Sequence[int]) -> list[tuple[int, float]]:
    from .metrics import transaction_throughput

    if not endorser_counts:
        raise ScenarioError("endorser_counts must be nonempty")
    for e in endorser_counts:
        if not 1 <= e <= base.node_count - 1:
            raise ScenarioError(f"endorser count {e} outside 1..{base.node_count - 1}")
    return [(e, transaction_throughput(run_scenario(replace(base, endorser_count=e)))) for e in endorser_counts]
