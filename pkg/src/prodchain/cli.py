"""Command-line entry point.

Exit status: 0 on success, 1 on a domain error (bad credentials, failed
verification, invalid ledger, ...), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

from . import bench, identity, ledger, metrics, netsim, plotting, poa, signcryption


class DomainError(Exception):
    pass


@contextmanager
def _output(path: str | None, binary: bool = False):
    if path is None or path == "-":
        yield sys.stdout.buffer if binary else sys.stdout
    else:
        with open(path, "wb" if binary else "w") as fh:
            yield fh


def _write_text(path: str | None, text: str) -> None:
    with _output(path) as fh:
        fh.write(text)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# -- keys and signcryption ----------------------------------------------------


def cmd_keygen(args) -> int:
    pm = identity.ProofMetrics(args.type, Path(args.doc).read_bytes(), args.role)
    wallet = identity.issue_wallet(pm)
    if args.out:
        pub, key = identity.write_wallet(wallet, args.out)
        print(f"wallet {pub}\nprivate key {key}")
    else:
        print(json.dumps({"wallet": wallet.export(), "key": identity.private_record(wallet)}, indent=2, sort_keys=True))
    return 0


def _read_receivers(paths: list[str]):
    return [identity.read_public(p)[1] for p in paths]


def cmd_signcrypt(args) -> int:
    record = json.loads(Path(args.key).read_text())
    sender = identity.read_keypair(args.key)
    m = signcryption.Plaintext(Path(args.input).read_bytes(), bytes.fromhex(record["pseudo_id"]), sender.public)
    c = signcryption.signcrypt(sender, _read_receivers(args.to), m, str(args.seed).encode())
    _write_text(args.out, c.to_bytes().hex() + "\n")
    return 0


def cmd_unsigncrypt(args) -> int:
    me = identity.read_keypair(args.key)
    _, sender_pub = identity.read_public(args.sender)
    receivers = _read_receivers(args.to)
    if me.public not in receivers:
        raise DomainError("this key is not among the listed receivers")
    c = signcryption.Ciphertext.from_bytes(bytes.fromhex(Path(args.input).read_text().strip()))
    m = signcryption.unsigncrypt(receivers.index(me.public), me, sender_pub, receivers, c)
    with _output(args.out, binary=True) as fh:
        fh.write(m.d)
    return 0


# -- ledger -------------------------------------------------------------------


def cmd_chain_init(args) -> int:
    ledger.write_chain(ledger.genesis(), args.out)
    return 0


def cmd_chain_validate(args) -> int:
    raw = ledger.split_ledger_bytes(Path(args.file).read_bytes())
    bad = ledger.validate_encoded(raw)
    if bad is None:
        print(f"valid: {len(raw)} blocks")
        return 0
    print(f"invalid: first bad block index {bad}")
    return 1


def cmd_chain_show(args) -> int:
    print(ledger.show_block(ledger.read_chain(args.file), args.height))
    return 0


# -- PoA ----------------------------------------------------------------------


def cmd_poa_rate(args) -> int:
    cfg = poa.PoAConfig(upper_threshold=args.threshold)
    record = poa.ServiceRecord(args.service, args.scheduled, args.actual)
    rating = poa.evaluate_service(record, cfg)
    state = poa.update_rating(poa.RatingState(), record, cfg)
    print(json.dumps({"rating": rating, "access": poa.access_decision(state).value}, sort_keys=True))
    return 0


# -- simulation and benchmarks ------------------------------------------------


def _scenario(args) -> netsim.Scenario:
    s = netsim.Scenario.from_file(args.scenario) if getattr(args, "scenario", None) else netsim.Scenario()
    if args.seed is not None:
        s = replace(s, rng_seed=args.seed)
    return s


def cmd_sim_run(args) -> int:
    s = _scenario(args)
    result = netsim.run_scenario(s)
    _write_text(args.out, metrics.render([metrics.report(result, "block_count", s.block_count)], args.format))
    if args.ledger:
        ledger.write_chain(result.chain, args.ledger)
    if args.events:
        Path(args.events).write_bytes(result.to_bytes())
    return 0


def _render_curve(points, key: str, fmt: str) -> str:
    if fmt == "csv":
        return f"{key},tps\n" + "".join(f"{x},{y:.4f}\n" for x, y in points)
    return "".join(json.dumps({key: x, "tps": y}) + "\n" for x, y in points)


def cmd_sweep_blocksize(args) -> int:
    points = netsim.sweep_blocksize(_scenario(args), args.tx_counts)
    _write_text(args.out, _render_curve(points, "tx_per_block", args.format))
    if args.plot:
        plotting.plot_blocksize(points, args.plot)
    return 0


def cmd_sweep_endorsers(args) -> int:
    s = _scenario(args)
    counts = args.endorsers or list(range(1, s.node_count))
    points = netsim.sweep_endorsers(s, counts)
    _write_text(args.out, _render_curve(points, "endorsers", args.format))
    if args.plot:
        plotting.plot_endorsers(points, args.plot)
    return 0


def cmd_bench(args) -> int:
    base = netsim.Scenario.from_file(args.scenario) if args.scenario else None
    rows = bench.bench_rows(base, seed=args.seed, reps=args.reps)
    _write_text(args.out, metrics.render(rows, args.format))
    if args.plot:
        if args.table == "table3":
            reference = {"read_latency_s": bench.TESTBED_READ_LATENCY, "tx_latency_s": bench.TESTBED_TX_LATENCY}
            plotting.plot_latency_table(rows, args.plot, reference)
        else:
            plotting.plot_success_table(rows, args.plot, bench.TESTBED_SUCCESS_RATE)
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prodchain", description="PRODCHAIN protocol tools and network simulator")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    k = sub.add_parser("keygen", help="register a stakeholder and issue a wallet")
    k.add_argument("--doc", required=True, help="identity document file")
    k.add_argument("--type", required=True, choices=[t.value for t in identity.DocumentType])
    k.add_argument("--role", required=True, choices=[r.value for r in identity.Role])
    k.add_argument("--out", help="path prefix for <prefix>.wallet.json and <prefix>.key")
    k.set_defaults(func=cmd_keygen)

    s = sub.add_parser("signcrypt", help="signcrypt a product record for a list of receivers")
    s.add_argument("--key", required=True, help="sender private key file")
    s.add_argument("--to", required=True, action="append", help="receiver wallet file (repeat, order matters)")
    s.add_argument("--in", dest="input", required=True, help="product information file")
    s.add_argument("--seed", default="0", help="nonce seed")
    s.add_argument("--out", help="ciphertext output (hex); default stdout")
    s.set_defaults(func=cmd_signcrypt)

    u = sub.add_parser("unsigncrypt", help="verify and decrypt a ciphertext")
    u.add_argument("--key", required=True, help="receiver private key file")
    u.add_argument("--from", dest="sender", required=True, help="initiator wallet file")
    u.add_argument("--to", required=True, action="append", help="all receiver wallet files, in signcryption order")
    u.add_argument("--in", dest="input", required=True, help="ciphertext file (hex)")
    u.add_argument("--out", help="plaintext output; default stdout")
    u.set_defaults(func=cmd_unsigncrypt)

    c = sub.add_parser("chain", help="ledger file tools")
    csub = c.add_subparsers(dest="chain_command", metavar="ACTION")
    csub.required = True
    ci = csub.add_parser("init", help="write a genesis ledger")
    ci.add_argument("--out", required=True)
    ci.set_defaults(func=cmd_chain_init)
    cv = csub.add_parser("validate", help="check hashes and links")
    cv.add_argument("file")
    cv.set_defaults(func=cmd_chain_validate)
    cs = csub.add_parser("show", help="print one block")
    cs.add_argument("file")
    cs.add_argument("--height", type=int, required=True)
    cs.set_defaults(func=cmd_chain_show)

    a = sub.add_parser("poa", help="Proof-of-Accomplishment rating")
    asub = a.add_subparsers(dest="poa_command", metavar="ACTION")
    asub.required = True
    ar = asub.add_parser("rate", help="rate one service")
    ar.add_argument("--scheduled", type=float, required=True, help="scheduled duration (days)")
    ar.add_argument("--actual", type=float, required=True, help="actual duration (days)")
    ar.add_argument("--threshold", type=float, default=0.0, help="allowed slack (days)")
    ar.add_argument("--service", default="delivery", choices=[t.value for t in poa.ServiceType])
    ar.set_defaults(func=cmd_poa_rate)

    def common(sp, scenario_positional=False):
        if scenario_positional:
            sp.add_argument("scenario", help="scenario file (key = value)")
        else:
            sp.add_argument("--scenario", help="scenario file (key = value)")
        sp.add_argument("--seed", type=int, help="override rng_seed")
        sp.add_argument("--out", help="output file; default stdout")
        sp.add_argument("--format", choices=["csv", "jsonl"], default="csv")

    m = sub.add_parser("sim", help="network simulation")
    msub = m.add_subparsers(dest="sim_command", metavar="ACTION")
    msub.required = True
    mr = msub.add_parser("run", help="run one scenario and report metrics")
    common(mr, scenario_positional=True)
    mr.add_argument("--ledger", help="also write the simulated ledger file")
    mr.add_argument("--events", help="also write the full simulation result (JSON)")
    mr.set_defaults(func=cmd_sim_run)
    mb = msub.add_parser("sweep-blocksize", help="throughput vs transactions per block")
    common(mb)
    mb.add_argument("--tx-counts", type=_int_list, default=[1, 10, 100, 250, 600, 800, 1000])
    mb.add_argument("--plot", help="write a figure (png/pdf/svg)")
    mb.set_defaults(func=cmd_sweep_blocksize)
    me = msub.add_parser("sweep-endorsers", help="throughput vs number of endorsers")
    common(me)
    me.add_argument("--endorsers", type=_int_list, help="endorser counts (default 1..node_count-1)")
    me.add_argument("--plot", help="write a figure (png/pdf/svg)")
    me.set_defaults(func=cmd_sweep_endorsers)

    b = sub.add_parser("bench", help="benchmark tables over 10..100 prodblocks")
    b.add_argument("table", choices=["table3", "table5"])
    b.add_argument("--scenario", help="base scenario file")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--reps", type=int, default=1, help="repetitions per row, seeds seed..seed+reps-1")
    b.add_argument("--out", help="output file; default stdout")
    b.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    b.add_argument("--plot", help="write a figure (png/pdf/svg)")
    b.set_defaults(func=cmd_bench)
    return p


DOMAIN_ERRORS = (
    DomainError,
    identity.RegistrationError,
    signcryption.SigncryptionError,
    ledger.LedgerError,
    netsim.ScenarioError,
    ValueError,
    KeyError,
    OSError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: usage error (2) or --help (0)
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"prodchain: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
