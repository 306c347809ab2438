"""PRODCHAIN: multi-receiver signcryption, a hash-chained product ledger,
rating-based consensus and a deterministic network simulator."""

__version__ = "0.1.0"
