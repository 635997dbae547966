"""Deterministic sub-seed derivation.

All randomness flows from one master seed; each stage gets a named
sub-seed so runs are reproducible and stages stay independent. Hashing is
SHA-256 based, stable across platforms and Python processes.
"""
from __future__ import annotations

import hashlib


def derive_seed(master_seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{master_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
