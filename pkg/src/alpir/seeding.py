"""Deterministic RNG stream derivation.

Independent streams are derived from a master seed plus string/int labels
by hashing, so trial i of a run can be reproduced (or executed in
parallel) without consuming draws from a shared generator.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(seed: int, *labels) -> int:
    text = str(seed) + "".join("|" + str(x) for x in labels)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:16], "big")


def derived_rng(seed: int, *labels) -> random.Random:
    return random.Random(derive_seed(seed, *labels))
