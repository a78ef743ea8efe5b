"""The retrieval scheme: message layout, path sampling, queries, answers.

Each message of L bits is split into a masked part and an open part, each
cut into N-1 subpackets. Masked subpackets are s bits wide and are always
one-time-padded with the shared key S that only the databases hold; open
subpackets are L/(N-1) - s bits wide and travel in the clear inside XOR
combinations. The layout of message k is

    bits [0, (N-1)s)              masked subpackets 1..N-1, s bits each
    bits [(N-1)s, L)              open subpackets 1..N-1, w bits each

with w = L/(N-1) - s, so subpacket index 0 means "nothing".

A retrieval draws a base vector x in [0, N-1]^K. Database d (0-based)
receives the query vector v with v_k = x_k for k != i and
v_i = (x_i + d + 1) mod N, so the desired coordinate sweeps all N residues
across the databases while every other coordinate is common. Low-cost
bases (x_k = 0 for all k != i) carry weight p each; all other bases carry
weight q, with p/q = e^eps. The database answers with the XOR of the
selected masked subpackets plus the key, and the XOR of the selected open
subpackets (empty when every v_k is 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .bits import BitString
from .bounds import alpha1_rate
from .params import SystemParams

# Guard subtracted inside the ceiling that quantizes the key size, so that
# float noise of a few ulp above an exact integer cannot cost a whole
# extra key bit. Matches the package-wide 1e-9 comparison tolerance.
CEIL_GUARD = 1e-9


class PathClass(Enum):
    LOW = "Low"
    HIGH = "High"


@dataclass(frozen=True)
class PartitionLayout:
    """How messages are cut up and how large the shared key is."""

    key_bits: int
    masked_subpacket_bits: int
    open_subpacket_bits: int
    subpackets_per_part: int
    effective_alpha: float
    effective_delta: float

    @property
    def message_bits(self) -> int:
        return self.subpackets_per_part * (
            self.masked_subpacket_bits + self.open_subpacket_bits
        )

    def subpacket(self, message: BitString, part: int, index: int) -> BitString:
        """Subpacket `index` (1-based) of part 1 (masked) or part 2 (open)."""
        if message.nbits != self.message_bits:
            raise ValueError("message width does not match layout")
        if not 1 <= index <= self.subpackets_per_part:
            raise ValueError("subpacket index out of range")
        if part == 1:
            return message.slice((index - 1) * self.masked_subpacket_bits,
                                 self.masked_subpacket_bits)
        if part == 2:
            base = self.subpackets_per_part * self.masked_subpacket_bits
            return message.slice(base + (index - 1) * self.open_subpacket_bits,
                                 self.open_subpacket_bits)
        raise ValueError("part must be 1 or 2")


def layout_for_key_bits(params: SystemParams, key_bits: int) -> PartitionLayout:
    """Build the layout for an explicit key size (key_bits in [0, L/(N-1)])."""
    per_sub = params.subpacket_total_bits()
    if not 0 <= key_bits <= per_sub:
        raise ValueError("key_bits must lie in [0, message_bits/(n_databases-1)]")
    open_bits = per_sub - key_bits
    dist = path_distribution(params)
    high_total = 1.0 - dist.p * params.n_databases
    eff_delta = high_total * open_bits / params.message_bits
    return PartitionLayout(
        key_bits=key_bits,
        masked_subpacket_bits=key_bits,
        open_subpacket_bits=open_bits,
        subpackets_per_part=params.subpacket_count(),
        effective_alpha=key_bits / params.message_bits,
        effective_delta=eff_delta,
    )


def plan_partition(params: SystemParams) -> PartitionLayout:
    """Choose the key size from the privacy budgets and lay the messages out.

    The key rate alpha1 is quantized to whole bits by rounding up, so the
    realized leakage never exceeds the delta budget (up to the ceiling
    guard); the realized download cost can only improve on the bound.
    """
    alpha = alpha1_rate(params)
    key_bits = math.ceil(alpha * params.message_bits - CEIL_GUARD)
    key_bits = max(0, min(key_bits, params.subpacket_total_bits()))
    return layout_for_key_bits(params, key_bits)


@dataclass(frozen=True)
class PathDistribution:
    """Per-base-vector probabilities of the retrieval path draw."""

    n_databases: int
    n_messages: int
    p: float
    q: float

    @property
    def low_total(self) -> float:
        return self.p * self.n_databases


def path_distribution(params: SystemParams) -> PathDistribution:
    """p = e^eps/(N e^eps + N^K - N) per low-cost base, q = 1/(...) otherwise.

    In the eps -> infinity limit this degenerates to p = 1/N, q = 0.
    """
    n, k = params.n_databases, params.n_messages
    if n < 2:
        raise ValueError("path distribution needs n_databases >= 2")
    e = params.exp_eps()
    high = n ** k - n
    if math.isinf(e):
        return PathDistribution(n, k, 1.0 / n, 0.0)
    denom = n * e + high
    return PathDistribution(n, k, e / denom, 1.0 / denom)


@dataclass(frozen=True)
class PathChoice:
    base: tuple[int, ...]
    desired: int
    path_class: PathClass


def classify_base(base: Sequence[int], desired: int) -> PathClass:
    if any(base[j] for j in range(len(base)) if j != desired):
        return PathClass.HIGH
    return PathClass.LOW


def sample_path(dist: PathDistribution, desired: int, rng) -> PathChoice:
    """Draw one base vector without enumerating the N^K-point support."""
    n, k = dist.n_databases, dist.n_messages
    if not 0 <= desired < k:
        raise ValueError("desired message index out of range")
    base = [0] * k
    base[desired] = rng.randrange(n)
    if rng.random() < dist.low_total:
        return PathChoice(tuple(base), desired, PathClass.LOW)
    while True:
        others = [rng.randrange(n) for _ in range(k - 1)]
        if any(others):
            break
    it = iter(others)
    for j in range(k):
        if j != desired:
            base[j] = next(it)
    return PathChoice(tuple(base), desired, PathClass.HIGH)


def structure_probability(dist: PathDistribution, indices: Sequence[int],
                          desired: int) -> float:
    """P(a given database receives query vector `indices` | desired).

    The same for every database: p when all off-desired coordinates are
    zero, q otherwise.
    """
    if any(indices[j] for j in range(len(indices)) if j != desired):
        return dist.q
    return dist.p


@dataclass(frozen=True)
class QueryVector:
    indices: tuple[int, ...]


@dataclass(frozen=True)
class MessageStore:
    """Replicated database contents: K messages plus the shared key."""

    messages: tuple[BitString, ...]
    key: BitString

    @classmethod
    def random(cls, params: SystemParams, layout: PartitionLayout,
               rng) -> "MessageStore":
        msgs = tuple(BitString.random(params.message_bits, rng)
                     for _ in range(params.n_messages))
        return cls(msgs, BitString.random(layout.key_bits, rng))


def make_queries(choice: PathChoice, params: SystemParams) -> tuple[QueryVector, ...]:
    """Query vectors for databases 0..N-1; only the desired coordinate varies."""
    n = params.n_databases
    out = []
    for d in range(n):
        v = list(choice.base)
        v[choice.desired] = (choice.base[choice.desired] + d + 1) % n
        out.append(QueryVector(tuple(v)))
    return tuple(out)


@dataclass(frozen=True)
class Answer:
    """One database's reply: keyed XOR part and clear XOR part."""

    masked: BitString
    open: BitString


def answer(store: MessageStore, layout: PartitionLayout,
           query: QueryVector) -> Answer:
    """Evaluate one query against the store.

    The masked part always carries the key, so it is s bits even for the
    all-zero query; the open part is empty exactly when every index is 0
    (for layouts with a nonzero open width).
    """
    if len(query.indices) != len(store.messages):
        raise ValueError("query length does not match message count")
    masked = store.key
    open_part = BitString.zeros(0)
    for k, v in enumerate(query.indices):
        if not 0 <= v <= layout.subpackets_per_part:
            raise ValueError("query index out of range")
        if v:
            masked = masked ^ layout.subpacket(store.messages[k], 1, v)
            open_part = open_part ^ layout.subpacket(store.messages[k], 2, v)
    return Answer(masked, open_part)


def _desired_zero_index(queries: Sequence[QueryVector], desired: int) -> dict:
    """Map desired-coordinate value -> database position; must be a bijection."""
    seen = {}
    for d, qv in enumerate(queries):
        v = qv.indices[desired]
        if v in seen:
            raise ValueError("duplicate desired-coordinate value across queries")
        seen[v] = d
    if 0 not in seen:
        raise ValueError("no query has 0 at the desired coordinate")
    return seen


def decode(answers: Sequence[Answer], queries: Sequence[QueryVector],
           desired: int) -> BitString:
    """Recover the desired message from the N aligned (answer, query) pairs."""
    if len(answers) != len(queries):
        raise ValueError("answers and queries must align")
    where = _desired_zero_index(queries, desired)
    n = len(queries)
    a0 = answers[where[0]]
    masked_parts, open_parts = [], []
    for ell in range(1, n):
        if ell not in where:
            raise ValueError("desired coordinate does not cover all residues")
        a = answers[where[ell]]
        masked_parts.append(a0.masked ^ a.masked)
        open_parts.append(a0.open ^ a.open)
    return BitString.join(masked_parts + open_parts)


@dataclass(frozen=True)
class ResidualView:
    """What the answers still describe after the desired message is removed.

    coefficients lists (message index, subpacket index) pairs of the one
    surviving open-part XOR combination; empty on low-cost paths, where
    nothing about the other messages survives.
    """

    coefficients: tuple[tuple[int, int], ...]
    bits: Optional[BitString]

    @property
    def leaked_bits(self) -> int:
        return self.bits.nbits if self.bits is not None else 0


def residual_view(answers: Sequence[Answer], queries: Sequence[QueryVector],
                  decoded: BitString, layout: PartitionLayout) -> ResidualView:
    """XOR the recovered message back out of every open part.

    Masked parts are never touched: the key pads them once and the user
    cannot strip it. On a high-cost path every database's open part
    collapses to the same single XOR of undesired open subpackets, which
    is exactly the leaked material.
    """
    if len(answers) != len(queries):
        raise ValueError("answers and queries must align")
    k = len(queries[0].indices)
    varying = [j for j in range(k)
               if len({qv.indices[j] for qv in queries}) > 1]
    if len(varying) != 1:
        raise ValueError("queries must vary in exactly one coordinate")
    desired = varying[0]
    base = queries[0].indices
    coeffs = tuple((j, base[j]) for j in range(k) if j != desired and base[j])
    if not coeffs:
        for d, qv in enumerate(queries):
            v = qv.indices[desired]
            expect = (layout.subpacket(decoded, 2, v) if v
                      else BitString.zeros(0))
            if answers[d].open != expect:
                raise ValueError("answers inconsistent with decoded message")
        return ResidualView((), None)
    residual = None
    for d, qv in enumerate(queries):
        v = qv.indices[desired]
        part = answers[d].open
        if v:
            part = part ^ layout.subpacket(decoded, 2, v)
        if residual is None:
            residual = part
        elif part != residual:
            raise ValueError("answers inconsistent with decoded message")
    return ResidualView(coeffs, residual)


def session_download_bits(layout: PartitionLayout, path_class: PathClass) -> int:
    """Total answer bits of one session: L + s on low, N L/(N-1) on high."""
    n = layout.subpackets_per_part + 1
    per_answer = layout.masked_subpacket_bits + layout.open_subpacket_bits
    if path_class is PathClass.HIGH:
        return n * per_answer
    return layout.message_bits + layout.key_bits


def expected_cost(params: SystemParams, layout: PartitionLayout) -> float:
    """Mean download per message bit under the realized (quantized) layout."""
    n = params.n_databases
    dist = path_distribution(params)
    return (1.0 + 1.0 / (n - 1)
            - dist.low_total * layout.open_subpacket_bits / params.message_bits)
