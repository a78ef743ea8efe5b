"""System parameters shared by every layer of the package.

A configuration is N replicated non-colluding databases holding K
independent messages of L bits each, a user-privacy budget eps (likelihood
ratio bound e^eps, in nats) and a database-privacy budget delta (leakage
about the undesired messages, in bits per message bit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Above this eps the closed forms are evaluated in the eps -> infinity limit.
# e^50 ~ 5e21 already drives every eps-dependent term past double precision
# relevance, and the limit forms avoid overflow for arbitrarily large inputs.
DEFAULT_EPS_CAP = 50.0


@dataclass(frozen=True)
class SystemParams:
    """Immutable system configuration.

    Attributes:
        n_databases: N, number of replicated servers (>= 1).
        n_messages: K, number of stored messages (>= 2).
        message_bits: L, bits per message; (N-1) must divide L when N >= 2.
        eps: user-privacy budget in nats, >= 0, may be math.inf.
        delta: database-privacy budget in bits leaked per message bit, >= 0.
        eps_cap: eps at or above this value is treated as infinite.
    """

    n_databases: int
    n_messages: int
    message_bits: int
    eps: float
    delta: float
    eps_cap: float = DEFAULT_EPS_CAP

    def __post_init__(self) -> None:
        if not isinstance(self.n_databases, int) or self.n_databases < 1:
            raise ValueError("n_databases must be an integer >= 1")
        if not isinstance(self.n_messages, int) or self.n_messages < 2:
            raise ValueError("n_messages must be an integer >= 2")
        if not isinstance(self.message_bits, int) or self.message_bits < 1:
            raise ValueError("message_bits must be an integer >= 1")
        if self.n_databases >= 2 and self.message_bits % (self.n_databases - 1):
            raise ValueError(
                "message_bits must be divisible by n_databases - 1 "
                "(subpacketization requirement)"
            )
        if math.isnan(self.eps) or self.eps < 0:
            raise ValueError("eps must be >= 0")
        if math.isnan(self.delta) or self.delta < 0 or math.isinf(self.delta):
            raise ValueError("delta must be finite and >= 0")
        if self.eps_cap <= 0:
            raise ValueError("eps_cap must be positive")

    @property
    def eps_unbounded(self) -> bool:
        """True when eps is treated as infinite (at or above the cap)."""
        return self.eps >= self.eps_cap

    def exp_eps(self) -> float:
        """e^eps, or math.inf when eps is at or above the cap."""
        if self.eps_unbounded:
            return math.inf
        return math.exp(self.eps)

    def subpacket_count(self) -> int:
        """Subpackets per message part (N - 1). Requires N >= 2."""
        if self.n_databases < 2:
            raise ValueError("subpacketization needs at least 2 databases")
        return self.n_databases - 1

    def subpacket_total_bits(self) -> int:
        """L / (N - 1), the bits one subpacket slot spans across both parts."""
        return self.message_bits // self.subpacket_count()
