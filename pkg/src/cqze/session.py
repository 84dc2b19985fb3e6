"""End-to-end message transmission over the counterfactual channel.

Bob encodes each bit as pass (0) or block (1). Every attempt sends one
photon: the exact outcome distribution for that attempt's channel schedule
is sampled categorically, then D1/D2 arrivals are thinned by the detector
sensitivity. Alice decodes D1 -> 0 and D2 -> 1; anything else is retried
until ``max_retries`` is exhausted and the bit is erased.

Bit ``i`` consumes its own random stream, so results depend only on the
seed, never on batching.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from .engine import ProtocolParams, check_bob_bit, run_protocol
from .lattice import simulate_rows
from .metrics import OUTCOMES, ClickStatistics, mutual_information
from .noise import BATCH_ENTRIES, NoiseModel, schedule_rows, trial_stream

__all__ = ["SessionConfig", "SessionResult", "transmit", "random_bits"]

SESSION_DOMAIN = 1
MESSAGE_DOMAIN = 2

# Outcome label for each non-D1/D2 OutcomeDistribution field.
_SINK_OUTCOME = {2: "D3", 3: "bob", 4: "inconclusive"}


@dataclass(frozen=True)
class SessionConfig:
    bits: tuple[int, ...]
    params: ProtocolParams
    noise: NoiseModel = field(default_factory=NoiseModel)
    eta: float = 1.0
    max_retries: int = 10
    seed: int = 0

    def __post_init__(self):
        bits = tuple(check_bob_bit(b) for b in self.bits)
        if not bits:
            raise ValueError("bitstream must not be empty")
        object.__setattr__(self, "bits", bits)
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        if not isinstance(self.max_retries, int) or not 0 <= self.max_retries <= 1000:
            raise ValueError(f"max_retries must be an integer in [0, 1000], got {self.max_retries!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class SessionResult:
    decoded: tuple[int | None, ...]
    attempts: tuple[int, ...]
    ber: float | None
    erasure_rate: float
    throughput: float
    mutual_information: float
    outcome_counts: dict

    def to_dict(self) -> dict:
        return asdict(self)


def random_bits(n: int, seed: int) -> tuple[int, ...]:
    if n < 1:
        raise ValueError("need at least one bit")
    stream = trial_stream(seed, 0, domain=MESSAGE_DOMAIN)
    return tuple(int(b) for b in stream.integers(0, 2, size=n))


def _sample(dist: tuple[float, ...], u: float) -> int:
    cumulative = list(itertools.accumulate(dist))
    index = bisect.bisect_right(cumulative, u * cumulative[-1])
    return min(index, len(dist) - 1)


def _attempt_distributions(config, pending, streams):
    """Outcome distribution for the next attempt of every pending bit."""
    params, noise = config.params, config.noise
    if noise.B == 0.0:
        fixed = {b: run_protocol(params, b).as_tuple() for b in (0, 1)}
        return [fixed[config.bits[i]] for i in pending]

    size = max(1, BATCH_ENTRIES // params.N)
    out = []
    for lo in range(0, len(pending), size):
        group = pending[lo:lo + size]
        rows = schedule_rows(
            params, noise, [streams[i] for i in group], [config.bits[i] for i in group]
        )
        out.extend(tuple(row) for row in simulate_rows(params, len(group), rows).tolist())
    return out


def transmit(config: SessionConfig) -> SessionResult:
    n_bits = len(config.bits)
    streams = [trial_stream(config.seed, i, domain=SESSION_DOMAIN) for i in range(n_bits)]
    decoded: list[int | None] = [None] * n_bits
    attempts = [0] * n_bits
    counts = np.zeros((2, len(OUTCOMES)), dtype=np.int64)

    pending = list(range(n_bits))
    for _ in range(config.max_retries + 1):
        if not pending:
            break
        dists = _attempt_distributions(config, pending, streams)
        still_pending = []
        for i, dist in zip(pending, dists):
            stream = streams[i]
            attempts[i] += 1
            k = _sample(dist, stream.random())
            if k in (0, 1) and stream.random() < config.eta:
                outcome = OUTCOMES[k]
                decoded[i] = k
            else:
                outcome = "inconclusive" if k in (0, 1) else _SINK_OUTCOME[k]
                still_pending.append(i)
            counts[config.bits[i], OUTCOMES.index(outcome)] += 1
        pending = still_pending

    conclusive = [(b, d) for b, d in zip(config.bits, decoded) if d is not None]
    errors = sum(b != d for b, d in conclusive)
    total_attempts = sum(attempts)
    stats = ClickStatistics(counts / counts.sum())
    return SessionResult(
        decoded=tuple(decoded),
        attempts=tuple(attempts),
        ber=errors / len(conclusive) if conclusive else None,
        erasure_rate=(n_bits - len(conclusive)) / n_bits,
        throughput=len(conclusive) / total_attempts,
        mutual_information=mutual_information(stats),
        outcome_counts={
            f"bit{b}": dict(zip(OUTCOMES, map(int, counts[b]))) for b in (0, 1)
        },
    )
