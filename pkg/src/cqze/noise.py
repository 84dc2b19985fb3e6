"""Seeded Monte Carlo over random channel obstructions.

Each channel pass is blocked by a foreign object with probability ``B``.
Trial ``i`` draws from its own stream derived from ``(seed, i)``, so results
do not depend on how trials are batched or distributed over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import FIELDS, OutcomeDistribution, ProtocolParams, check_bob_bit, run_protocol
from .lattice import BlockingSchedule, Channel, simulate_rows

__all__ = [
    "NoiseModel",
    "MonteCarloResult",
    "trial_stream",
    "sample_schedule",
    "schedule_rows",
    "monte_carlo",
]

# Upper bound on schedule entries (trials x N) held in memory at once.
BATCH_ENTRIES = 1 << 24


@dataclass(frozen=True)
class NoiseModel:
    B: float = 0.0
    seed: int = 0
    trials: int = 10_000

    def __post_init__(self):
        if not 0.0 <= self.B <= 1.0:
            raise ValueError(f"noise rate B must lie in [0, 1], got {self.B!r}")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class MonteCarloResult:
    mean: OutcomeDistribution
    std_error: OutcomeDistribution
    trials: int
    seed: int


def trial_stream(seed: int, index: int, domain: int = 0) -> np.random.Generator:
    """Independent generator for trial ``index`` under ``seed``.

    ``domain`` separates unrelated consumers of the same seed.
    """
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(domain, index)))
    )


def sample_schedule(
    params: ProtocolParams,
    model: NoiseModel,
    stream: np.random.Generator,
    bob_bit: int = 0,
) -> BlockingSchedule:
    """Draw ``M * N`` uniforms; a pass is noise-blocked iff its draw is below ``B``.

    Bob's block fills every pass the noise left open.
    """
    draws = stream.random((params.M, params.N))
    base = Channel.BOB if check_bob_bit(bob_bit) else Channel.TRANSPARENT
    bits = np.where(draws < model.B, np.int8(Channel.NOISE), np.int8(base))
    return BlockingSchedule(bits)


def schedule_rows(params, model, streams, bob_bits):
    """Yield the rows of :func:`sample_schedule` for many streams at once.

    Row ``m`` is a ``(len(streams), N)`` array; each stream is consumed in
    the same order ``sample_schedule`` would consume it.
    """
    base = np.where(np.asarray(bob_bits) == 1, np.int8(Channel.BOB), np.int8(Channel.TRANSPARENT))
    for _ in range(params.M):
        draws = np.stack([stream.random(params.N) for stream in streams])
        yield np.where(draws < model.B, np.int8(Channel.NOISE), base[:, None])


def _run_trials(params, bob_bit, model, start, stop):
    streams = [trial_stream(model.seed, i) for i in range(start, stop)]
    rows = schedule_rows(params, model, streams, [bob_bit] * len(streams))
    return simulate_rows(params, len(streams), rows)


def _chunks(params, trials):
    size = max(1, min(trials, BATCH_ENTRIES // params.N))
    return [(lo, min(lo + size, trials)) for lo in range(0, trials, size)]


def monte_carlo(
    params: ProtocolParams,
    bob_bit: int,
    model: NoiseModel,
    workers: int = 1,
) -> MonteCarloResult:
    """Average the exact lattice distribution over ``model.trials`` random schedules.

    At ``B = 0`` every schedule is Bob's constant one, so the noiseless
    engine result is returned directly with zero standard error.
    """
    bob_bit = check_bob_bit(bob_bit)
    if model.B == 0.0:
        return MonteCarloResult(
            mean=run_protocol(params, bob_bit),
            std_error=OutcomeDistribution(),
            trials=model.trials,
            seed=model.seed,
        )

    chunks = _chunks(params, model.trials)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    _run_trials,
                    *zip(*[(params, bob_bit, model, lo, hi) for lo, hi in chunks]),
                )
            )
    else:
        parts = [_run_trials(params, bob_bit, model, lo, hi) for lo, hi in chunks]
    samples = np.concatenate(parts)

    T = samples.shape[0]
    means = [math.fsum(samples[:, j]) / T for j in range(len(FIELDS))]
    if T > 1:
        errors = [
            math.sqrt(math.fsum((samples[:, j] - means[j]) ** 2) / (T - 1) / T)
            for j in range(len(FIELDS))
        ]
    else:
        errors = [0.0] * len(FIELDS)
    return MonteCarloResult(
        mean=OutcomeDistribution(*means),
        std_error=OutcomeDistribution(*errors),
        trials=T,
        seed=model.seed,
    )
