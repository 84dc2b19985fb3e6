"""Brute-force beam-splitter lattice with per-sink bookkeeping.

Every splitter, channel pass and detector collection is an explicit step on
a :class:`ModeLattice`, which keeps one sink entry per absorber location.
This is the reference the recursion in :mod:`cqze.engine` is checked
against, and it is the only evaluator that accepts arbitrary blocking
schedules.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import OutcomeDistribution, ProtocolParams, TripartiteAmplitude

__all__ = [
    "Channel",
    "BlockingSchedule",
    "ModeLattice",
    "simulate_exact",
    "leak_trace",
    "simulate_batch",
    "simulate_rows",
]


class Channel(enum.IntEnum):
    TRANSPARENT = 0
    BOB = 1
    NOISE = 2


@dataclass(frozen=True, eq=False)
class BlockingSchedule:
    """Channel state for every inner pass, an ``(M, N)`` array of :class:`Channel` codes.

    Row ``m`` drives the inner chain of big cycle ``m`` (0-based). In the
    default layout the last row has no inner chain and is never read.
    """

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.int8)
        if bits.ndim != 2:
            raise ValueError(f"schedule must be 2-D, got shape {bits.shape}")
        if bits.size and (bits.min() < 0 or bits.max() > 2):
            raise ValueError("schedule entries must be Channel codes 0, 1 or 2")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def constant(cls, M: int, N: int, state: Channel) -> "BlockingSchedule":
        return cls(np.full((M, N), int(state), dtype=np.int8))

    @classmethod
    def for_bob(cls, M: int, N: int, bob_bit: int) -> "BlockingSchedule":
        return cls.constant(M, N, Channel.BOB if bob_bit else Channel.TRANSPARENT)

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    def check(self, params: ProtocolParams) -> None:
        if self.shape != (params.M, params.N):
            raise ValueError(
                f"schedule shape {self.shape} does not match (M, N) = ({params.M}, {params.N})"
            )

    def __eq__(self, other):
        if not isinstance(other, BlockingSchedule):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)


@dataclass
class ModeLattice:
    """Photon state while it walks the lattice.

    ``sinks`` maps ``("d3", m)``, ``("bob", m, n)`` and ``("noise", m, n)``
    to absorbed probability.
    """

    active: TripartiteAmplitude = field(default_factory=lambda: TripartiteAmplitude(x=1.0))
    sinks: dict = field(default_factory=dict)
    p_d1: float = 0.0
    p_d2: float = 0.0

    def outer_splitter(self, theta: float) -> None:
        x, y, z = self.active.x, self.active.y, self.active.z
        c, s = math.cos(theta), math.sin(theta)
        self.active = TripartiteAmplitude(c * x - s * y, s * x + c * y, z)

    def inner_splitter(self, theta: float) -> None:
        x, y, z = self.active.x, self.active.y, self.active.z
        c, s = math.cos(theta), math.sin(theta)
        self.active = TripartiteAmplitude(x, c * y - s * z, s * y + c * z)

    def channel_pass(self, m: int, n: int, state: Channel) -> None:
        if state == Channel.TRANSPARENT:
            return
        z = self.active.z
        key = ("bob" if state == Channel.BOB else "noise", m, n)
        self.sinks[key] = self.sinks.get(key, 0.0) + z * z
        self.active = TripartiteAmplitude(self.active.x, self.active.y, 0.0)

    def collect_d3(self, m: int) -> None:
        z = self.active.z
        self.sinks[("d3", m)] = self.sinks.get(("d3", m), 0.0) + z * z
        self.active = TripartiteAmplitude(self.active.x, self.active.y, 0.0)

    def detect(self) -> None:
        """Send the outer arm to D1 and the inner arm to D2."""
        self.p_d1 += self.active.x ** 2
        self.p_d2 += self.active.y ** 2
        self.active = TripartiteAmplitude(0.0, 0.0, self.active.z)

    def total(self) -> float:
        return math.fsum(
            [self.active.norm2(), self.p_d1, self.p_d2, *self.sinks.values()]
        )

    def sink_total(self, kind: str) -> float:
        return math.fsum(v for k, v in self.sinks.items() if k[0] == kind)

    def distribution(self) -> OutcomeDistribution:
        return OutcomeDistribution(
            p_d1=self.p_d1,
            p_d2=self.p_d2,
            p_d3=self.sink_total("d3"),
            p_bob=self.sink_total("bob"),
            p_noise=self.sink_total("noise"),
        )


def _walk(params: ProtocolParams, schedule: BlockingSchedule, on_step=None, on_pass=None):
    schedule.check(params)
    lattice = ModeLattice()
    step = on_step or (lambda lat: None)
    outer, inner = params.outer_angle, params.inner_angle

    for m in range(params.M):
        lattice.outer_splitter(outer)
        step(lattice)
        if m < params.M - 1 or params.final_inner_chain:
            for n in range(params.N):
                lattice.inner_splitter(inner)
                step(lattice)
                lattice.channel_pass(m, n, Channel(schedule.bits[m, n]))
                step(lattice)
                if on_pass is not None:
                    on_pass(m, n, lattice.active.z ** 2)
            lattice.collect_d3(m)
            step(lattice)
    lattice.detect()
    step(lattice)
    return lattice


def simulate_exact(
    params: ProtocolParams, schedule: BlockingSchedule, check: bool = False
) -> OutcomeDistribution:
    """Terminal distribution for an arbitrary blocking schedule.

    With ``check=True`` total probability is audited after every elementary
    step (quadratic cost, meant for small lattices).
    """
    audit = None
    if check:
        def audit(lattice):
            total = lattice.total()
            if abs(total - 1.0) > 1e-12:
                raise AssertionError(f"probability not conserved: {total!r}")
            if any(v < 0 for v in lattice.sinks.values()):
                raise AssertionError("negative sink")

    return _walk(params, schedule, on_step=audit).distribution()


def leak_trace(params: ProtocolParams, schedule: BlockingSchedule) -> np.ndarray:
    """Channel occupation ``z**2`` after every inner pass.

    Returns an array of shape ``(n_inner_chains, N)``; row ``m`` is the
    inner chain of big cycle ``m``, values taken after any blocking and
    before D3 collection.
    """
    trace = np.zeros((params.n_inner_chains, params.N))

    def record(m, n, occupation):
        trace[m, n] = occupation

    _walk(params, schedule, on_pass=record)
    return trace


def simulate_batch(params: ProtocolParams, schedules: np.ndarray) -> np.ndarray:
    """Vectorized lattice walk over a stack of schedules.

    Args:
        params: protocol configuration.
        schedules: ``(T, M, N)`` array of :class:`Channel` codes.

    Returns:
        ``(T, 5)`` array of ``(p_d1, p_d2, p_d3, p_bob, p_noise)`` per schedule.
    """
    schedules = np.asarray(schedules)
    if schedules.ndim != 3 or schedules.shape[1:] != (params.M, params.N):
        raise ValueError(
            f"schedules shape {schedules.shape} does not match (T, {params.M}, {params.N})"
        )
    rows = (schedules[:, m, :] for m in range(params.M))
    return simulate_rows(params, schedules.shape[0], rows)


def simulate_rows(params: ProtocolParams, T: int, rows) -> np.ndarray:
    """Like :func:`simulate_batch`, but schedule rows arrive one big cycle at a time.

    ``rows`` yields a ``(T, N)`` code array per inner chain, in order; only
    the first ``params.n_inner_chains`` rows are consumed.
    """
    a_M, b_M = math.cos(params.outer_angle), math.sin(params.outer_angle)
    a_N, b_N = math.cos(params.inner_angle), math.sin(params.inner_angle)

    x = np.full(T, 1.0)
    y = np.zeros(T)
    d3 = np.zeros(T)
    bob = np.zeros(T)
    noise = np.zeros(T)
    rows = iter(rows)

    for m in range(params.M):
        x, y = a_M * x - b_M * y, b_M * x + a_M * y
        if not (m < params.M - 1 or params.final_inner_chain):
            continue
        row = np.asarray(next(rows))
        if row.shape != (T, params.N):
            raise ValueError(f"row {m} has shape {row.shape}, expected ({T}, {params.N})")
        cols = np.ascontiguousarray(row.T)
        z = np.zeros(T)
        for n in range(params.N):
            y, z = a_N * y - b_N * z, b_N * y + a_N * z
            col = cols[n]
            if not col.any():
                continue
            z2 = z * z
            bob += np.where(col == Channel.BOB, z2, 0.0)
            noise += np.where(col == Channel.NOISE, z2, 0.0)
            z = np.where(col == Channel.TRANSPARENT, z, 0.0)
        d3 += z * z

    return np.stack([x * x, y * y, d3, bob, noise], axis=1)
