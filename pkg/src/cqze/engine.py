"""Amplitude recursions for the single beam-splitter chain and the chained
(M x N) Zeno protocol.

All amplitudes are real. A beam splitter with angle ``theta`` acts on a
mode pair as the rotation::

    |10> -> cos(theta)|10> + sin(theta)|01>
    |01> -> cos(theta)|01> - sin(theta)|10>

so its reflectivity is ``R = cos(theta)**2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

__all__ = [
    "ProtocolParams",
    "TripartiteAmplitude",
    "OutcomeDistribution",
    "rotate_pair",
    "simple_chain",
    "inner_chain",
    "run_protocol",
    "p1_closed_form",
    "check_bob_bit",
]

FIELDS = ("p_d1", "p_d2", "p_d3", "p_bob", "p_noise")


def check_bob_bit(bob_bit) -> int:
    if bob_bit not in (0, 1) or isinstance(bob_bit, float):
        raise ValueError(f"bob_bit must be 0 or 1, got {bob_bit!r}")
    return int(bob_bit)


@dataclass(frozen=True)
class ProtocolParams:
    """Cycle counts and imperfection factors for one protocol configuration.

    Attributes:
        M: number of big (outer) cycles.
        N: number of small (inner) cycles per big cycle.
        s_M: outer rotator imperfection factor.
        s_N: inner rotator imperfection factor.
        final_inner_chain: run an inner chain after the M-th outer beam
            splitter as well, so D2 sees ``y_{M,N}`` instead of ``y_{M,0}``.
    """

    M: int
    N: int
    s_M: float = 0.0
    s_N: float = 0.0
    final_inner_chain: bool = False

    def __post_init__(self):
        for name in ("M", "N"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        for name in ("s_M", "s_N"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def uniform(cls, M: int, N: int, s: float = 0.0, final_inner_chain: bool = False):
        """Params with a single imperfection factor ``s = s_M = s_N``."""
        return cls(M, N, s_M=s, s_N=s, final_inner_chain=final_inner_chain)

    @property
    def theta_M(self) -> float:
        return math.pi / (2 * self.M)

    @property
    def theta_N(self) -> float:
        return math.pi / (2 * self.N)

    @property
    def outer_angle(self) -> float:
        """Effective outer rotation per cycle, ``theta_M + s_M * theta_M / M``."""
        return self.theta_M + self.s_M * (self.theta_M / self.M)

    @property
    def inner_angle(self) -> float:
        """Effective inner rotation per cycle, ``theta_N + s_N * theta_N / N``."""
        return self.theta_N + self.s_N * (self.theta_N / self.N)

    @property
    def n_inner_chains(self) -> int:
        return self.M if self.final_inner_chain else self.M - 1


@dataclass(frozen=True)
class TripartiteAmplitude:
    """Photon amplitudes on the outer arm (x), inner arm (y) and channel (z)."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def norm2(self) -> float:
        return math.fsum((self.x * self.x, self.y * self.y, self.z * self.z))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Terminal probabilities of one photon.

    ``p_d3`` is the D3 detector bank, ``p_bob`` absorption at Bob's blocking
    device (D4), ``p_noise`` absorption by a foreign obstruction.
    """

    p_d1: float = 0.0
    p_d2: float = 0.0
    p_d3: float = 0.0
    p_bob: float = 0.0
    p_noise: float = 0.0

    def total(self) -> float:
        return math.fsum(self.as_tuple())

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, f) for f in FIELDS)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def validate(self, tol: float = 1e-10) -> "OutcomeDistribution":
        for name, value in self.as_dict().items():
            if not -tol <= value <= 1 + tol:
                raise ValueError(f"{name}={value} outside [0, 1]")
        if abs(self.total() - 1.0) > tol:
            raise ValueError(f"distribution sums to {self.total()!r}, not 1")
        return self


def rotate_pair(a: float, b: float, theta: float) -> tuple[float, float]:
    """Apply the beam-splitter rotation to the amplitude pair ``(a, b)``."""
    c, s = math.cos(theta), math.sin(theta)
    return a * c - b * s, a * s + b * c


def simple_chain(N: int, blocked: bool) -> OutcomeDistribution:
    """Single chain of ``N`` splitters with ``theta = pi / 2N``.

    When blocked, the channel mode is absorbed after every splitter,
    including the last one, so nothing reaches D2.
    """
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    theta = math.pi / (2 * N)
    a, b = 1.0, 0.0
    absorbed = []
    for _ in range(N):
        a, b = rotate_pair(a, b, theta)
        if blocked:
            absorbed.append(b * b)
            b = 0.0
    return OutcomeDistribution(p_d1=a * a, p_d2=b * b, p_bob=math.fsum(absorbed))


def inner_chain(
    y_in: float,
    params: ProtocolParams,
    c_schedule: Sequence[int],
    blocker: str = "bob",
) -> tuple[float, float, float, float]:
    """Run one inner chain of ``N`` small cycles starting from ``z = 0``.

    ``c_schedule[n]`` is 1 when the channel is transparent on pass ``n`` and 0
    when it is blocked. Blocked mass goes to Bob's absorber or to the noise
    sink depending on ``blocker``.

    Returns:
        ``(y_out, z_out, absorbed_bob, absorbed_noise)``
    """
    if len(c_schedule) != params.N:
        raise ValueError(f"schedule length {len(c_schedule)} != N={params.N}")
    if blocker not in ("bob", "noise"):
        raise ValueError(f"unknown blocker {blocker!r}")
    a, b = math.cos(params.inner_angle), math.sin(params.inner_angle)
    y, z = y_in, 0.0
    absorbed = []
    for c in c_schedule:
        y, channel = a * y - b * z, b * y + a * z
        if c:
            z = channel
        else:
            absorbed.append(channel * channel)
            z = 0.0
    total = math.fsum(absorbed)
    if blocker == "bob":
        return y, z, total, 0.0
    return y, z, 0.0, total


def run_protocol(params: ProtocolParams, bob_bit: int) -> OutcomeDistribution:
    """Exact terminal distribution when Bob passes (0) or blocks (1) throughout.

    Bob's choice is the same for every inner pass, so each inner chain is a
    fixed linear map of its input ``y``. It is computed once with unit input
    and rescaled for every big cycle.
    """
    c = 1 - check_bob_bit(bob_bit)
    g, h, k, _ = inner_chain(1.0, params, [c] * params.N)
    x, y = rotate_pair(1.0, 0.0, params.outer_angle)
    d3, bob = [], []

    def run_chain(y):
        bob.append(k * y * y)
        d3.append((h * y) ** 2)
        return g * y

    for _ in range(params.M - 1):
        x, y = rotate_pair(x, run_chain(y), params.outer_angle)
    if params.final_inner_chain:
        y = run_chain(y)
    return OutcomeDistribution(
        p_d1=x * x, p_d2=y * y, p_d3=math.fsum(d3), p_bob=math.fsum(bob)
    )


def p1_closed_form(M: int) -> float:
    """D1 probability for an ideal passing Bob, ``cos(pi / 2M) ** 2M``."""
    if isinstance(M, bool) or not isinstance(M, int) or M < 1:
        raise ValueError(f"M must be a positive integer, got {M!r}")
    return math.cos(math.pi / (2 * M)) ** (2 * M)
