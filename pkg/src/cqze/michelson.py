"""Polarization (tandem Michelson) realization of the chained protocol.

Each interferometer replaces its beam splitter by a polarizing beam splitter
plus a switchable polarization rotator (SPR). The photon crosses the SPR
twice per cycle, so a rotator angle ``beta`` gives a net ``2 * beta`` per
cycle. Optical delays are treated as ideal.

Routing conventions:

* outer interferometer: H stays on the SM1/MR1 arm, V is sent into the
  inner interferometer;
* inner interferometer: V stays on the SM2/MR2 arm, H travels the channel
  to Bob. Bob's Pockels cell either returns H unchanged (pass) or flips it
  to V, which PBS_B reflects into D4 (block).

When SM1 opens after ``M`` cycles, PBS_0 sends H to D1 and V to D2. Channel
light left in the inner interferometer when SM2 opens goes to D3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import OutcomeDistribution, ProtocolParams, check_bob_bit

__all__ = ["PolarizationAmplitude", "spr_rotate", "run_michelson"]


@dataclass(frozen=True)
class PolarizationAmplitude:
    h: float = 0.0
    v: float = 0.0

    def norm2(self) -> float:
        return self.h * self.h + self.v * self.v


def spr_rotate(state: PolarizationAmplitude, beta: float) -> PolarizationAmplitude:
    """One pass through a rotator: ``H -> cos H + sin V``, ``V -> cos V - sin H``."""
    c, s = math.cos(beta), math.sin(beta)
    return PolarizationAmplitude(state.h * c - state.v * s, state.h * s + state.v * c)


def _cycle(state: PolarizationAmplitude, beta: float) -> PolarizationAmplitude:
    return spr_rotate(spr_rotate(state, beta), beta)


def run_michelson(params: ProtocolParams, bob_bit: int) -> OutcomeDistribution:
    """Terminal distribution of the polarization setup.

    Rotator angles are ``beta_M = outer_angle / 2`` and
    ``beta_N = inner_angle / 2``, i.e. ``pi / 4M`` and ``pi / 4N`` when ideal.
    """
    blocks = bool(check_bob_bit(bob_bit))
    beta_M = params.outer_angle / 2
    beta_N = params.inner_angle / 2
    d3 = []
    d4 = []

    def inner_interferometer(home_v: float) -> float:
        # SM2 holds the photon for N cycles; returns the V amplitude on release.
        state = PolarizationAmplitude(h=0.0, v=home_v)
        for _ in range(params.N):
            state = _cycle(state, beta_N)
            if blocks:
                # PC_B turns the returning H into V; PBS_B reflects it into D4.
                d4.append(state.h * state.h)
                state = PolarizationAmplitude(h=0.0, v=state.v)
        d3.append(state.h * state.h)
        return state.v

    outer = PolarizationAmplitude(h=1.0, v=0.0)
    for m in range(params.M):
        outer = _cycle(outer, beta_M)
        if m < params.M - 1 or params.final_inner_chain:
            outer = PolarizationAmplitude(h=outer.h, v=inner_interferometer(outer.v))

    return OutcomeDistribution(
        p_d1=outer.h ** 2,
        p_d2=outer.v ** 2,
        p_d3=math.fsum(d3),
        p_bob=math.fsum(d4),
    )
