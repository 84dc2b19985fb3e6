"""Simulator for direct counterfactual communication via the chained quantum Zeno effect."""

from .engine import (
    OutcomeDistribution,
    ProtocolParams,
    TripartiteAmplitude,
    inner_chain,
    p1_closed_form,
    rotate_pair,
    run_protocol,
    simple_chain,
)
from .lattice import BlockingSchedule, Channel, ModeLattice, leak_trace, simulate_batch, simulate_exact
from .metrics import ClickStatistics, build_statistics, error_rates, mutual_information
from .michelson import PolarizationAmplitude, run_michelson, spr_rotate
from .noise import MonteCarloResult, NoiseModel, monte_carlo, sample_schedule, trial_stream
from .session import SessionConfig, SessionResult, transmit

__version__ = "0.1.0"
