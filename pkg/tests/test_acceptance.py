"""Exit criteria for the simulator, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per criterion
is printed in the terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from cqze.cli import main
from cqze.engine import ProtocolParams, p1_closed_form, run_protocol
from cqze.lattice import BlockingSchedule, simulate_exact
from cqze.metrics import build_statistics, mutual_information
from cqze.michelson import run_michelson
from cqze.noise import NoiseModel, monte_carlo

OPERATING_POINTS = [
    ((25, 320), (0.906, 0.912)),
    ((50, 1250), (0.952, 0.953)),
    ((150, 10000), (0.984, 0.982)),
]
NOISE_RATES = [0.0, 0.0005, 0.001, 0.002, 0.005, 0.01]


def test_c01_operating_points(criterion):
    criterion("C1 operating points within 0.005, < 1 s total")
    start = time.perf_counter()
    got = [
        (run_protocol(ProtocolParams(M, N), 0).p_d1, run_protocol(ProtocolParams(M, N), 1).p_d2)
        for (M, N), _ in OPERATING_POINTS
    ]
    elapsed = time.perf_counter() - start
    for (_, (p1, p2)), (g1, g2) in zip(OPERATING_POINTS, got):
        assert abs(g1 - p1) <= 0.005
        assert abs(g2 - p2) <= 0.005
    assert elapsed < 1.0


def test_c02_closed_form(criterion):
    criterion("C2 p_d1(pass) = cos^2M(pi/2M) to 1e-12, M in 1..200, N in {1,10,100}")
    for M in range(1, 201):
        expected = math.cos(math.pi / (2 * M)) ** (2 * M)
        assert p1_closed_form(M) == expected
        for N in (1, 10, 100):
            assert abs(run_protocol(ProtocolParams(M, N), 0).p_d1 - expected) <= 1e-12
        if M > 25:
            assert expected > 0.90


def test_c03_conservation(criterion):
    criterion("C3 conservation to 1e-10 over 1000 random engine + oracle cases")
    rng = np.random.default_rng(20240601)
    cases = 0
    for _ in range(1000):
        M = int(np.exp(rng.uniform(0, math.log(100))) + 0.5)
        N = int(np.exp(rng.uniform(0, math.log(1000))) + 0.5)
        M, N = min(max(M, 1), 100), min(max(N, 1), 1000)
        bit = int(rng.integers(0, 2))
        s = float(rng.uniform(-4, 4)) if rng.random() < 0.5 else 0.0
        final = bool(rng.random() < 0.25)
        p = ProtocolParams.uniform(M, N, s, final)

        engine = run_protocol(p, bit)
        density = rng.uniform(0, 1)
        blocked = rng.random((M, N)) < density
        blocker = rng.integers(1, 3, size=(M, N))
        schedule = BlockingSchedule(np.where(blocked, blocker, 0).astype(np.int8))
        oracle = simulate_exact(p, schedule)

        for dist in (engine, oracle):
            assert all(-1e-15 <= v <= 1 + 1e-12 for v in dist.as_tuple())
            assert abs(dist.total() - 1.0) <= 1e-10
        cases += 1
    assert cases >= 1000


def test_c04_oracle_equivalence(criterion):
    criterion("C4 simulate_exact == run_protocol to 1e-12 on {1..10}^2, both bits")
    for M in range(1, 11):
        for N in range(1, 11):
            p = ProtocolParams(M, N)
            for bit in (0, 1):
                exact = simulate_exact(p, BlockingSchedule.for_bob(M, N, bit))
                engine = run_protocol(p, bit)
                for a, b in zip(exact.as_tuple(), engine.as_tuple()):
                    assert abs(a - b) <= 1e-12


def test_c05_michelson_equivalence(criterion):
    criterion("C5 run_michelson == run_protocol to 1e-12 on {1..10}^2, both bits")
    for M in range(1, 11):
        for N in range(1, 11):
            p = ProtocolParams(M, N)
            for bit in (0, 1):
                for a, b in zip(run_michelson(p, bit).as_tuple(), run_protocol(p, bit).as_tuple()):
                    assert abs(a - b) <= 1e-12


def test_c06_hand_unrolled(criterion):
    criterion("C6 M=N=2 gives (0.0625, 0.5625, 0.375) block, (0.25, 0.25, 0.5) pass")
    p = ProtocolParams(2, 2)
    block, passing = run_protocol(p, 1), run_protocol(p, 0)
    for got, want in [
        (block.p_d1, 0.0625), (block.p_d2, 0.5625), (block.p_bob, 0.375),
        (passing.p_d1, 0.25), (passing.p_d2, 0.25), (passing.p_d3, 0.5),
    ]:
        assert abs(got - want) <= 1e-12


def test_c07_imperfection(criterion):
    criterion("C7 success monotone non-increasing in s on [0, 4], > 0.75 for s < 2")
    grid = [i / 4 for i in range(17)]
    for M, N in [(25, 320), (50, 1250)]:
        d1 = [run_protocol(ProtocolParams.uniform(M, N, s), 0).p_d1 for s in grid]
        d2 = [run_protocol(ProtocolParams.uniform(M, N, s), 1).p_d2 for s in grid]
        for series in (d1, d2):
            assert all(b <= a for a, b in zip(series, series[1:]))
            assert min(v for s, v in zip(grid, series) if s < 2) > 0.75


def test_c08_noise(criterion):
    criterion("C8 p_d1 non-increasing in B within 3 SE, B=0 exact, block invariant, <= 60 s")
    p = ProtocolParams(25, 320)
    start = time.perf_counter()
    results = [monte_carlo(p, 0, NoiseModel(B, 2024, 10_000)) for B in NOISE_RATES]
    elapsed = time.perf_counter() - start

    assert results[0].mean == run_protocol(p, 0)
    assert results[0].std_error.p_d1 == 0.0
    for lo, hi in zip(results, results[1:]):
        slack = 3 * math.hypot(lo.std_error.p_d1, hi.std_error.p_d1)
        assert hi.mean.p_d1 <= lo.mean.p_d1 + slack
    assert elapsed <= 60.0

    reference = run_protocol(p, 1)
    for B in NOISE_RATES:
        block = monte_carlo(p, 1, NoiseModel(B, 2024, 2000)).mean
        assert abs(block.p_d1 - reference.p_d1) <= 1e-12
        assert abs(block.p_d2 - reference.p_d2) <= 1e-12
        assert block.p_d3 == 0.0
        assert abs(block.p_bob + block.p_noise - reference.p_bob) <= 1e-12


def test_c09_mutual_information(criterion):
    criterion("C9 MI zero without wrong clicks; 0.2462 +- 1e-3 bits at M=N=2")
    from cqze.engine import OutcomeDistribution

    perfect = build_statistics(OutcomeDistribution(p_d1=1.0), OutcomeDistribution(p_d2=1.0))
    assert mutual_information(perfect) == 0.0
    p = ProtocolParams(2, 2)
    value = mutual_information(build_statistics(run_protocol(p, 0), run_protocol(p, 1)))
    assert abs(value - 0.2462) <= 1e-3


def test_c10_determinism(criterion, capsys):
    criterion("C10 repeated CLI runs byte-identical, serial and parallel")
    invocations = [
        ["run", "--M", "25", "--N", "320", "--B", "0.002", "--trials", "500", "--seed", "17"],
        ["sweep", "--pairs", "25x320,10x40", "--B", "0.001,0.01", "--trials", "300", "--seed", "17"],
        ["sweep", "--preset", "fig4a", "--format", "json"],
        ["message", "--random-bits", "200", "--M", "10", "--N", "40", "--B", "0.01", "--seed", "17"],
    ]
    for argv in invocations:
        outputs = []
        for extra in ([], [], ["--jobs", "2"]):
            assert main(argv + extra) == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1] == outputs[2]
        assert outputs[0]
    json.loads(outputs[0])
