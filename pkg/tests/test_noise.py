import numpy as np
import pytest

from cqze import noise as noise_mod
from cqze.engine import ProtocolParams, run_protocol
from cqze.lattice import Channel, simulate_exact
from cqze.noise import NoiseModel, monte_carlo, sample_schedule, schedule_rows, trial_stream

P25 = ProtocolParams(25, 320)
PINNED_2x4 = [[0, 0, 2, 0], [2, 2, 2, 0]]


class TestNoiseModel:
    @pytest.mark.parametrize("kwargs", [dict(B=-0.1), dict(B=1.5), dict(trials=0), dict(seed=-1), dict(seed=2**64)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            NoiseModel(**kwargs)


class TestSampleSchedule:
    def test_zero_rate(self):
        s = sample_schedule(P25, NoiseModel(0.0), trial_stream(1, 0))
        assert (s.bits == Channel.TRANSPARENT).all()
        assert s.shape == (25, 320)

    def test_full_rate(self):
        s = sample_schedule(P25, NoiseModel(1.0), trial_stream(1, 0), bob_bit=1)
        assert (s.bits == Channel.NOISE).all()

    def test_bob_fills_open_passes(self):
        s = sample_schedule(P25, NoiseModel(0.3), trial_stream(5, 3), bob_bit=1)
        assert set(np.unique(s.bits)) == {Channel.BOB, Channel.NOISE}

    def test_threshold_on_draws(self):
        model = NoiseModel(0.5)
        draws = trial_stream(9, 4).random((25, 320))
        s = sample_schedule(P25, model, trial_stream(9, 4))
        assert np.array_equal(s.bits == Channel.NOISE, draws < 0.5)

    def test_reproducible(self):
        a = sample_schedule(P25, NoiseModel(0.5), trial_stream(42, 7))
        b = sample_schedule(P25, NoiseModel(0.5), trial_stream(42, 7))
        assert a == b
        c = sample_schedule(P25, NoiseModel(0.5), trial_stream(42, 8))
        assert a != c

    def test_pinned_stream(self):
        # Guards against silent changes to the seed derivation.
        s = sample_schedule(ProtocolParams(2, 4), NoiseModel(0.5), trial_stream(2024, 0))
        assert s.bits.tolist() == PINNED_2x4


class TestMonteCarlo:
    def test_zero_noise_is_engine(self):
        for bit in (0, 1):
            r = monte_carlo(P25, bit, NoiseModel(0.0, 3, 17))
            assert r.mean == run_protocol(P25, bit)
            assert r.std_error.as_tuple() == (0.0,) * 5
            assert r.trials == 17 and r.seed == 3

    @pytest.mark.parametrize("B", [0.001, 0.01, 0.2])
    def test_block_case_unchanged_at_alice(self, B):
        p = ProtocolParams(10, 40)
        r = monte_carlo(p, 1, NoiseModel(B, 11, 300))
        ref = run_protocol(p, 1)
        assert r.mean.p_d1 == pytest.approx(ref.p_d1, abs=1e-12)
        assert r.mean.p_d2 == pytest.approx(ref.p_d2, abs=1e-12)
        assert r.mean.p_d3 == 0.0
        assert r.mean.p_bob + r.mean.p_noise == pytest.approx(ref.p_bob, abs=1e-12)

    def test_deterministic(self):
        model = NoiseModel(0.01, 77, 500)
        assert monte_carlo(P25, 0, model) == monte_carlo(P25, 0, model)

    def test_batching_does_not_matter(self, monkeypatch):
        p = ProtocolParams(4, 6)
        model = NoiseModel(0.2, 5, 50)
        whole = monte_carlo(p, 0, model)
        monkeypatch.setattr(noise_mod, "BATCH_ENTRIES", 6 * 7)
        assert noise_mod._chunks(p, 50)[0] == (0, 7)
        assert monte_carlo(p, 0, model) == whole

    def test_parallel_matches_serial(self, monkeypatch):
        p = ProtocolParams(4, 6)
        model = NoiseModel(0.2, 5, 40)
        monkeypatch.setattr(noise_mod, "BATCH_ENTRIES", 6 * 10)
        assert monte_carlo(p, 0, model, workers=2) == monte_carlo(p, 0, model)

    def test_mean_matches_oracle_average(self):
        p = ProtocolParams(3, 5)
        model = NoiseModel(0.3, 8, 25)
        expected = np.mean(
            [
                simulate_exact(p, sample_schedule(p, model, trial_stream(8, i))).as_tuple()
                for i in range(25)
            ],
            axis=0,
        )
        assert np.allclose(monte_carlo(p, 0, model).mean.as_tuple(), expected, atol=1e-14)

    def test_conserves(self):
        r = monte_carlo(ProtocolParams(8, 30), 0, NoiseModel(0.05, 1, 200))
        r.mean.validate(1e-10)
        assert all(v >= 0 for v in r.std_error.as_tuple())

    def test_golden_25_320(self):
        r = monte_carlo(P25, 0, NoiseModel(0.002, 2024, 10_000))
        assert r.mean.p_d1 == pytest.approx(0.8704895790824392, rel=1e-10)
        assert r.mean.p_d1 > 0.5
        assert r.std_error.p_d1 < 0.005

    def test_degrades_at_one_percent(self):
        clean = run_protocol(P25, 0).p_d1
        noisy = monte_carlo(P25, 0, NoiseModel(0.01, 2024, 2000)).mean.p_d1
        assert noisy < clean - 0.1


def test_schedule_rows_match_per_trial_schedules():
    p = ProtocolParams(3, 7)
    model = NoiseModel(0.4, 11, 1)
    bits = [0, 1, 1, 0]
    rows = list(schedule_rows(p, model, [trial_stream(11, i) for i in range(4)], bits))
    for i, bit in enumerate(bits):
        expected = sample_schedule(p, model, trial_stream(11, i), bit).bits
        assert np.array_equal(np.stack([r[i] for r in rows]), expected)
