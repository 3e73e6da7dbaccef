import datetime as dt

import numpy as np
import pytest

from newsflow.errors import DomainError
from newsflow.jumpflow import batch_event_flows
from newsflow.synth import (
    BENCHMARK_FLOW_PARAMS,
    BENCHMARK_SHAPES,
    ArchetypeSpec,
    SynthPlan,
    depth_to_mixing,
    generate,
    planted_flow_profile,
    standard_benchmark,
)


class TestSpecs:
    def test_unknown_shape_rejected(self):
        with pytest.raises(DomainError):
            ArchetypeSpec("wiggle")

    def test_negative_depth_rejected(self):
        with pytest.raises(DomainError):
            ArchetypeSpec("symmetric_dip", depth=-1)

    def test_event_outside_plan_rejected(self):
        with pytest.raises(DomainError):
            SynthPlan(
                n_days=10,
                events=((dt.date(1961, 1, 1), ArchetypeSpec("noise_only")),),
            )

    def test_depth_zero_means_no_mixing(self):
        assert depth_to_mixing(0.0, 24, 5.0) == 0.0

    def test_depth_monotone_in_mixing(self):
        m1 = depth_to_mixing(1.0, 24, 5.0)
        m3 = depth_to_mixing(3.0, 24, 5.0)
        assert 0 < m1 < m3 < 1


class TestGenerate:
    def test_rows_on_simplex(self):
        plan = SynthPlan(
            n_topics=12,
            n_days=200,
            events=((dt.date(1960, 4, 1), ArchetypeSpec("symmetric_dip", 9, 9)),),
            seed=5,
            event_topic_pool=1,
        )
        m = generate(plan)
        sums = m.rows.sum(axis=1)
        np.testing.assert_allclose(sums, 1.0, atol=1e-9)
        assert np.all(m.rows >= 0)
        assert len(m) == 200

    def test_same_seed_bit_identical(self):
        plan = SynthPlan(n_topics=8, n_days=80, seed=42)
        a = generate(plan)
        b = generate(plan)
        np.testing.assert_array_equal(a.rows, b.rows)

    def test_depth_zero_is_pure_background(self):
        quiet = SynthPlan(
            n_topics=8,
            n_days=80,
            events=((dt.date(1960, 2, 1), ArchetypeSpec("symmetric_dip", depth=0.0)),),
            seed=7,
            event_topic_pool=1,
        )
        plain = SynthPlan(n_topics=8, n_days=80, seed=7)
        np.testing.assert_array_equal(generate(quiet).rows, generate(plain).rows)

    def test_sudden_onset_plateau_jumps_and_persists(self):
        spec = ArchetypeSpec("sudden_onset_plateau", onset_lead=0, recovery=30, depth=3.0)
        event_day = dt.date(1960, 5, 1)
        plan = SynthPlan(
            n_topics=12, n_days=240, events=((event_day, spec),), seed=3,
            event_topic_pool=1,
        )
        m = generate(plan)
        topic = plan.n_topics - 1
        day = (event_day - plan.start).days
        before = m.rows[day - 20 : day - 5, topic].mean()
        during = m.rows[day : day + 30, topic].mean()
        after = m.rows[day + 40 :, topic].mean()
        assert during > 3 * before
        assert during > 3 * after

    def test_overlapping_events_warn_and_stay_on_simplex(self):
        specs = (
            (dt.date(1960, 3, 1), ArchetypeSpec("sudden_onset_plateau", 0, 30)),
            (dt.date(1960, 3, 10), ArchetypeSpec("sudden_onset_plateau", 0, 30)),
        )
        plan = SynthPlan(n_topics=10, n_days=160, events=specs, seed=1, event_topic_pool=2)
        with pytest.warns(UserWarning, match="overlapping"):
            m = generate(plan)
        np.testing.assert_allclose(m.rows.sum(axis=1), 1.0, atol=1e-9)


class TestPlantedProfile:
    def test_noise_only_is_flat_zero(self):
        prof = planted_flow_profile(ArchetypeSpec("noise_only"), 28, 5)
        assert np.all(prof.values == 0.0)

    def test_profiles_z_normalized(self):
        for spec in BENCHMARK_SHAPES:
            prof = planted_flow_profile(spec, 28, 5)
            assert abs(prof.values.mean()) < 1e-9
            assert abs(prof.values.std() - 1.0) < 1e-9

    def test_plateau_profile_asymmetric_with_dip_at_zero(self):
        prof = planted_flow_profile(
            ArchetypeSpec("sudden_onset_plateau", 0, 40), 28, 5
        ).values
        # self-similar windows near the event, and the pre-event side
        # crosses the onset edge more often than the post-event side
        assert np.argmin(prof) == 28
        assert prof[:20].mean() > prof[40:].mean()

    def test_symmetric_dip_profile_is_palindromic(self):
        prof = planted_flow_profile(ArchetypeSpec("symmetric_dip", 9, 9), 28, 5).values
        np.testing.assert_allclose(prof, prof[::-1], atol=1e-9)


class TestStandardBenchmark:
    def test_label_histogram(self, benchmark):
        _, _, labels = benchmark
        counts = np.bincount(labels)[1:]
        np.testing.assert_array_equal(counts, [15, 15, 15, 15])

    def test_shapes_and_coverage(self, benchmark):
        corpora, events, _ = benchmark
        assert len(corpora) == 9
        assert len(events) == 60
        for m in corpora:
            assert m.n_topics == 24

    def test_seed_changes_rows_not_labels(self, benchmark):
        corpora0, events0, labels0 = benchmark
        corpora1, events1, labels1 = standard_benchmark(seed=99)
        np.testing.assert_array_equal(labels0, labels1)
        assert [e.name for e in events0] == [e.name for e in events1]
        assert not np.array_equal(corpora0[0].rows, corpora1[0].rows)

    def test_flows_correlate_with_planted_profiles(self, benchmark):
        corpora, events, labels = benchmark
        params = BENCHMARK_FLOW_PARAMS
        profiles = {
            g + 1: planted_flow_profile(
                spec, params.flow_half_width, params.jump.half_width
            ).values
            for g, spec in enumerate(BENCHMARK_SHAPES)
        }
        planted = {e.name: int(l) for e, l in zip(events, labels)}
        table = batch_event_flows(corpora[:3], events[:20], params)
        rs = [
            np.corrcoef(f.values, profiles[planted[f.event.name]])[0, 1]
            for f in table.flows
        ]
        assert np.median(rs) >= 0.5
