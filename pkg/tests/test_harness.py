"""Monte Carlo harness: reproducibility, conservation, events, checkers."""

import math

import pytest

from expertcompare import (
    AllOnesTail,
    CrossCalibParams,
    CrossCalibrationTest,
    DerivativeTest,
    ExpertMeasure,
    ExternalNature,
    IdealIIDTest,
    LikelihoodRatioTest,
    PrefixCylinder,
    Scenario,
    VerdictParams,
    Verdict,
    check_anonymity,
    check_equivalence,
    check_error_free,
    check_ideal_iid,
    check_inconclusive_under_absolute_continuity,
    check_reasonable,
    check_tail,
    claim1_pair,
    dirac_strategy,
    estimate_verdict_distribution,
    iid_strategy,
    mixture_strategy,
    sample_path,
    time_varying_strategy,
    wilson_interval,
)
from expertcompare.comparison import day_one_anchored_test
from expertcompare.harness import anonymity_suite, random_strategy

LN100 = math.log(100.0)


def small_scenario(trials=300, horizon=50, seed=424242, tests=None, events=()):
    f0, f1 = claim1_pair(0.1)
    params = VerdictParams(horizon=horizon, lam=LN100, burn_in=10)
    return Scenario(
        f0=f0,
        f1=f1,
        nature=ExpertMeasure(0),
        horizon=horizon,
        trials=trials,
        master_seed=seed,
        tests=tests or (LikelihoodRatioTest(params), DerivativeTest(params)),
        events=tuple(events),
        label="small",
    )


class TestWilsonInterval:
    def test_degenerate_cases(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0 and 0.0 < hi < 0.05
        lo, hi = wilson_interval(100, 100)
        assert 0.95 < lo < 1.0 and hi == 1.0

    def test_known_value(self):
        # 8/10 at 95%: the score interval is about [0.490, 0.943]
        lo, hi = wilson_interval(8, 10)
        assert lo == pytest.approx(0.4902, abs=2e-3)
        assert hi == pytest.approx(0.9433, abs=2e-3)

    def test_contains_point_estimate(self):
        for k, n in ((1, 7), (5, 9), (250, 1000)):
            lo, hi = wilson_interval(k, n)
            assert lo <= k / n <= hi


class TestRunner:
    def test_reproducible(self):
        a = estimate_verdict_distribution(small_scenario())
        b = estimate_verdict_distribution(small_scenario())
        assert [t.counts for t in a.tests] == [t.counts for t in b.tests]

    def test_worker_count_does_not_change_counts(self):
        a = estimate_verdict_distribution(small_scenario(), workers=1)
        b = estimate_verdict_distribution(small_scenario(), workers=3)
        assert [t.counts for t in a.tests] == [t.counts for t in b.tests]

    def test_counts_sum_to_trials(self):
        rep = estimate_verdict_distribution(small_scenario(events=[AllOnesTail()]))
        for tr in rep.tests:
            assert sum(tr.counts.values()) == rep.trials

    def test_seed_changes_counts(self):
        a = estimate_verdict_distribution(small_scenario(seed=1))
        b = estimate_verdict_distribution(small_scenario(seed=2))
        assert a.tests[0].counts != b.tests[0].counts

    def test_event_tracking_and_conditionals(self):
        rep = estimate_verdict_distribution(
            small_scenario(events=[AllOnesTail(), PrefixCylinder((1,))])
        )
        ones = rep.events["all_ones"]
        pre = rep.events["prefix:1"]
        # under this nature a path through (1) continues all ones surely
        assert ones["hits"] == pre["hits"]
        cond = rep.test("likelihood_ratio").conditional["all_ones"]
        assert cond["frequencies"]["expert1"] == 1.0

    def test_unobserved_event_noted(self):
        rep = estimate_verdict_distribution(
            small_scenario(trials=30, events=[PrefixCylinder((0, 0))])
        )
        # the rebuilt pair forecasts 1 from day two, so (0,0) never occurs
        block = rep.test("derivative").conditional["prefix:00"]
        assert block["note"] == "event unobserved"

    def test_trial_records_collected(self):
        rep = estimate_verdict_distribution(
            small_scenario(trials=40, events=[AllOnesTail()]), collect_trials=True
        )
        assert len(rep.trial_records) == 40
        rec = rep.trial_records[0]
        assert set(rec) >= {"trial", "seed_key", "verdicts", "anomalous", "events",
                            "log_ratio", "numerator_zero", "denominator_zero"}

    def test_trajectory_and_profiles_recorded(self):
        f0, f1 = claim1_pair(0.1)
        params = VerdictParams(horizon=30, lam=LN100, burn_in=5)
        scenario = Scenario(
            f0=f0, f1=f1, nature=ExpertMeasure(1), horizon=30, trials=5,
            master_seed=9, tests=(DerivativeTest(params),
                                  CrossCalibrationTest(5, CrossCalibParams(min_count=5, slack=0.0))),
        )
        rep = estimate_verdict_distribution(scenario, record_trajectory=True)
        assert len(rep.trajectory) == 30
        assert rep.trajectory[0]["t"] == 1
        assert rep.trajectory[0]["log_ratio"] == pytest.approx(math.log(1 / 0.9))
        assert rep.crosscal_profiles is not None

    def test_report_serializes(self):
        import json

        rep = estimate_verdict_distribution(small_scenario(trials=20, events=[AllOnesTail()]))
        payload = json.dumps(rep.to_dict())
        assert "likelihood_ratio" in payload

    def test_anomalous_binned_separately(self):
        # external nature off both supports: both experts zero out on day one
        f0 = dirac_strategy((1,), 1)
        f1 = dirac_strategy((1,), 0)
        params = VerdictParams(horizon=5, lam=LN100, burn_in=1)
        scenario = Scenario(
            f0=f0, f1=f1, nature=ExternalNature(iid_strategy(0.0)),
            horizon=5, trials=10, master_seed=1, tests=(DerivativeTest(params),),
        )
        rep = estimate_verdict_distribution(scenario)
        tr = rep.test("derivative")
        assert tr.counts["anomalous"] == 10
        assert tr.counts["inconclusive"] == 0
        assert rep.anomaly_total == 10

    def test_validation(self):
        f0, f1 = claim1_pair(0.1)
        params = VerdictParams(horizon=10, lam=LN100, burn_in=1)
        with pytest.raises(ValueError):
            Scenario(f0=f0, f1=f1, nature=ExpertMeasure(0), horizon=10, trials=0,
                     master_seed=1, tests=(DerivativeTest(params),))
        with pytest.raises(ValueError):
            Scenario(f0=f0, f1=f1, nature=ExpertMeasure(0), horizon=10, trials=5,
                     master_seed=1, tests=())
        with pytest.raises(ValueError):
            Scenario(f0=f0, f1=f1, nature=ExpertMeasure(0), horizon=3, trials=5,
                     master_seed=1, tests=(DerivativeTest(VerdictParams(horizon=3, burn_in=1)),),
                     events=(PrefixCylinder((1, 1, 1, 1)),))


class TestVilleBound:
    def test_threshold_crossing_frequency_bounded(self):
        # under expert 0's own measure, the ratio process is a nonnegative
        # martingale started at 1, so crossing exp(lam) at any time before
        # the horizon has probability at most exp(-lam)
        f0, f1 = iid_strategy(0.5), iid_strategy(0.55)
        params = VerdictParams(horizon=800, lam=LN100, burn_in=400)
        scenario = Scenario(
            f0=f0, f1=f1, nature=ExpertMeasure(0), horizon=800, trials=2000,
            master_seed=31337, tests=(DerivativeTest(params),),
        )
        rep = estimate_verdict_distribution(scenario, collect_trials=True)
        crossings = sum(
            1
            for rec in rep.trial_records
            if rec["denominator_zero"] or rec["log_ratio_max"] >= LN100
        )
        bound = math.exp(-LN100)
        assert crossings / rep.trials <= bound + 3 * math.sqrt(bound / rep.trials)

    def test_denominator_zero_never_under_own_measure(self):
        # strictly positive forecasts keep the ratio finite almost surely
        rep = estimate_verdict_distribution(small_scenario(trials=500), collect_trials=True)
        assert not any(rec["denominator_zero"] for rec in rep.trial_records)


class TestIdenticalStrategies:
    def test_every_test_inconclusive_on_equal_pair(self):
        f = iid_strategy(0.5)
        params = VerdictParams(horizon=60, lam=LN100, burn_in=10)
        scenario = Scenario(
            f0=f, f1=f, nature=ExpertMeasure(0), horizon=60, trials=200,
            master_seed=64, tests=(
                DerivativeTest(params),
                LikelihoodRatioTest(params),
                CrossCalibrationTest(5, CrossCalibParams(min_count=5, slack=0.0)),
                IdealIIDTest(tol=0.05),
            ),
        )
        rep = estimate_verdict_distribution(scenario)
        for tr in rep.tests:
            assert tr.counts["inconclusive"] == 200, tr.name


class TestCheckErrorFree:
    def test_claim1_contrast(self):
        rep = check_error_free(small_scenario(trials=2000))
        assert rep.wrong_verdict == "expert1"
        assert rep.per_test["likelihood_ratio"]["wrong_frequency"] == pytest.approx(0.9, abs=0.03)
        assert rep.per_test["derivative"]["wrong_frequency"] == 0.0
        bound = rep.per_test["derivative"]["bound_plus_3se"]
        assert rep.per_test["derivative"]["wrong_frequency"] <= bound

    def test_cross_calibration_error_free_on_certain_pair(self):
        scenario = Scenario(
            f0=dirac_strategy((0,), 1), f1=dirac_strategy((), 1),
            nature=ExpertMeasure(0), horizon=100, trials=50, master_seed=2,
            tests=(CrossCalibrationTest(5, CrossCalibParams(min_count=10, slack=0.0)),),
        )
        rep = check_error_free(scenario)
        assert rep.per_test["crosscal"]["wrong_frequency"] == 0.0

    def test_requires_expert_nature(self):
        sc = small_scenario()
        bad = Scenario(
            f0=sc.f0, f1=sc.f1, nature=ExternalNature(iid_strategy(0.5)),
            horizon=sc.horizon, trials=10, master_seed=1, tests=sc.tests,
        )
        with pytest.raises(ValueError):
            check_error_free(bad)


class TestCheckReasonable:
    def test_deterministic_prefix_event(self):
        rep = check_reasonable(
            [DerivativeTest(VerdictParams(horizon=60, lam=LN100, burn_in=10))],
            dirac_strategy((0,), 1),
            dirac_strategy((), 1),
            PrefixCylinder((0,)),
            i=0,
            horizon=60,
            trials=100,
            master_seed=5,
        )
        assert rep.event_frequency == 1.0
        assert rep.per_test["derivative"]["conditional"]["expert0"] == 1.0
        assert not rep.unobserved

    def test_unobserved_event_reported(self):
        rep = check_reasonable(
            [DerivativeTest(VerdictParams(horizon=20, lam=LN100, burn_in=5))],
            dirac_strategy((), 1),
            iid_strategy(0.5),
            PrefixCylinder((0,)),
            i=0,
            horizon=20,
            trials=50,
            master_seed=6,
        )
        assert rep.unobserved
        assert rep.event_hits == 0


class TestCheckAnonymity:
    def test_shipped_tests_on_sampled_paths(self):
        f0 = mixture_strategy([(0.5, dirac_strategy((), 1)), (0.5, iid_strategy(0.5))])
        f1 = time_varying_strategy("approach_one")
        path = sample_path(f0, f1, ExpertMeasure(0), 40, seed=21)
        params = VerdictParams(horizon=40, lam=LN100, burn_in=10)
        for test in (
            DerivativeTest(params),
            LikelihoodRatioTest(params),
            CrossCalibrationTest(5, CrossCalibParams(min_count=5, slack=0.0)),
            IdealIIDTest(tol=0.05),
        ):
            assert check_anonymity(test, f0, f1, path)

    def test_identical_strategies_self_complementary(self):
        f = iid_strategy(0.5)
        path = sample_path(f, f, ExpertMeasure(0), 30, seed=2)
        test = DerivativeTest(VerdictParams(horizon=30, lam=LN100, burn_in=5))
        assert test.evaluate(path) is Verdict.INCONCLUSIVE
        assert check_anonymity(test, f, f, path)

    def test_randomized_sweep_small(self):
        assert anonymity_suite(60, master_seed=11, horizon=20) == 0


class TestCheckTail:
    def test_identity_surgery_never_disagrees(self):
        test = DerivativeTest(VerdictParams(horizon=40, lam=LN100, burn_in=10))
        rep = check_tail(
            test, iid_strategy(0.3), iid_strategy(0.7), (), 40, 60, 31
        )
        assert rep.disagreements == 0
        assert rep.cutover == 1

    def test_separated_constants_agree_exactly(self):
        test = DerivativeTest(VerdictParams(horizon=300, lam=LN100, burn_in=150))
        rep = check_tail(
            test, iid_strategy(0.3), iid_strategy(0.7), (1, 1, 1), 300, 80, 77
        )
        assert rep.disagreements == 0

    def test_zero_probability_prefix_rejected(self):
        test = DerivativeTest(VerdictParams(horizon=20, lam=LN100, burn_in=5))
        with pytest.raises(ValueError):
            check_tail(test, dirac_strategy((0,), 1), dirac_strategy((), 1), (1,), 20, 10, 3)

    def test_day_one_anchored_test_is_not_tail(self):
        pinned = day_one_anchored_test(
            DerivativeTest(VerdictParams(horizon=30, lam=LN100, burn_in=10))
        )
        from expertcompare import first_step_strategy

        f0 = first_step_strategy(0.5, iid_strategy(1.0))
        f1 = iid_strategy(1.0)
        rep = check_tail(pinned, f0, f1, (1,), 30, 20, 9, nature_expert=1)
        assert rep.disagreements >= 1


class TestCheckIdealIID:
    def test_separated_pair_identified(self):
        tests = [
            DerivativeTest(VerdictParams(horizon=600, lam=LN100, burn_in=300)),
            IdealIIDTest(tol=0.05),
        ]
        rep = check_ideal_iid(tests, 0.3, 0.7, horizon=600, trials=200, master_seed=4)
        for key in ("expert0", "expert1"):
            for name in ("derivative", "ideal_iid"):
                assert rep.per_nature[key][name]["correct_frequency"] >= 0.99

    def test_equal_parameters_rejected(self):
        with pytest.raises(ValueError):
            check_ideal_iid([IdealIIDTest()], 0.5, 0.5, 10, 5, 1)


class TestCheckEquivalence:
    def test_reflexive(self):
        params = VerdictParams(horizon=50, lam=LN100, burn_in=10)
        rep = check_equivalence(
            DerivativeTest(params), DerivativeTest(params),
            iid_strategy(0.3), iid_strategy(0.7),
            (ExpertMeasure(0), ExpertMeasure(1)), 50, 100, 8,
        )
        assert all(v["disagreements"] == 0 for v in rep.per_nature.values())

    def test_claim1_pair_separates_the_tests(self):
        f0, f1 = claim1_pair(0.1)
        params = VerdictParams(horizon=80, lam=LN100, burn_in=10)
        rep = check_equivalence(
            DerivativeTest(params), LikelihoodRatioTest(params),
            f0, f1, (ExpertMeasure(0),), 80, 2000, 13,
        )
        freq = rep.per_nature["expert0"]["frequency"]
        assert freq == pytest.approx(0.9, abs=0.03)


class TestAbsoluteContinuityScenario:
    def test_small_run_splits_mass(self):
        rep = check_inconclusive_under_absolute_continuity(
            horizon=600, trials=400, master_seed=17, burn_in=300
        )
        tr = rep.tests[0]
        assert tr.frequency("expert1") == 0.0
        assert tr.frequency("expert0") == pytest.approx(0.5, abs=0.08)
        assert tr.frequency("inconclusive") == pytest.approx(0.5, abs=0.08)


class TestRandomStrategy:
    def test_generates_valid_strategies(self):
        import numpy as np

        rng = np.random.default_rng(0)
        for _ in range(30):
            f = random_strategy(rng)
            path = sample_path(f, iid_strategy(0.5), ExpertMeasure(1), 15, seed=1)
            p = f.forecast(path.prefix(7))
            assert 0.0 <= p <= 1.0
