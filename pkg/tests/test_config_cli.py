"""Scenario files, overrides, validation diagnostics, and the CLI."""

import json

import pytest

from expertcompare import estimate_verdict_distribution
from expertcompare.cli import main
from expertcompare.config import (
    EquivalenceSpec,
    ScenarioFileError,
    TailSpec,
    apply_overrides,
    build_from_mapping,
    load_scenario_text,
    parse_scenario_text,
    parse_strategy,
)
from expertcompare.presets import preset_description, preset_names, preset_text

MINIMAL = """
name = tiny
mode = distribution
f0 = iid(0.3)
f1 = iid(0.7)
nature = expert0
horizon = 20
trials = 50
seed = 99
test.kind = derivative
test.lambda = 4.605170185988092
test.burn_in = 5
"""


class TestStrategyExpressions:
    def test_round_trip_through_spec_str(self):
        examples = [
            "iid(0.5)",
            "dirac(1*)",
            "dirac(01*)",
            "timevarying(approach_one)",
            "firststep(0.9, iid(1.0))",
            "mixture(0.5: dirac(1*), 0.5: iid(0.5))",
            "prefixforce(iid(0.5), 111, 4)",
        ]
        for text in examples:
            strategy = parse_strategy(text)
            again = parse_strategy(strategy.spec_str())
            assert again.spec_str() == strategy.spec_str()

    def test_nested_mixture(self):
        s = parse_strategy("mixture(0.25: mixture(0.5: iid(0.1), 0.5: iid(0.9)), 0.75: iid(0.5))")
        assert 0.0 <= s.forecast(__import__("expertcompare").PlayPath()) <= 1.0

    def test_malformed_rejected(self):
        for bad in ("iid", "iid(2)", "dirac(2*)", "dirac(01)", "mixture(0.5 iid(0.5))",
                    "timevarying(nope)", "unknown(1)"):
            with pytest.raises(ValueError):
                parse_strategy(bad)


class TestParsing:
    def test_comments_and_blanks_ignored(self):
        mapping = parse_scenario_text("# header\n\na = 1  # trailing\n")
        assert mapping["a"].value == "1"
        assert mapping["a"].line == 3

    def test_duplicate_key_rejected(self):
        with pytest.raises(ScenarioFileError, match="duplicate"):
            parse_scenario_text("a = 1\na = 2\n", "f")

    def test_missing_equals_names_line(self):
        with pytest.raises(ScenarioFileError, match="f:2"):
            parse_scenario_text("a = 1\nnot a pair\n", "f")

    def test_unknown_key_names_key_and_line(self):
        text = MINIMAL + "mystery = 1\n"
        with pytest.raises(ScenarioFileError, match="mystery"):
            load_scenario_text(text, "conf")

    def test_bad_value_names_key(self):
        with pytest.raises(ScenarioFileError, match="'trials'"):
            load_scenario_text(MINIMAL.replace("trials = 50", "trials = 0"), "conf")

    def test_missing_required_key(self):
        with pytest.raises(ScenarioFileError, match="'seed'"):
            load_scenario_text(MINIMAL.replace("seed = 99", ""), "conf")

    def test_overrides_replace_values(self):
        mapping = parse_scenario_text(MINIMAL, "conf")
        mapping = apply_overrides(mapping, ["trials=75", "test.burn_in=3"], "conf")
        spec = build_from_mapping(mapping, "conf")
        assert spec.scenario.trials == 75
        assert spec.scenario.tests[0].params.burn_in == 3

    def test_event_and_second_test(self):
        text = MINIMAL + "event = all_ones\ntest2.kind = ideal_iid\ntest2.tol = 0.1\n"
        spec = load_scenario_text(text, "conf")
        assert len(spec.scenario.tests) == 2
        assert spec.scenario.events[0].label == "all_ones"

    def test_pair_claim1_requires_epsilon(self):
        text = MINIMAL.replace("f0 = iid(0.3)", "pair = claim1").replace("f1 = iid(0.7)", "")
        with pytest.raises(ScenarioFileError, match="epsilon"):
            load_scenario_text(text, "conf")

    def test_tail_mode(self):
        text = """
mode = tail
f0 = iid(0.3)
f1 = iid(0.7)
forced = 11
nature_expert = 0
horizon = 30
trials = 10
seed = 5
test.kind = derivative
test.burn_in = 10
"""
        spec = load_scenario_text(text, "conf")
        assert isinstance(spec, TailSpec)
        assert spec.forced == (1, 1)

    def test_equivalence_mode(self):
        text = """
mode = equivalence
pair = claim1
epsilon = 0.1
natures = expert0, expert1
horizon = 30
trials = 10
seed = 5
testA.kind = derivative
testA.burn_in = 5
testB.kind = likelihood_ratio
testB.burn_in = 5
"""
        spec = load_scenario_text(text, "conf")
        assert isinstance(spec, EquivalenceSpec)
        assert len(spec.natures) == 2


class TestPresets:
    def test_seven_presets_sorted(self):
        names = preset_names()
        assert names == sorted(names)
        assert names == [
            "claim1",
            "claim2",
            "equivalence-d-vs-l",
            "exampleB1",
            "ideal-iid",
            "prop1-absolute-continuity",
            "tail-surgery",
        ]

    def test_every_preset_parses_and_validates(self):
        for name in preset_names():
            spec = load_scenario_text(preset_text(name), f"preset:{name}")
            assert spec.name == name
            assert preset_description(name)

    def test_preset_determinism_via_embedded_seed(self):
        spec_a = load_scenario_text(preset_text("claim1"), "p", ["trials=100"])
        spec_b = load_scenario_text(preset_text("claim1"), "p", ["trials=100"])
        rep_a = estimate_verdict_distribution(spec_a.scenario)
        rep_b = estimate_verdict_distribution(spec_b.scenario)
        assert [t.counts for t in rep_a.tests] == [t.counts for t in rep_b.tests]


class TestRoundTrip:
    def test_report_config_reruns_to_identical_counts(self):
        spec = load_scenario_text(preset_text("claim1"), "p", ["trials=150"])
        report = estimate_verdict_distribution(spec.scenario)
        echoed = report.to_dict()["config"]
        text = "\n".join(f"{k} = {v}" for k, v in echoed.items())
        respec = load_scenario_text(text, "echoed")
        rerun = estimate_verdict_distribution(respec.scenario)
        assert [t.counts for t in rerun.tests] == [t.counts for t in report.tests]


class TestCLI:
    def test_run_writes_report(self, tmp_path, capsys):
        rc = main(["run", "claim1", "--set", "trials=60", "--workers", "1",
                   "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "likelihood_ratio" in out
        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload["trials"] == 60
        counts = payload["tests"][0]["counts"]
        assert sum(counts.values()) == 60

    def test_run_scenario_file_with_exports(self, tmp_path, capsys):
        scenario = tmp_path / "tiny.scenario"
        scenario.write_text(
            MINIMAL + "test2.kind = crosscal\ntest2.min_count = 5\ntest2.slack = 0.0\n"
        )
        rc = main([
            "run", str(scenario), "--out", str(tmp_path / "out"), "--workers", "1",
            "--trials-jsonl", "--trajectory", "--profiles",
        ])
        assert rc == 0
        assert (tmp_path / "out" / "report.json").is_file()
        lines = (tmp_path / "out" / "trials.jsonl").read_text().splitlines()
        assert len(lines) == 50
        assert json.loads(lines[0])["trial"] == 0
        traj = (tmp_path / "out" / "trajectory.csv").read_text().splitlines()
        assert traj[0] == "t,log_ratio,numerator_zero,denominator_zero"
        assert len(traj) == 21
        profs = (tmp_path / "out" / "crosscal_profiles.csv").read_text().splitlines()
        assert profs[0].startswith("l0,l1,nu")

    def test_validation_error_exits_nonzero(self, tmp_path, capsys):
        rc = main(["run", "claim1", "--set", "trials=0", "--out", str(tmp_path)])
        assert rc == 2
        assert "trials" in capsys.readouterr().err

    def test_unknown_scenario_reference(self, tmp_path, capsys):
        rc = main(["run", "no-such-thing", "--out", str(tmp_path)])
        assert rc == 2

    def test_unknown_key_diagnostic(self, tmp_path, capsys):
        rc = main(["run", "claim1", "--set", "bogus=1", "--out", str(tmp_path)])
        assert rc == 2
        assert "bogus" in capsys.readouterr().err

    def test_list_presets(self, capsys):
        rc = main(["list-presets"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "7 presets" in out
        assert out.index("claim1") < out.index("claim2") < out.index("tail-surgery")

    def test_tail_mode_cli(self, tmp_path, capsys):
        rc = main(["run", "tail-surgery", "--set", "trials=15", "--set", "horizon=120",
                   "--set", "test.burn_in=60", "--out", str(tmp_path)])
        assert rc == 0
        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload["tail"]["disagreements"] == 0

    def test_equivalence_mode_cli(self, tmp_path, capsys):
        rc = main(["run", "equivalence-d-vs-l", "--set", "trials=200", "--out", str(tmp_path)])
        assert rc == 0
        payload = json.loads((tmp_path / "report.json").read_text())
        assert "expert0" in payload["equivalence"]["per_nature"]

    def test_workers_flag_does_not_change_report(self, tmp_path):
        rc1 = main(["run", "claim1", "--set", "trials=80", "--workers", "1",
                    "--out", str(tmp_path / "a")])
        rc2 = main(["run", "claim1", "--set", "trials=80", "--workers", "3",
                    "--out", str(tmp_path / "b")])
        assert rc1 == rc2 == 0
        a = json.loads((tmp_path / "a" / "report.json").read_text())
        b = json.loads((tmp_path / "b" / "report.json").read_text())
        assert a["tests"] == b["tests"]
