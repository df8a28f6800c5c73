"""Declarative scenario files: flat ``key = value`` lines with dotted keys.

Lines starting with ``#`` (or anything after ``#``) are comments.  Strategy
values use small constructor expressions::

    iid(0.5)
    dirac(01*)                      # prefix 0, then ones forever
    timevarying(approach_one)
    firststep(0.9, iid(1.0))
    mixture(0.5: dirac(1*), 0.5: iid(0.5))
    prefixforce(iid(0.5), 111, 4)

Every key is validated before anything is sampled and unknown keys are
rejected with the offending line number.  ``--set key=value`` overrides
replace entries in the parsed mapping before validation, so a single preset
can be swept over epsilon, horizon, trials and so on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .comparison import (
    ComparisonTest,
    CrossCalibrationTest,
    DerivativeTest,
    IdealIIDTest,
    LikelihoodRatioTest,
)
from .core import (
    ExpertMeasure,
    ExternalNature,
    ForecastingStrategy,
    Nature,
    claim1_pair,
    dirac_strategy,
    first_step_strategy,
    iid_strategy,
    mixture_strategy,
    prefix_forced_strategy,
    time_varying_strategy,
)
from .crosscal import CrossCalibParams
from .harness import AllOnesTail, EventSpec, PrefixCylinder, Scenario
from .likelihood import VerdictParams

__all__ = [
    "ScenarioFileError",
    "parse_scenario_text",
    "apply_overrides",
    "parse_strategy",
    "build_from_mapping",
    "load_scenario_text",
    "DistributionSpec",
    "TailSpec",
    "EquivalenceSpec",
]


class ScenarioFileError(ValueError):
    """Malformed or invalid scenario file; message names key and line."""


@dataclass
class _Entry:
    value: str
    line: int


def parse_scenario_text(text: str, source: str = "<scenario>") -> dict[str, _Entry]:
    """Parse ``key = value`` lines into an ordered mapping with line numbers."""
    mapping: dict[str, _Entry] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioFileError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ScenarioFileError(f"{source}:{lineno}: empty key")
        if key in mapping:
            raise ScenarioFileError(f"{source}:{lineno}: duplicate key {key!r}")
        mapping[key] = _Entry(value, lineno)
    return mapping


def apply_overrides(
    mapping: dict[str, _Entry], overrides: Sequence[str], source: str = "<scenario>"
) -> dict[str, _Entry]:
    """Apply repeatable ``key=value`` overrides on top of a parsed mapping."""
    out = dict(mapping)
    for spec in overrides:
        if "=" not in spec:
            raise ScenarioFileError(f"{source}: override {spec!r} is not key=value")
        key, value = spec.split("=", 1)
        out[key.strip()] = _Entry(value.strip(), 0)
    return out


# --- strategy expressions ---------------------------------------------------

def _split_top(text: str, sep: str) -> list[str]:
    """Split on ``sep`` at paren depth zero."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced ')'")
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    if depth != 0:
        raise ValueError("unbalanced '('")
    parts.append(text[start:])
    return parts


def _parse_bits(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text or any(c not in "01" for c in text):
        raise ValueError(f"expected a string of 0/1 symbols, got {text!r}")
    return tuple(int(c) for c in text)


def parse_strategy(text: str) -> ForecastingStrategy:
    """Parse one strategy constructor expression."""
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise ValueError(f"expected strategy constructor like iid(0.5), got {text!r}")
    head, inner = text.split("(", 1)
    head = head.strip()
    inner = inner[:-1]
    if head == "iid":
        return iid_strategy(float(inner))
    if head == "dirac":
        target = inner.strip()
        if not target.endswith("*") or len(target) < 2:
            raise ValueError(f"dirac target must look like 01* or 1*, got {target!r}")
        bits = _parse_bits(target[:-1])
        return dirac_strategy(bits[:-1], bits[-1])
    if head == "timevarying":
        return time_varying_strategy(inner.strip())
    if head == "firststep":
        args = _split_top(inner, ",")
        if len(args) != 2:
            raise ValueError(f"firststep takes (probability, strategy), got {text!r}")
        return first_step_strategy(float(args[0]), parse_strategy(args[1]))
    if head == "mixture":
        comps = []
        for item in _split_top(inner, ","):
            if ":" not in item:
                raise ValueError(f"mixture component must be weight: strategy, got {item!r}")
            w, s = item.split(":", 1)
            comps.append((float(w), parse_strategy(s)))
        return mixture_strategy(comps)
    if head == "prefixforce":
        args = _split_top(inner, ",")
        if len(args) != 3:
            raise ValueError(f"prefixforce takes (strategy, bits, n), got {text!r}")
        return prefix_forced_strategy(
            parse_strategy(args[0]), _parse_bits(args[1]), int(args[2])
        )
    raise ValueError(f"unknown strategy constructor {head!r}")


def _parse_nature(text: str) -> Nature:
    text = text.strip()
    if text == "expert0":
        return ExpertMeasure(0)
    if text == "expert1":
        return ExpertMeasure(1)
    if text.startswith("external(") and text.endswith(")"):
        return ExternalNature(parse_strategy(text[len("external(") : -1]))
    raise ValueError(f"nature must be expert0, expert1 or external(...), got {text!r}")


def _parse_event(text: str) -> EventSpec:
    text = text.strip()
    if text == "all_ones":
        return AllOnesTail()
    if text.startswith("prefix:"):
        return PrefixCylinder(_parse_bits(text[len("prefix:") :]))
    raise ValueError(f"event must be all_ones or prefix:<bits>, got {text!r}")


# --- mapping -> runnable spec -------------------------------------------------

@dataclass
class DistributionSpec:
    """Validated distribution-mode scenario, ready to run."""

    name: str
    description: str
    scenario: Scenario


@dataclass
class TailSpec:
    """Validated prefix-surgery scenario."""

    name: str
    description: str
    test: ComparisonTest
    f0: ForecastingStrategy
    f1: ForecastingStrategy
    forced: tuple[int, ...]
    nature_expert: int
    horizon: int
    trials: int
    seed: int
    config: dict


@dataclass
class EquivalenceSpec:
    """Validated two-test disagreement scenario."""

    name: str
    description: str
    test_a: ComparisonTest
    test_b: ComparisonTest
    f0: ForecastingStrategy
    f1: ForecastingStrategy
    natures: tuple[Nature, ...]
    horizon: int
    trials: int
    seed: int
    config: dict


LoadedSpec = "DistributionSpec | TailSpec | EquivalenceSpec"


class _Reader:
    """Consumes keys from the parsed mapping with typed conversion; whatever
    is left over at the end is an unknown key."""

    def __init__(self, mapping: dict[str, _Entry], source: str):
        self.mapping = dict(mapping)
        self.source = source

    def _fail(self, key: str, entry: Optional[_Entry], message: str):
        where = f"{self.source}:{entry.line}" if entry and entry.line else self.source
        raise ScenarioFileError(f"{where}: key {key!r}: {message}")

    def take(self, key: str, conv, default=_Entry, required: bool = False):
        entry = self.mapping.pop(key, None)
        if entry is None:
            if required:
                raise ScenarioFileError(f"{self.source}: missing required key {key!r}")
            return None if default is _Entry else default
        try:
            return conv(entry.value)
        except (ValueError, TypeError) as exc:
            self._fail(key, entry, str(exc))

    def has(self, key: str) -> bool:
        return key in self.mapping

    def finish(self) -> None:
        if self.mapping:
            key, entry = next(iter(self.mapping.items()))
            self._fail(key, entry, "unknown key")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(f"must be a positive integer, got {value}")
    return value


def _seed_int(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise ValueError(f"must be an unsigned 64-bit integer, got {value}")
    return value


def _take_test(reader: _Reader, prefix: str, horizon: int) -> Optional[ComparisonTest]:
    kind = reader.take(f"{prefix}.kind", str)
    if kind is None:
        return None
    default_burn = min(10, horizon - 1)
    if kind in ("derivative", "likelihood_ratio"):
        lam = reader.take(f"{prefix}.lambda", float, default=math.log(100.0))
        burn_in = reader.take(f"{prefix}.burn_in", int, default=default_burn)
        params = VerdictParams(horizon=horizon, lam=lam, burn_in=burn_in)
        cls = DerivativeTest if kind == "derivative" else LikelihoodRatioTest
        return cls(params)
    if kind == "crosscal":
        n = reader.take(f"{prefix}.intervals", int, default=5)
        min_count = reader.take(f"{prefix}.min_count", int, default=25)
        slack = reader.take(f"{prefix}.slack", float, default=0.02)
        return CrossCalibrationTest(n, CrossCalibParams(min_count=min_count, slack=slack))
    if kind == "ideal_iid":
        tol = reader.take(f"{prefix}.tol", float, default=0.05)
        return IdealIIDTest(tol=tol)
    raise ScenarioFileError(
        f"{reader.source}: key '{prefix}.kind': unknown test kind {kind!r} "
        "(expected derivative, likelihood_ratio, crosscal or ideal_iid)"
    )


def _take_pair(
    reader: _Reader,
) -> tuple[ForecastingStrategy, ForecastingStrategy]:
    pair = reader.take("pair", str)
    if pair is not None:
        if pair != "claim1":
            raise ScenarioFileError(
                f"{reader.source}: key 'pair': unknown named pair {pair!r} (expected claim1)"
            )
        epsilon = reader.take("epsilon", float, required=True)
        return claim1_pair(epsilon)
    f0 = reader.take("f0", parse_strategy, required=True)
    f1 = reader.take("f1", parse_strategy, required=True)
    return f0, f1


def build_from_mapping(mapping: dict[str, _Entry], source: str = "<scenario>"):
    """Validate a parsed mapping and build the runnable spec for its mode."""
    config_echo = {key: entry.value for key, entry in mapping.items()}
    reader = _Reader(mapping, source)
    name = reader.take("name", str, default="")
    description = reader.take("description", str, default="")
    mode = reader.take("mode", str, default="distribution")
    if mode not in ("distribution", "tail", "equivalence"):
        raise ScenarioFileError(
            f"{source}: key 'mode': expected distribution, tail or equivalence, got {mode!r}"
        )
    horizon = reader.take("horizon", _positive_int, required=True)
    trials = reader.take("trials", _positive_int, required=True)
    seed = reader.take("seed", _seed_int, required=True)
    f0, f1 = _take_pair(reader)

    if mode == "distribution":
        nature = reader.take("nature", _parse_nature, required=True)
        event = reader.take("event", _parse_event)
        tests = []
        for prefix in ("test", "test2"):
            test = _take_test(reader, prefix, horizon)
            if test is not None:
                tests.append(test)
        if not tests:
            raise ScenarioFileError(f"{source}: missing required key 'test.kind'")
        reader.finish()
        scenario = Scenario(
            f0=f0,
            f1=f1,
            nature=nature,
            horizon=horizon,
            trials=trials,
            master_seed=seed,
            tests=tuple(tests),
            events=(event,) if event is not None else (),
            label=name,
            config=config_echo,
        )
        return DistributionSpec(name, description, scenario)

    if mode == "tail":
        forced = reader.take("forced", _parse_bits, required=True)
        nature_expert = reader.take("nature_expert", int, default=0)
        if nature_expert not in (0, 1):
            raise ScenarioFileError(
                f"{source}: key 'nature_expert': must be 0 or 1, got {nature_expert}"
            )
        test = _take_test(reader, "test", horizon)
        if test is None:
            raise ScenarioFileError(f"{source}: missing required key 'test.kind'")
        reader.finish()
        return TailSpec(
            name, description, test, f0, f1, forced, nature_expert,
            horizon, trials, seed, config_echo,
        )

    natures_text = reader.take("natures", str, required=True)
    natures = tuple(_parse_nature(part) for part in natures_text.split(","))
    test_a = _take_test(reader, "testA", horizon)
    test_b = _take_test(reader, "testB", horizon)
    if test_a is None or test_b is None:
        raise ScenarioFileError(
            f"{source}: equivalence mode needs both 'testA.kind' and 'testB.kind'"
        )
    reader.finish()
    return EquivalenceSpec(
        name, description, test_a, test_b, f0, f1, natures,
        horizon, trials, seed, config_echo,
    )


def load_scenario_text(text: str, source: str = "<scenario>", overrides: Sequence[str] = ()):
    """Parse, override and validate scenario text in one step."""
    mapping = parse_scenario_text(text, source)
    if overrides:
        mapping = apply_overrides(mapping, overrides, source)
    return build_from_mapping(mapping, source)
