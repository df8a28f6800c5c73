"""Domain types for two-expert forecast comparison: play paths, forecasting
strategies, and the probability measures a strategy pair induces over binary
outcome sequences.

Outcomes are the integers 0 and 1.  A forecast is the probability assigned to
outcome 1; the probability of outcome 0 is implicitly its complement.  A play
path interleaves realized outcomes with the forecasts both experts announced
before each outcome was revealed.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence, Union

import numpy as np

__all__ = [
    "MeasureZeroHistoryError",
    "HistoryEntry",
    "PlayPath",
    "ForecastingStrategy",
    "StrategySession",
    "IIDStrategy",
    "DiracStrategy",
    "TimeVaryingStrategy",
    "FirstStepStrategy",
    "MixtureStrategy",
    "PrefixForcedStrategy",
    "ExpertMeasure",
    "ExternalNature",
    "Nature",
    "SCHEDULES",
    "iid_strategy",
    "dirac_strategy",
    "time_varying_strategy",
    "first_step_strategy",
    "mixture_strategy",
    "prefix_forced_strategy",
    "claim1_pair",
    "extend_play_path",
    "induced_prefix_probability",
    "sample_path",
    "average_realization",
    "outcome_probability",
    "trial_rng",
]


class MeasureZeroHistoryError(ValueError):
    """Raised when a mixture is asked to forecast after a history all of its
    components assign probability zero; the conditional is undefined there and
    no arbitrary continuation is invented."""


def _check_outcome(outcome: int) -> int:
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    return int(outcome)


def _check_probability(p: float, what: str = "probability") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"{what} must lie in [0, 1], got {p!r}")
    return p


def outcome_probability(p1: float, outcome: int) -> float:
    """Probability a forecast assigns to a realized outcome (p1 to 1, 1-p1 to 0)."""
    return p1 if outcome == 1 else 1.0 - p1


@dataclass(frozen=True, slots=True)
class HistoryEntry:
    """One period of play: both announced forecasts and the realized outcome.

    The forecasts are exactly those announced before the outcome was drawn.
    """

    outcome: int
    forecast0: float
    forecast1: float


class PlayPath:
    """Immutable finite record of outcomes interleaved with both experts'
    forecasts.

    ``prefix(n)`` keeps the first ``n`` entries, ``suffix(n)`` drops them;
    ``prefix(0)`` is the empty path.
    """

    __slots__ = ("_entries", "_outcomes")

    def __init__(self, entries: Iterable[HistoryEntry] = ()):
        entries = tuple(entries)
        for e in entries:
            _check_outcome(e.outcome)
            _check_probability(e.forecast0, "forecast0")
            _check_probability(e.forecast1, "forecast1")
        object.__setattr__(self, "_entries", entries)
        object.__setattr__(self, "_outcomes", tuple(e.outcome for e in entries))

    @property
    def entries(self) -> tuple[HistoryEntry, ...]:
        return self._entries

    @property
    def outcomes(self) -> tuple[int, ...]:
        return self._outcomes

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[HistoryEntry]:
        return iter(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlayPath):
            return NotImplemented
        return self._entries == other._entries

    def __repr__(self) -> str:
        return f"PlayPath(len={len(self)}, outcomes={''.join(map(str, self._outcomes))})"

    def prefix(self, n: int) -> "PlayPath":
        if not 0 <= n <= len(self):
            raise ValueError(f"prefix length {n} outside [0, {len(self)}]")
        return PlayPath(self._entries[:n])

    def suffix(self, n: int) -> "PlayPath":
        if not 0 <= n <= len(self):
            raise ValueError(f"suffix start {n} outside [0, {len(self)}]")
        return PlayPath(self._entries[n:])

    def iter_triples(self) -> Iterator[tuple[int, float, float]]:
        for e in self._entries:
            yield e.outcome, e.forecast0, e.forecast1


class _PathAccumulator:
    """Append-only history used inside sampling loops; mirrors the read side
    of :class:`PlayPath` without per-step copying."""

    __slots__ = ("outcomes", "_f0", "_f1")

    def __init__(self):
        self.outcomes: list[int] = []
        self._f0: list[float] = []
        self._f1: list[float] = []

    def __len__(self) -> int:
        return len(self.outcomes)

    def append(self, outcome: int, forecast0: float, forecast1: float) -> None:
        self.outcomes.append(outcome)
        self._f0.append(forecast0)
        self._f1.append(forecast1)

    def iter_triples(self) -> Iterator[tuple[int, float, float]]:
        return zip(self.outcomes, self._f0, self._f1)

    def to_play_path(self) -> PlayPath:
        return PlayPath(
            HistoryEntry(w, a, b) for w, a, b in self.iter_triples()
        )


History = Union[PlayPath, _PathAccumulator]


class StrategySession(ABC):
    """Streaming evaluator for one strategy along one evolving play path.

    ``forecast()`` returns the probability of outcome 1 for the next period
    given everything advanced so far; ``advance()`` feeds one realized entry.
    Sessions exist so that per-step work stays O(1) for every shipped
    strategy; the pure ``ForecastingStrategy.forecast`` replays a fresh
    session, which guarantees that streaming and from-scratch evaluation
    agree exactly.
    """

    __slots__ = ()

    @abstractmethod
    def forecast(self) -> float: ...

    @abstractmethod
    def advance(self, outcome: int, forecast0: float, forecast1: float) -> None: ...


class ForecastingStrategy(ABC):
    """Maps any finite history (outcomes plus both experts' past forecasts)
    to a probability for the next outcome being 1.

    Deterministic: equal histories yield equal forecasts.  The full history
    is provided even though every shipped strategy ignores the rival's past
    forecasts; the interface must not preclude that dependence.
    """

    __slots__ = ()

    @abstractmethod
    def session(self) -> StrategySession: ...

    def forecast(self, history: History) -> float:
        s = self.session()
        advance = s.advance
        for w, a, b in history.iter_triples():
            advance(w, a, b)
        return s.forecast()

    def spec_str(self) -> str:
        """Constructor expression understood by the scenario-file parser."""
        raise NotImplementedError


class _IIDSession(StrategySession):
    __slots__ = ("p",)

    def __init__(self, p: float):
        self.p = p

    def forecast(self) -> float:
        return self.p

    def advance(self, outcome, forecast0, forecast1) -> None:
        pass


@dataclass(frozen=True, slots=True)
class IIDStrategy(ForecastingStrategy):
    """Constant forecast, ignoring all history."""

    p: float

    def session(self) -> StrategySession:
        return _IIDSession(self.p)

    def spec_str(self) -> str:
        return f"iid({self.p!r})"


class _DiracSession(StrategySession):
    __slots__ = ("prefix", "tail", "t")

    def __init__(self, prefix: tuple[int, ...], tail: int):
        self.prefix = prefix
        self.tail = tail
        self.t = 0

    def forecast(self) -> float:
        t = self.t
        sym = self.prefix[t] if t < len(self.prefix) else self.tail
        return 1.0 if sym == 1 else 0.0

    def advance(self, outcome, forecast0, forecast1) -> None:
        self.t += 1


@dataclass(frozen=True, slots=True)
class DiracStrategy(ForecastingStrategy):
    """Deterministically predicts one fixed outcome sequence, given as a
    finite prefix followed by an eventually constant symbol.

    The forecast depends only on the time index, never on what actually
    happened, so off the target sequence it keeps predicting the target.
    """

    prefix: tuple[int, ...]
    tail: int

    def session(self) -> StrategySession:
        return _DiracSession(self.prefix, self.tail)

    def target_symbol(self, t: int) -> int:
        """Symbol the target sequence takes at 0-based period index ``t``."""
        return self.prefix[t] if t < len(self.prefix) else self.tail

    def spec_str(self) -> str:
        return "dirac(" + "".join(map(str, self.prefix)) + f"{self.tail}*)"


class _TimeVaryingSession(StrategySession):
    __slots__ = ("schedule", "t")

    def __init__(self, schedule: Callable[[int], float]):
        self.schedule = schedule
        self.t = 0

    def forecast(self) -> float:
        p = self.schedule(self.t + 1)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"schedule returned {p!r} outside [0, 1]")
        return p

    def advance(self, outcome, forecast0, forecast1) -> None:
        self.t += 1


@dataclass(frozen=True, slots=True)
class TimeVaryingStrategy(ForecastingStrategy):
    """History-independent forecast given by a schedule over 1-based periods."""

    schedule: Callable[[int], float]
    name: str = ""

    def session(self) -> StrategySession:
        return _TimeVaryingSession(self.schedule)

    def spec_str(self) -> str:
        return f"timevarying({self.name or '<custom>'})"


class _FirstStepSession(StrategySession):
    __slots__ = ("first", "rest", "t")

    def __init__(self, first: float, rest: StrategySession):
        self.first = first
        self.rest = rest
        self.t = 0

    def forecast(self) -> float:
        return self.first if self.t == 0 else self.rest.forecast()

    def advance(self, outcome, forecast0, forecast1) -> None:
        self.t += 1
        self.rest.advance(outcome, forecast0, forecast1)


@dataclass(frozen=True, slots=True)
class FirstStepStrategy(ForecastingStrategy):
    """Announces a fixed probability in period one, then defers to another
    strategy evaluated on the actual history."""

    first: float
    rest: ForecastingStrategy

    def session(self) -> StrategySession:
        return _FirstStepSession(self.first, self.rest.session())

    def spec_str(self) -> str:
        return f"firststep({self.first!r}, {self.rest.spec_str()})"


class _MixtureSession(StrategySession):
    """Posterior-weighted average of component forecasts.

    Weights are kept in linear space and renormalized every step; a component
    that assigns probability zero to a realized outcome drops to exact weight
    zero.  If every component dies the conditional forecast is undefined and
    :class:`MeasureZeroHistoryError` is raised rather than continuing.
    """

    __slots__ = ("weights", "_forecasts", "_advances", "_k", "_pending")

    def __init__(self, weights: list[float], components: list[StrategySession]):
        self.weights = weights
        self._forecasts = [c.forecast for c in components]
        self._advances = [c.advance for c in components]
        self._k = len(weights)
        self._pending: list[float] | None = None

    def forecast(self) -> float:
        ps = [f() for f in self._forecasts]
        self._pending = ps
        ws = self.weights
        total = 0.0
        for k in range(self._k):
            total += ws[k] * ps[k]
        return total

    def advance(self, outcome, forecast0, forecast1) -> None:
        ps = self._pending
        if ps is None:
            ps = [f() for f in self._forecasts]
        self._pending = None
        ws = self.weights
        total = 0.0
        if outcome == 1:
            for k in range(self._k):
                v = ws[k] * ps[k]
                ws[k] = v
                total += v
        else:
            for k in range(self._k):
                v = ws[k] * (1.0 - ps[k])
                ws[k] = v
                total += v
        if total <= 0.0:
            raise MeasureZeroHistoryError(
                "every mixture component assigns probability 0 to the realized history"
            )
        for k in range(self._k):
            ws[k] /= total
        for adv in self._advances:
            adv(outcome, forecast0, forecast1)


class _TwoMixtureSession(StrategySession):
    """Two-component specialization of :class:`_MixtureSession` with the
    same arithmetic in the same order, minus the per-step list traffic."""

    __slots__ = ("w0", "w1", "_fa", "_fb", "_aa", "_ab", "_p0", "_p1", "_fresh")

    def __init__(self, w0: float, w1: float, a: StrategySession, b: StrategySession):
        self.w0 = w0
        self.w1 = w1
        self._fa = a.forecast
        self._fb = b.forecast
        self._aa = a.advance
        self._ab = b.advance
        self._p0 = 0.0
        self._p1 = 0.0
        self._fresh = False

    def forecast(self) -> float:
        p0 = self._fa()
        p1 = self._fb()
        self._p0 = p0
        self._p1 = p1
        self._fresh = True
        total = 0.0
        total += self.w0 * p0
        total += self.w1 * p1
        return total

    def advance(self, outcome, forecast0, forecast1) -> None:
        if self._fresh:
            p0, p1 = self._p0, self._p1
            self._fresh = False
        else:
            p0, p1 = self._fa(), self._fb()
        if outcome == 1:
            u0 = self.w0 * p0
            u1 = self.w1 * p1
        else:
            u0 = self.w0 * (1.0 - p0)
            u1 = self.w1 * (1.0 - p1)
        total = 0.0
        total += u0
        total += u1
        if total <= 0.0:
            raise MeasureZeroHistoryError(
                "every mixture component assigns probability 0 to the realized history"
            )
        self.w0 = u0 / total
        self.w1 = u1 / total
        self._aa(outcome, forecast0, forecast1)
        self._ab(outcome, forecast0, forecast1)


@dataclass(frozen=True, slots=True)
class MixtureStrategy(ForecastingStrategy):
    """Convex combination of strategies, updated by Bayes rule on outcomes.

    Each component's forecast must depend on the outcome history only (all
    shipped strategies qualify); the mixture forecast is then the posterior
    mean of the component forecasts.
    """

    components: tuple[tuple[float, ForecastingStrategy], ...]

    def session(self) -> StrategySession:
        if len(self.components) == 2:
            (w0, s0), (w1, s1) = self.components
            return _TwoMixtureSession(w0, w1, s0.session(), s1.session())
        return _MixtureSession(
            [w for w, _ in self.components],
            [s.session() for _, s in self.components],
        )

    def spec_str(self) -> str:
        inner = ", ".join(f"{w!r}: {s.spec_str()}" for w, s in self.components)
        return f"mixture({inner})"


class _PrefixForcedSession(StrategySession):
    __slots__ = ("forced", "cutover", "base", "t", "on_forced")

    def __init__(self, forced: tuple[int, ...], cutover: int, base: StrategySession):
        self.forced = forced
        self.cutover = cutover
        self.base = base
        self.t = 0
        self.on_forced = True

    def forecast(self) -> float:
        t = self.t
        if t + 1 < self.cutover:
            sym = self.forced[t]
            if self.on_forced:
                return 1.0 if sym == 1 else 0.0
            return 0.0 if sym == 1 else 1.0
        return self.base.forecast()

    def advance(self, outcome, forecast0, forecast1) -> None:
        t = self.t
        if t + 1 < self.cutover and outcome != self.forced[t]:
            self.on_forced = False
        self.t = t + 1
        self.base.advance(outcome, forecast0, forecast1)


@dataclass(frozen=True, slots=True)
class PrefixForcedStrategy(ForecastingStrategy):
    """Surgery on a base strategy that pins its behavior before period ``n``.

    While the realized outcomes still match ``forced``, the next forced
    symbol gets probability 1; once the history has left the forced sequence
    the forced symbol gets probability 0.  From period ``n`` on the base
    strategy takes over, evaluated on the actual history.
    """

    base: ForecastingStrategy
    forced: tuple[int, ...]
    n: int

    def session(self) -> StrategySession:
        return _PrefixForcedSession(self.forced, self.n, self.base.session())

    def spec_str(self) -> str:
        bits = "".join(map(str, self.forced))
        return f"prefixforce({self.base.spec_str()}, {bits}, {self.n})"


# --- named schedules available to scenario files -------------------------

def _approach_one(t: int) -> float:
    return 1.0 - 1.0 / (t + 2)


SCHEDULES: dict[str, Callable[[int], float]] = {
    "approach_one": _approach_one,
}


# --- constructors ---------------------------------------------------------

def iid_strategy(p: float) -> IIDStrategy:
    """Strategy that forecasts ``p`` after every history."""
    return IIDStrategy(_check_probability(p))


def dirac_strategy(prefix: Sequence[int], tail: int) -> DiracStrategy:
    """Strategy certain of one outcome sequence (finite prefix, constant tail)."""
    return DiracStrategy(tuple(_check_outcome(w) for w in prefix), _check_outcome(tail))


def time_varying_strategy(
    schedule: Union[Callable[[int], float], str], name: str = ""
) -> TimeVaryingStrategy:
    """Strategy whose forecast in period t is ``schedule(t)``, t = 1, 2, ...

    ``schedule`` may be a registry name from :data:`SCHEDULES` or a callable.
    """
    if isinstance(schedule, str):
        if schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {schedule!r}; known: {sorted(SCHEDULES)}")
        return TimeVaryingStrategy(SCHEDULES[schedule], schedule)
    return TimeVaryingStrategy(schedule, name)


def first_step_strategy(first: float, rest: ForecastingStrategy) -> FirstStepStrategy:
    return FirstStepStrategy(_check_probability(first), rest)


def mixture_strategy(
    components: Iterable[tuple[float, ForecastingStrategy]]
) -> MixtureStrategy:
    comps = tuple((float(w), s) for w, s in components)
    if not comps:
        raise ValueError("mixture needs at least one component")
    for w, _ in comps:
        if w <= 0.0:
            raise ValueError(f"mixture weights must be positive, got {w}")
    total = math.fsum(w for w, _ in comps)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"mixture weights must sum to 1, got {total}")
    comps = tuple((w / total, s) for w, s in comps)
    return MixtureStrategy(comps)


def prefix_forced_strategy(
    f: ForecastingStrategy, forced: Sequence[int], n: int
) -> PrefixForcedStrategy:
    """Force probability-1 forecasts along ``forced`` before period ``n``.

    ``forced`` must supply at least ``n - 1`` symbols.
    """
    forced = tuple(_check_outcome(w) for w in forced)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if len(forced) < n - 1:
        raise ValueError(f"forced sequence has {len(forced)} symbols, need {n - 1}")
    return PrefixForcedStrategy(f, forced, n)


def claim1_pair(epsilon: float) -> tuple[ForecastingStrategy, ForecastingStrategy]:
    """The rival pair where expert 1 is certain of the all-ones sequence and
    expert 0 shades only the first forecast to 1 - epsilon, then agrees."""
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    f0 = FirstStepStrategy(1.0 - epsilon, IIDStrategy(1.0))
    f1 = DiracStrategy((), 1)
    return f0, f1


# --- nature ---------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ExpertMeasure:
    """Outcomes drawn from expert ``index``'s one-step conditionals."""

    index: int

    def __post_init__(self):
        if self.index not in (0, 1):
            raise ValueError(f"expert index must be 0 or 1, got {self.index}")

    def spec_str(self) -> str:
        return f"expert{self.index}"


@dataclass(frozen=True, slots=True)
class ExternalNature:
    """Outcomes drawn from a third strategy's one-step conditionals."""

    strategy: ForecastingStrategy

    def spec_str(self) -> str:
        return f"external({self.strategy.spec_str()})"


Nature = Union[ExpertMeasure, ExternalNature]


# --- play-path operations --------------------------------------------------

def extend_play_path(
    h: PlayPath,
    f0: ForecastingStrategy,
    f1: ForecastingStrategy,
    outcome: int,
) -> PlayPath:
    """Append one period: both strategies forecast on ``h``, then ``outcome``
    is recorded.  ``h`` itself is unchanged."""
    _check_outcome(outcome)
    entry = HistoryEntry(outcome, f0.forecast(h), f1.forecast(h))
    return PlayPath(h.entries + (entry,))


def induced_prefix_probability(
    f0: ForecastingStrategy,
    f1: ForecastingStrategy,
    i: int,
    outcomes: Sequence[int],
) -> float:
    """Probability expert ``i``'s induced measure gives the outcome prefix.

    The product of expert i's one-step forecast probabilities along the play
    path jointly induced with the rival.  Accumulated in log space; a factor
    of exactly zero short-circuits to an exact 0.0.  The empty prefix has
    probability 1.
    """
    if i not in (0, 1):
        raise ValueError(f"expert index must be 0 or 1, got {i}")
    s0, s1 = f0.session(), f1.session()
    log_p = 0.0
    for w in outcomes:
        _check_outcome(w)
        p0, p1 = s0.forecast(), s1.forecast()
        factor = outcome_probability(p0 if i == 0 else p1, w)
        if factor == 0.0:
            return 0.0
        log_p += math.log(factor)
        s0.advance(w, p0, p1)
        s1.advance(w, p0, p1)
    return math.exp(log_p)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Counter-based per-trial generator: streams are independent and do not
    depend on scheduling or worker count."""
    if not 0 <= master_seed < 2**64:
        raise ValueError("master_seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=[master_seed, trial_index]))


def generate_outcomes(
    f0: ForecastingStrategy,
    f1: ForecastingStrategy,
    nature: Nature,
    horizon: int,
    rng: np.random.Generator,
    sink=None,
) -> list[int]:
    """Draw one play path of length ``horizon``; the realized outcomes are
    returned and each step is optionally pushed to ``sink(t, w, p0, p1)``.

    Each outcome is Bernoulli with the probability the nature source's
    strategy announces on the current history.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    s0, s1 = f0.session(), f1.session()
    if isinstance(nature, ExpertMeasure):
        which = nature.index
        sx = None
    else:
        which = -1
        sx = nature.strategy.session()
    u = rng.random(horizon)
    outcomes: list[int] = []
    append = outcomes.append
    for t in range(horizon):
        p0 = s0.forecast()
        p1 = s1.forecast()
        if which == 0:
            pn = p0
        elif which == 1:
            pn = p1
        else:
            pn = sx.forecast()
        w = 1 if u[t] < pn else 0
        append(w)
        if sink is not None:
            sink(t, w, p0, p1)
        s0.advance(w, p0, p1)
        s1.advance(w, p0, p1)
        if sx is not None:
            sx.advance(w, p0, p1)
    return outcomes


def replay_path(
    f0: ForecastingStrategy,
    f1: ForecastingStrategy,
    outcomes: Sequence[int],
) -> PlayPath:
    """Play path a strategy pair induces on a given outcome sequence."""
    acc = _PathAccumulator()
    s0, s1 = f0.session(), f1.session()
    for w in outcomes:
        p0, p1 = s0.forecast(), s1.forecast()
        acc.append(_check_outcome(w), p0, p1)
        s0.advance(w, p0, p1)
        s1.advance(w, p0, p1)
    return acc.to_play_path()


def sample_path(
    f0: ForecastingStrategy,
    f1: ForecastingStrategy,
    nature: Nature,
    horizon: int,
    seed: int,
) -> PlayPath:
    """Simulate one play path of length ``horizon``; equal seeds give
    bitwise-identical paths."""
    acc = _PathAccumulator()
    generate_outcomes(
        f0, f1, nature, horizon, trial_rng(seed, 0),
        sink=lambda t, w, p0, p1: acc.append(w, p0, p1),
    )
    return acc.to_play_path()


def average_realization(outcomes: Sequence[int]) -> float:
    """Fraction of ones in a nonempty outcome sequence."""
    if len(outcomes) == 0:
        raise ValueError("average_realization of an empty sequence is undefined")
    return sum(1 for w in outcomes if w == 1) / len(outcomes)
