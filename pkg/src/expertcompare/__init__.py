"""Compare two probabilistic forecasters on binary outcome sequences.

Strategy pairs induce probability measures over outcome paths; comparison
tests turn a realized play path into a three-valued verdict; the harness
estimates verdict distributions by seeded Monte Carlo and checks the
structural properties a test may carry (anonymity, error-freeness,
reasonableness, tail invariance, exact identification).
"""

from .comparison import (
    ComparisonTest,
    CrossCalibrationTest,
    DerivativeTest,
    IdealIIDTest,
    LikelihoodRatioTest,
    PathPin,
    PinnedPathTest,
    day_one_anchored_test,
    ideal_iid_verdict,
)
from .core import (
    DiracStrategy,
    ExpertMeasure,
    ExternalNature,
    FirstStepStrategy,
    ForecastingStrategy,
    HistoryEntry,
    IIDStrategy,
    MeasureZeroHistoryError,
    MixtureStrategy,
    PlayPath,
    PrefixForcedStrategy,
    TimeVaryingStrategy,
    average_realization,
    claim1_pair,
    dirac_strategy,
    extend_play_path,
    first_step_strategy,
    iid_strategy,
    induced_prefix_probability,
    mixture_strategy,
    prefix_forced_strategy,
    replay_path,
    sample_path,
    time_varying_strategy,
)
from .crosscal import (
    CrossCalibParams,
    CrossCalibState,
    cross_calibration_pass,
    cross_comparison_verdict,
    interval_index,
    update_cross_calibration,
)
from .harness import (
    AllOnesTail,
    PrefixCylinder,
    RunReport,
    Scenario,
    anonymity_suite,
    check_anonymity,
    check_equivalence,
    check_error_free,
    check_ideal_iid,
    check_inconclusive_under_absolute_continuity,
    check_reasonable,
    check_tail,
    estimate_verdict_distribution,
    wilson_interval,
)
from .likelihood import (
    LikelihoodState,
    Verdict,
    VerdictParams,
    derivative_verdict,
    likelihood_ratio_verdict,
    update_likelihood,
)

__version__ = "0.1.0"
