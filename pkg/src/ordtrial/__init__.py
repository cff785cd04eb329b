"""Power analysis toolkit for ordinal-scale clinical trial endpoints."""

from .core import (
    SurvivalObservation,
    Trajectory,
    TrialDataset,
    mean_score,
    mortality_by_day,
    score_at_day,
    time_to_death,
    time_to_improvement,
    time_to_recovery,
)
from .errors import (
    ConfigError,
    DatasetFormatError,
    DegenerateInputError,
    InvalidArgumentError,
    OrdtrialError,
    UndefinedValueError,
)
from .inference import (
    TestResult,
    cox_fit,
    fisher_exact,
    fit_proportional_odds,
    log_rank,
    schoenfeld_sample_size,
    t_test,
    two_proportion_test,
    wilcoxon_rank_sum,
)

__version__ = "0.1.0"
