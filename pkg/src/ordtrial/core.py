"""Domain types for ordinal-scale trials and the endpoint-derivation rules.

Scores live on a 1..K ordinal scale with 1 = recovered (best) and K = death
(worst); both ends are absorbing in simulated data.  Endpoint rules turn a
per-subject trajectory of daily scores into the analyzable outcomes: fixed-day
score, mean score over a window, time to recovery / improvement / death, and
day-specific mortality counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, UndefinedValueError

DEFAULT_CATEGORIES = 7
DEFAULT_HORIZON_DAYS = 28

CONTROL = 0
TREATMENT = 1


@dataclass(frozen=True)
class SurvivalObservation:
    """A (time, event) pair; event=False means censored at `time`."""

    time: int
    event: bool


@dataclass(frozen=True)
class Trajectory:
    """One subject's daily ordinal scores.

    `days` must be strictly increasing positive integers; gaps are allowed
    for ingested data (simulation produces complete day grids).  Scores are
    plain ints in [1, categories].  Absorbing-state violations (a score
    changing after 1 or K was reached) are legal here because real data may
    relapse; the loader warns about them instead.
    """

    subject_id: str
    arm: int
    days: tuple[int, ...]
    scores: tuple[int, ...]
    categories: int = DEFAULT_CATEGORIES

    def __post_init__(self):
        if self.categories < 2:
            raise InvalidArgumentError("need at least 2 ordinal categories")
        if self.arm not in (CONTROL, TREATMENT):
            raise InvalidArgumentError(f"arm must be 0 or 1, got {self.arm}")
        if len(self.days) == 0 or len(self.days) != len(self.scores):
            raise InvalidArgumentError("days and scores must be equal-length and non-empty")
        prev = 0
        for d, s in zip(self.days, self.scores):
            if d <= prev:
                raise InvalidArgumentError("days must be strictly increasing positive integers")
            if not 1 <= s <= self.categories:
                raise InvalidArgumentError(
                    f"score {s} outside [1, {self.categories}] for subject {self.subject_id}"
                )
            prev = d

    @property
    def last_observed_day(self) -> int:
        return self.days[-1]

    def score_map(self) -> dict[int, int]:
        return dict(zip(self.days, self.scores))

    def violates_absorbing(self) -> bool:
        """True if a score changes after an absorbing state (1 or K) was hit."""
        absorbed = None
        for s in self.scores:
            if absorbed is not None and s != absorbed:
                return True
            if absorbed is None and s in (1, self.categories):
                absorbed = s
        return False


class TrialDataset:
    """A two-arm collection of trajectories sharing one scale and horizon.

    Internally the scores are kept in an (n_subjects, horizon_days) int16
    matrix with 0 marking missing days, which is what the power engine
    operates on; the per-subject `Trajectory` objects remain available
    through `trajectories`.
    """

    def __init__(
        self,
        trajectories: list[Trajectory],
        horizon_days: int = DEFAULT_HORIZON_DAYS,
        categories: int = DEFAULT_CATEGORIES,
        recovery_threshold: int = 1,
    ):
        if horizon_days < 1:
            raise InvalidArgumentError("horizon_days must be >= 1")
        if not 1 <= recovery_threshold <= categories - 1:
            raise InvalidArgumentError("recovery_threshold must be in [1, categories-1]")
        if not trajectories:
            raise InvalidArgumentError("dataset needs at least one trajectory")
        for t in trajectories:
            if t.categories != categories:
                raise InvalidArgumentError("all trajectories must share the same scale")
            if t.last_observed_day > horizon_days:
                raise InvalidArgumentError(
                    f"subject {t.subject_id} observed past the {horizon_days}-day horizon"
                )
        self.trajectories = list(trajectories)
        self.horizon_days = horizon_days
        self.categories = categories
        self.recovery_threshold = recovery_threshold

        n = len(trajectories)
        self.scores = np.zeros((n, horizon_days), dtype=np.int16)
        self.arms = np.zeros(n, dtype=np.int8)
        self.subject_ids = [t.subject_id for t in trajectories]
        for i, t in enumerate(trajectories):
            self.arms[i] = t.arm
            self.scores[i, np.asarray(t.days) - 1] = t.scores
        if not (np.any(self.arms == CONTROL) and np.any(self.arms == TREATMENT)):
            raise InvalidArgumentError("both arms must be non-empty")

    @classmethod
    def from_arrays(
        cls,
        scores: np.ndarray,
        arms: np.ndarray,
        subject_ids: list[str] | None = None,
        categories: int = DEFAULT_CATEGORIES,
        recovery_threshold: int = 1,
    ) -> "TrialDataset":
        """Build a dataset directly from a (n, horizon) score matrix (0 = missing)."""
        scores = np.asarray(scores, dtype=np.int16)
        arms = np.asarray(arms, dtype=np.int8)
        n, horizon = scores.shape
        if subject_ids is None:
            subject_ids = [f"s{i:05d}" for i in range(n)]
        obj = cls.__new__(cls)
        obj.horizon_days = horizon
        obj.categories = categories
        obj.recovery_threshold = recovery_threshold
        obj.scores = scores
        obj.arms = arms
        obj.subject_ids = list(subject_ids)
        obj.trajectories = None  # built lazily
        if not (np.any(arms == CONTROL) and np.any(arms == TREATMENT)):
            raise InvalidArgumentError("both arms must be non-empty")
        if scores.max(initial=0) > categories or np.any((scores < 0)):
            raise InvalidArgumentError("scores outside [1, categories] in matrix")
        if np.any((scores > 0).sum(axis=1) == 0):
            raise InvalidArgumentError("every subject needs at least one observed day")
        return obj

    def __len__(self) -> int:
        return self.scores.shape[0]

    def n_per_arm(self) -> tuple[int, int]:
        return int(np.sum(self.arms == CONTROL)), int(np.sum(self.arms == TREATMENT))

    def build_trajectories(self) -> list[Trajectory]:
        """Materialize Trajectory objects (cached) for datasets built from arrays."""
        if self.trajectories is None:
            days = np.arange(1, self.horizon_days + 1)
            out = []
            for i in range(len(self)):
                mask = self.scores[i] > 0
                out.append(
                    Trajectory(
                        subject_id=self.subject_ids[i],
                        arm=int(self.arms[i]),
                        days=tuple(int(d) for d in days[mask]),
                        scores=tuple(int(s) for s in self.scores[i][mask]),
                        categories=self.categories,
                    )
                )
            self.trajectories = out
        return self.trajectories

    def subset(self, indices: np.ndarray) -> "TrialDataset":
        """Row subset (used by the resampling engine); shares no mutable state."""
        return TrialDataset.from_arrays(
            self.scores[indices],
            self.arms[indices],
            [self.subject_ids[i] for i in np.asarray(indices)],
            categories=self.categories,
            recovery_threshold=self.recovery_threshold,
        )


# ---------------------------------------------------------------------------
# per-trajectory endpoint rules
# ---------------------------------------------------------------------------

def score_at_day(traj: Trajectory, day: int) -> int | None:
    """Recorded score at `day`, or None when that day was not observed.

    Fixed-day analyses are complete-case: no imputation or carry-forward.
    """
    if not 1 <= day:
        raise InvalidArgumentError(f"day must be a positive integer, got {day}")
    for d, s in zip(traj.days, traj.scores):
        if d == day:
            return s
        if d > day:
            break
    return None


def mean_score(traj: Trajectory, through_day: int) -> float:
    """Arithmetic mean of the observed daily scores over days 1..through_day."""
    if through_day < 1:
        raise InvalidArgumentError("through_day must be >= 1")
    vals = [s for d, s in zip(traj.days, traj.scores) if d <= through_day]
    if not vals:
        raise UndefinedValueError(
            f"subject {traj.subject_id} has no observations through day {through_day}"
        )
    return float(sum(vals)) / len(vals)


def time_to_recovery(traj: Trajectory, threshold: int) -> SurvivalObservation:
    """First observed day at or below `threshold`, else censoring.

    Deaths are censored at the subject's last observation day, never at the
    death day: a death can never become a recovery, so the subject must stay
    "at risk but not recovered" through the end of follow-up.  Subjects alive
    and unrecovered at the end of follow-up are censored the same way.
    """
    if not 1 <= threshold <= traj.categories - 1:
        raise InvalidArgumentError("threshold must be in [1, categories-1]")
    for d, s in zip(traj.days, traj.scores):
        if s <= threshold:
            return SurvivalObservation(time=d, event=True)
    return SurvivalObservation(time=traj.last_observed_day, event=False)


def time_to_improvement(traj: Trajectory, k_points: int) -> SurvivalObservation:
    """First observed day improved by >= k_points from the baseline score.

    Baseline is the earliest observed score (day 1 for complete data).
    Reaching score 1 always qualifies, even when baseline - k_points < 1.
    Deaths and non-improvers are censored at the last observation day,
    exactly as for recovery.
    """
    if k_points < 1:
        raise InvalidArgumentError("k_points must be >= 1")
    baseline = traj.scores[0]
    level = max(baseline - k_points, 1)
    for d, s in zip(traj.days, traj.scores):
        if s <= level:
            return SurvivalObservation(time=d, event=True)
    return SurvivalObservation(time=traj.last_observed_day, event=False)


def time_to_death(traj: Trajectory) -> SurvivalObservation:
    """First observed day at the death category K; survivors are censored."""
    for d, s in zip(traj.days, traj.scores):
        if s == traj.categories:
            return SurvivalObservation(time=d, event=True)
    return SurvivalObservation(time=traj.last_observed_day, event=False)


def mortality_by_day(dataset: TrialDataset, day: int) -> np.ndarray:
    """2x2 count table, rows = arm (control, treatment), cols = (died, alive).

    A subject counts as dead iff their death event occurred at or before `day`.
    """
    if not 1 <= day <= dataset.horizon_days:
        raise InvalidArgumentError(f"day must be in [1, {dataset.horizon_days}]")
    times, events = death_observations(dataset)
    dead = events & (times <= day)
    table = np.zeros((2, 2), dtype=np.int64)
    for arm in (CONTROL, TREATMENT):
        m = dataset.arms == arm
        table[arm, 0] = int(np.sum(dead[m]))
        table[arm, 1] = int(np.sum(m) - table[arm, 0])
    return table


# ---------------------------------------------------------------------------
# vectorized dataset-level derivations (the power engine's fast path;
# cross-checked against the per-trajectory rules in the test suite)
# ---------------------------------------------------------------------------

def _first_day_at_or_below(scores: np.ndarray, level: np.ndarray | int) -> tuple[np.ndarray, np.ndarray]:
    """Per row: (first 1-based day with 1 <= score <= level, hit flag)."""
    level = np.broadcast_to(np.asarray(level), (scores.shape[0],))
    hit = (scores >= 1) & (scores <= level[:, None])
    any_hit = hit.any(axis=1)
    first = hit.argmax(axis=1) + 1
    return first, any_hit


def last_observed_days(dataset: TrialDataset) -> np.ndarray:
    observed = dataset.scores > 0
    return dataset.horizon_days - observed[:, ::-1].argmax(axis=1)


def recovery_observations(dataset: TrialDataset, threshold: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(times, events) arrays for the time-to-recovery endpoint."""
    thr = dataset.recovery_threshold if threshold is None else threshold
    if not 1 <= thr <= dataset.categories - 1:
        raise InvalidArgumentError("threshold must be in [1, categories-1]")
    first, hit = _first_day_at_or_below(dataset.scores, thr)
    last = last_observed_days(dataset)
    times = np.where(hit, first, last)
    return times.astype(np.int64), hit


def improvement_observations(dataset: TrialDataset, k_points: int) -> tuple[np.ndarray, np.ndarray]:
    """(times, events) arrays for the k-point-improvement endpoint."""
    if k_points < 1:
        raise InvalidArgumentError("k_points must be >= 1")
    observed = dataset.scores > 0
    first_obs_col = observed.argmax(axis=1)
    baseline = dataset.scores[np.arange(len(dataset)), first_obs_col]
    level = np.maximum(baseline - k_points, 1)
    first, hit = _first_day_at_or_below(dataset.scores, level)
    last = last_observed_days(dataset)
    times = np.where(hit, first, last)
    return times.astype(np.int64), hit


def death_observations(dataset: TrialDataset) -> tuple[np.ndarray, np.ndarray]:
    """(times, events) arrays for the time-to-death endpoint."""
    isdead = dataset.scores == dataset.categories
    hit = isdead.any(axis=1)
    first = isdead.argmax(axis=1) + 1
    last = last_observed_days(dataset)
    times = np.where(hit, first, last)
    return times.astype(np.int64), hit


def scores_at_day(dataset: TrialDataset, day: int) -> tuple[np.ndarray, np.ndarray]:
    """Complete-case (scores, arms) at a fixed day; missing subjects excluded."""
    if not 1 <= day <= dataset.horizon_days:
        raise InvalidArgumentError(f"day must be in [1, {dataset.horizon_days}]")
    col = dataset.scores[:, day - 1]
    mask = col > 0
    return col[mask].astype(np.int64), dataset.arms[mask].astype(np.int64)


def mean_scores(dataset: TrialDataset, through_day: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-subject mean observed score over days 1..through_day, with arms.

    Subjects with no observation in the window are excluded (complete-case).
    """
    d = dataset.horizon_days if through_day is None else through_day
    if not 1 <= d <= dataset.horizon_days:
        raise InvalidArgumentError(f"through_day must be in [1, {dataset.horizon_days}]")
    window = dataset.scores[:, :d]
    observed = window > 0
    counts = observed.sum(axis=1)
    mask = counts > 0
    sums = window.sum(axis=1, dtype=np.float64)
    means = sums[mask] / counts[mask]
    return means, dataset.arms[mask].astype(np.int64)
