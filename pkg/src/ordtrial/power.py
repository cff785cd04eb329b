"""Monte Carlo and resampling power estimation over endpoint test batteries.

A study runs a list of MethodSpec entries against many simulated (or
subsampled) trials and reports per-method rejection rates with Monte Carlo
standard errors.  Replicates draw their random streams from
(master_seed, replicate_index), so results are identical for any worker
count and any execution order; per-replicate test failures are tallied as
degenerate non-rejections, never aborts.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from . import core, inference
from .core import TrialDataset
from .errors import DegenerateInputError, InvalidArgumentError, UndefinedValueError
from .simgen import POScenarioParams, ScenarioParams, gen_trial_eq1, gen_trial_po

FIXED_DAY_METHODS = frozenset({"prop_odds", "t_test"})
IMPROVEMENT_METHODS = frozenset({"log_rank_improvement", "cox_improvement"})
ALL_METHODS = frozenset({
    "prop_odds",
    "t_test",
    "wilcoxon_mean_score",
    "two_proportion_mortality",
    "fisher_mortality",
    "log_rank_recovery",
    "log_rank_improvement",
    "cox_recovery",
    "cox_improvement",
    "cox_death",
})


@dataclass(frozen=True)
class MethodSpec:
    """One analysis method plus the day / improvement-size it needs."""

    method: str
    day: int | None = None
    k_points: int | None = None
    alpha: float = 0.05
    # the published power tables used the R-default corrected proportion
    # test; set False for the uncorrected pooled z
    continuity_correction: bool = True

    def __post_init__(self):
        if self.method not in ALL_METHODS:
            raise InvalidArgumentError(f"unknown method '{self.method}'")
        if self.method in FIXED_DAY_METHODS and self.day is None:
            raise InvalidArgumentError(f"{self.method} requires a day")
        if self.method in IMPROVEMENT_METHODS and self.k_points is None:
            raise InvalidArgumentError(f"{self.method} requires k_points")
        if self.day is not None and self.day < 1:
            raise InvalidArgumentError("day must be >= 1")
        if self.k_points is not None and self.k_points < 1:
            raise InvalidArgumentError("k_points must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidArgumentError("alpha must be in (0, 1)")

    @property
    def label(self) -> str:
        name = self.method
        if self.k_points is not None:
            name += f"({self.k_points})"
        if self.day is not None:
            name += f"@d{self.day}"
        return name


@dataclass(frozen=True)
class PowerRow:
    spec: MethodSpec
    rejection_rate: float
    mc_se: float
    n_sims: int
    n_degenerate: int


@dataclass(frozen=True)
class PowerTable:
    rows: tuple[PowerRow, ...]

    def rate(self, label: str) -> float:
        for row in self.rows:
            if row.spec.label == label:
                return row.rejection_rate
        raise KeyError(label)

    def __iter__(self):
        return iter(self.rows)


class _EndpointCache:
    """Derive each endpoint at most once per dataset across the battery."""

    def __init__(self, dataset: TrialDataset):
        self.ds = dataset
        self._cache: dict = {}

    def survival(self, kind: str, k_points: int | None = None):
        key = (kind, k_points)
        if key not in self._cache:
            if kind == "recovery":
                times, events = core.recovery_observations(self.ds)
            elif kind == "improvement":
                times, events = core.improvement_observations(self.ds, k_points)
            elif kind == "death":
                times, events = core.death_observations(self.ds)
            else:  # pragma: no cover
                raise InvalidArgumentError(kind)
            m1 = self.ds.arms == core.TREATMENT
            self._cache[key] = (
                (times[~m1], events[~m1]),
                (times[m1], events[m1]),
            )
        return self._cache[key]

    def day_scores(self, day: int):
        key = ("day", day)
        if key not in self._cache:
            vals, arms = core.scores_at_day(self.ds, day)
            self._cache[key] = (vals[arms == 0], vals[arms == 1])
        return self._cache[key]

    def mean_scores(self, through_day: int | None):
        key = ("mean", through_day)
        if key not in self._cache:
            vals, arms = core.mean_scores(self.ds, through_day)
            self._cache[key] = (vals[arms == 0], vals[arms == 1])
        return self._cache[key]

    def mortality(self, day: int):
        key = ("mort", day)
        if key not in self._cache:
            self._cache[key] = core.mortality_by_day(self.ds, day)
        return self._cache[key]


def apply_method(dataset: TrialDataset, spec: MethodSpec,
                 cache: _EndpointCache | None = None) -> inference.TestResult:
    """Run one method on a dataset and tag the result with its day."""
    cache = cache or _EndpointCache(dataset)
    m = spec.method
    day = spec.day
    if m == "prop_odds":
        ctrl, trt = cache.day_scores(day)
        res = inference.fit_proportional_odds(ctrl, trt, spec.alpha)
    elif m == "t_test":
        ctrl, trt = cache.day_scores(day)
        if ctrl.size < 2 or trt.size < 2:
            raise DegenerateInputError("t test needs >= 2 per arm")
        # control minus treatment so positive differences favor treatment
        res = inference.t_test(ctrl, trt, spec.alpha)
    elif m == "wilcoxon_mean_score":
        ctrl, trt = cache.mean_scores(day)
        if ctrl.size == 0 or trt.size == 0:
            raise DegenerateInputError("empty arm after complete-case filtering")
        res = inference.wilcoxon_rank_sum(ctrl, trt, spec.alpha)
    elif m == "two_proportion_mortality":
        table = cache.mortality(day or dataset.horizon_days)
        res = inference.two_proportion_test(
            int(table[1, 0]), int(table[1].sum()), int(table[0, 0]), int(table[0].sum()),
            spec.alpha, continuity_correction=spec.continuity_correction,
        )
    elif m == "fisher_mortality":
        table = cache.mortality(day or dataset.horizon_days)
        res = inference.fisher_exact(
            int(table[1, 0]), int(table[1, 1]), int(table[0, 0]), int(table[0, 1]), spec.alpha
        )
    elif m in ("log_rank_recovery", "cox_recovery"):
        obs0, obs1 = cache.survival("recovery")
        fn = inference.log_rank if m.startswith("log_rank") else inference.cox_fit
        res = fn(obs0, obs1, spec.alpha)
    elif m in ("log_rank_improvement", "cox_improvement"):
        obs0, obs1 = cache.survival("improvement", spec.k_points)
        fn = inference.log_rank if m.startswith("log_rank") else inference.cox_fit
        res = fn(obs0, obs1, spec.alpha)
    elif m == "cox_death":
        obs0, obs1 = cache.survival("death")
        res = inference.cox_fit(obs0, obs1, spec.alpha)
    else:  # pragma: no cover
        raise InvalidArgumentError(m)
    return res.with_day(day)


def analyze_methods(dataset: TrialDataset, methods: list[MethodSpec]):
    """(TestResult | None, degenerate flag) per method, sharing derivations."""
    cache = _EndpointCache(dataset)
    out = []
    for spec in methods:
        try:
            res = apply_method(dataset, spec, cache)
        except (DegenerateInputError, UndefinedValueError):
            out.append((None, True))
            continue
        degenerate = (not res.converged) or (not np.isfinite(res.p_value))
        out.append((res, degenerate))
    return out


def _replicate_rng(master_seed: int, rep: int) -> np.random.Generator:
    """Counter-style stream for one replicate: (master_seed, replicate)."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(rep,))
    return np.random.Generator(np.random.Philox(ss))


def generate_trial(scenario, rep_rng: np.random.Generator) -> TrialDataset:
    if isinstance(scenario, POScenarioParams):
        return gen_trial_po(scenario, rep_rng)
    if isinstance(scenario, ScenarioParams):
        return gen_trial_eq1(scenario, rep_rng)
    raise InvalidArgumentError(f"unknown scenario type {type(scenario)!r}")


def _power_chunk(scenario, methods, master_seed, rep_lo, rep_hi):
    nm = len(methods)
    rejections = np.zeros(nm, dtype=np.int64)
    degenerate = np.zeros(nm, dtype=np.int64)
    for rep in range(rep_lo, rep_hi):
        ds = generate_trial(scenario, _replicate_rng(master_seed, rep))
        for j, (res, degen) in enumerate(analyze_methods(ds, methods)):
            if degen:
                degenerate[j] += 1
            elif res.p_value < methods[j].alpha:
                rejections[j] += 1
    return rejections, degenerate


def _resample_chunk(dataset, n_per_arm, methods, master_seed, rep_lo, rep_hi):
    nm = len(methods)
    rejections = np.zeros(nm, dtype=np.int64)
    degenerate = np.zeros(nm, dtype=np.int64)
    idx_ctrl = np.nonzero(dataset.arms == core.CONTROL)[0]
    idx_trt = np.nonzero(dataset.arms == core.TREATMENT)[0]
    for rep in range(rep_lo, rep_hi):
        rng = _replicate_rng(master_seed, rep)
        pick0 = rng.choice(idx_ctrl, size=n_per_arm, replace=False)
        pick1 = rng.choice(idx_trt, size=n_per_arm, replace=False)
        sub = dataset.subset(np.concatenate([pick0, pick1]))
        for j, (res, degen) in enumerate(analyze_methods(sub, methods)):
            if degen:
                degenerate[j] += 1
            elif res.p_value < methods[j].alpha:
                rejections[j] += 1
    return rejections, degenerate


def _run_chunked(worker_fn, static_args, methods, n_reps: int, n_workers: int) -> PowerTable:
    if n_workers <= 1:
        rej, deg = worker_fn(*static_args, 0, n_reps)
    else:
        bounds = np.linspace(0, n_reps, 4 * n_workers + 1).astype(int)
        jobs = [
            (*static_args, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(n_workers) as pool:
            parts = pool.starmap(worker_fn, jobs)
        rej = sum(p[0] for p in parts)
        deg = sum(p[1] for p in parts)
    rows = []
    for j, spec in enumerate(methods):
        rate = rej[j] / n_reps
        rows.append(PowerRow(
            spec=spec,
            rejection_rate=float(rate),
            mc_se=float(np.sqrt(rate * (1.0 - rate) / n_reps)),
            n_sims=n_reps,
            n_degenerate=int(deg[j]),
        ))
    return PowerTable(rows=tuple(rows))


def run_power_study(scenario, methods: list[MethodSpec], n_sims: int,
                    master_seed: int, n_workers: int = 1) -> PowerTable:
    """Monte Carlo rejection rates for each method over simulated trials."""
    if n_sims < 1:
        raise InvalidArgumentError("n_sims must be >= 1")
    methods = list(methods)
    return _run_chunked(_power_chunk, (scenario, methods, master_seed), methods,
                        n_sims, n_workers)


def resample_power(dataset: TrialDataset, n_per_arm: int, n_reps: int,
                   methods: list[MethodSpec], master_seed: int,
                   n_workers: int = 1) -> PowerTable:
    """Rejection rates over per-arm subsamples drawn without replacement."""
    n0, n1 = dataset.n_per_arm()
    if n_per_arm < 1 or n_per_arm > min(n0, n1):
        raise InvalidArgumentError(
            f"n_per_arm must be in [1, {min(n0, n1)}] for this dataset"
        )
    if n_reps < 1:
        raise InvalidArgumentError("n_reps must be >= 1")
    methods = list(methods)
    return _run_chunked(_resample_chunk, (dataset, n_per_arm, methods, master_seed),
                        methods, n_reps, n_workers)


def augment_dataset(dataset: TrialDataset, factor: int) -> TrialDataset:
    """Duplicate every subject `factor` times with fresh identifiers."""
    if factor < 2:
        raise InvalidArgumentError("factor must be >= 2")
    scores = np.repeat(dataset.scores, factor, axis=0)
    arms = np.repeat(dataset.arms, factor)
    ids = [f"{sid}#{j}" for sid in dataset.subject_ids for j in range(factor)]
    return TrialDataset.from_arrays(scores, arms, ids, categories=dataset.categories,
                                    recovery_threshold=dataset.recovery_threshold)


def information_snapshot(dataset: TrialDataset, cutoff_calendar_day: int,
                         enrollment_days, endpoint: str = "recovery",
                         k_points: int | None = None) -> dict[str, int]:
    """Enrollment / follow-up / event counts at an interim calendar cutoff.

    Each subject's follow-up is truncated at (cutoff - entry) study days;
    an event counts as observed when it happened within that window.
    Supports the staggered-entry information argument for interim looks.
    """
    entry = np.asarray(enrollment_days, dtype=np.int64)
    if entry.size != len(dataset):
        raise InvalidArgumentError("need one enrollment day per subject")
    if np.any(entry < 0):
        raise InvalidArgumentError("enrollment days must be >= 0")
    followup = np.maximum(cutoff_calendar_day - entry, 0)
    enrolled = followup >= 1
    if endpoint == "recovery":
        times, events = core.recovery_observations(dataset)
    elif endpoint == "improvement":
        times, events = core.improvement_observations(dataset, k_points or 2)
    elif endpoint == "death":
        times, events = core.death_observations(dataset)
    else:
        raise InvalidArgumentError(f"unknown endpoint '{endpoint}'")
    observed_events = enrolled & events & (times <= followup)
    return {
        "n_enrolled": int(enrolled.sum()),
        "n_with_full_followup": int((followup >= dataset.horizon_days).sum()),
        "n_events_observed": int(observed_events.sum()),
    }
