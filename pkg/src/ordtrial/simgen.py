"""Trajectory generators for the two simulation models.

Model 1 draws a random "line of destiny" per subject: an intercept plus a
mixture slope (recovery-bound or death-bound) applied to log(day), floored to
the integer grid, clamped to [1, K], with 1 and K absorbing.  A lagged
variant delays every treatment-dependent term until after a lag day.

Model 2 generates both arms from one shared null law and then re-maps the
treatment arm's scores day by day through a cumulative-odds shift, so the two
arms satisfy a proportional odds relationship with a prescribed common odds
ratio at every day.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri

from .core import CONTROL, TREATMENT, TrialDataset, Trajectory
from .errors import ConfigError, InvalidArgumentError

LAG_MODES = ("corrected", "literal")


@dataclass(frozen=True)
class ScenarioParams:
    """Generative parameters for the random-line model.

    Defaults are the reference row of the published parameter table; the
    `baseline_offset` shifts every latent intercept and is the documented
    calibration knob (0 keeps the table-literal behaviour).
    """

    intercept: float = 0.0            # fixed effect added to every line
    time_slope: float = -0.05         # shared drift per log-day
    treatment_slope: float = -0.10    # extra drift per log-day under treatment
    intercept_sd: float = 1.5
    recover_slope_mean: float = -4.0
    recover_slope_sd: float = 0.3
    death_slope_mean: float = 7.0
    death_slope_sd: float = 0.15
    p_death_control: float = 0.10
    p_death_treatment: float = 0.05
    noise_scale: float = 0.0          # multiplier on the daily residual
    resid_sd: float = 0.25
    lagged: bool = False
    lag_day: int = 7
    lag_mode: str = "corrected"
    baseline_offset: float = 0.0
    n_per_arm: int = 400
    horizon_days: int = 28
    categories: int = 7

    def __post_init__(self):
        for name in ("p_death_control", "p_death_treatment"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidArgumentError(f"{name} must be in [0, 1]")
        for name in ("intercept_sd", "recover_slope_sd", "death_slope_sd", "resid_sd"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(f"{name} must be >= 0")
        if self.lag_day >= self.horizon_days:
            raise InvalidArgumentError("lag_day must be below the horizon")
        if self.lag_mode not in LAG_MODES:
            raise InvalidArgumentError(f"lag_mode must be one of {LAG_MODES}")
        if self.categories < 2 or self.horizon_days < 1 or self.n_per_arm < 1:
            raise InvalidArgumentError("categories >= 2, horizon >= 1, n_per_arm >= 1 required")

    def null_effect(self) -> "ScenarioParams":
        """The same dynamics with every between-arm difference removed."""
        return replace(self, treatment_slope=0.0, p_death_treatment=self.p_death_control)


@dataclass(frozen=True)
class POScenarioParams:
    """Parameters for the proportional-odds-enforcing generator."""

    baseline_probs: tuple[float, ...]
    or_schedule: dict[int, float] = field(hash=False)
    shared_dynamics: ScenarioParams = field(hash=False)
    n_per_arm: int = 400
    horizon_days: int = 28
    categories: int = 7

    def __post_init__(self):
        probs = np.asarray(self.baseline_probs, dtype=np.float64)
        if probs.size != self.categories:
            raise InvalidArgumentError("baseline_probs must have one entry per category")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError("baseline_probs must be a probability vector (sum 1)")
        for day, ratio in self.or_schedule.items():
            if ratio <= 0:
                raise InvalidArgumentError(f"odds ratio for day {day} must be > 0")
            if not 1 <= day <= self.horizon_days:
                raise InvalidArgumentError(f"or_schedule day {day} outside [1, horizon]")
        if not self.or_schedule or max(self.or_schedule) < self.horizon_days:
            raise ConfigError("or_schedule must cover every day up to the horizon")

    def daily_odds_ratios(self) -> np.ndarray:
        """Expand the anchored schedule to one OR per day (piecewise constant).

        Each listed day closes a band: days after the previous anchor up to
        and including the listed day share its odds ratio.
        """
        anchors = np.array(sorted(self.or_schedule), dtype=np.int64)
        values = np.array([self.or_schedule[int(d)] for d in anchors])
        days = np.arange(1, self.horizon_days + 1)
        idx = np.searchsorted(anchors, days, side="left")
        return values[idx]


def _standard_normals(rng: np.random.Generator, shape) -> np.ndarray:
    """Inverse-CDF normals so streams reproduce across platforms."""
    u = rng.random(shape)
    return ndtri(np.clip(u, 1e-300, 1.0 - 1e-16))


def floor_clamp(y: np.ndarray, categories: int) -> np.ndarray:
    """Integer part of the latent line, clamped to the ordinal range."""
    return np.clip(np.floor(y), 1, categories).astype(np.int16)


def enforce_absorbing(scores: np.ndarray, categories: int) -> np.ndarray:
    """Freeze each row forward from its first visit to 1 or K."""
    n, horizon = scores.shape
    hit = (scores == 1) | (scores == categories)
    any_hit = hit.any(axis=1)
    first = hit.argmax(axis=1)
    vals = scores[np.arange(n), first]
    cols = np.arange(horizon)[None, :]
    frozen = any_hit[:, None] & (cols >= first[:, None])
    return np.where(frozen, vals[:, None], scores).astype(np.int16)


def _draw_lines(params: ScenarioParams, arm: int, n: int, rng: np.random.Generator):
    """Draw per-subject intercepts and destiny slopes (fixed draw order)."""
    b0 = params.baseline_offset + params.intercept + params.intercept_sd * _standard_normals(rng, n)
    p_death = params.p_death_control if arm == CONTROL else params.p_death_treatment
    dies = rng.random(n) < p_death
    z = _standard_normals(rng, n)
    slope = np.where(
        dies,
        params.death_slope_mean + params.death_slope_sd * z,
        params.recover_slope_mean + params.recover_slope_sd * z,
    )
    return b0, slope


def _noise(params: ScenarioParams, n: int, rng: np.random.Generator) -> np.ndarray | float:
    if params.noise_scale == 0.0:
        return 0.0
    e = _standard_normals(rng, (n, params.horizon_days))
    return params.noise_scale * params.resid_sd * e


def _scores_block(params: ScenarioParams, arm: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """(n, horizon) score matrix for one arm."""
    days = np.arange(1, params.horizon_days + 1, dtype=np.float64)
    logd = np.log(days)[None, :]
    b0, slope = _draw_lines(params, arm, n, rng)
    z = 1.0 if arm == TREATMENT else 0.0

    if not params.lagged:
        drift = params.time_slope + slope + params.treatment_slope * z
        y = b0[:, None] + drift[:, None] * logd + _noise(params, n, rng)
    else:
        lag = np.log(np.maximum(days - params.lag_day, 1.0))
        lag[days <= params.lag_day] = 0.0
        lagd = lag[None, :]
        if params.lag_mode == "literal":
            # equation as printed: control keeps only the shared drift, and
            # the whole random slope activates post-lag under treatment
            y = (
                b0[:, None]
                + params.time_slope * logd
                + z * (slope + params.treatment_slope)[:, None] * lagd
                + _noise(params, n, rng)
            )
        else:
            # corrected: both arms run the same destiny dynamics on the
            # lagged clock, so arms are exchangeable through the lag day and
            # every treatment-specific term activates with the shifted clock
            y = (
                b0[:, None]
                + params.time_slope * logd
                + (slope + params.treatment_slope * z)[:, None] * lagd
                + _noise(params, n, rng)
            )
    return enforce_absorbing(floor_clamp(y, params.categories), params.categories)


def gen_trajectory_eq1(params: ScenarioParams, arm: int, rng: np.random.Generator) -> Trajectory:
    """One subject from the random-line model (complete day grid)."""
    if params.lagged:
        raise InvalidArgumentError("params.lagged must be False for the unlagged generator")
    return _single(params, arm, rng)


def gen_trajectory_lagged(params: ScenarioParams, arm: int, rng: np.random.Generator) -> Trajectory:
    """One subject from the lagged-effect model (`literal` or `corrected` mode)."""
    if not params.lagged:
        raise InvalidArgumentError("params.lagged must be True for the lagged generator")
    return _single(params, arm, rng)


def _single(params: ScenarioParams, arm: int, rng: np.random.Generator) -> Trajectory:
    scores = _scores_block(params, arm, 1, rng)[0]
    return Trajectory(
        subject_id="s0",
        arm=arm,
        days=tuple(range(1, params.horizon_days + 1)),
        scores=tuple(int(s) for s in scores),
        categories=params.categories,
    )


def gen_trial_eq1(params: ScenarioParams, rng: np.random.Generator) -> TrialDataset:
    """A full two-arm trial: control block drawn first, then treatment."""
    n = params.n_per_arm
    ctrl = _scores_block(params, CONTROL, n, rng)
    trt = _scores_block(params, TREATMENT, n, rng)
    scores = np.vstack([ctrl, trt])
    arms = np.concatenate([np.zeros(n, dtype=np.int8), np.ones(n, dtype=np.int8)])
    ids = [f"c{i:04d}" for i in range(n)] + [f"t{i:04d}" for i in range(n)]
    return TrialDataset.from_arrays(scores, arms, ids, categories=params.categories,
                                    recovery_threshold=1)


# ---------------------------------------------------------------------------
# proportional-odds generator (model 2)
# ---------------------------------------------------------------------------

def po_shift(probs, odds_ratio: float) -> np.ndarray:
    """Shift a category distribution by a common cumulative odds ratio.

    cumulative(q)_k = OR*C_k / (1 + (OR-1)*C_k) with C the input cumulative
    probabilities toward better (lower) categories; OR > 1 moves mass toward
    better outcomes.
    """
    if odds_ratio <= 0:
        raise InvalidArgumentError("odds_ratio must be > 0")
    p = np.asarray(probs, dtype=np.float64)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidArgumentError("probs must be a probability vector")
    c = np.cumsum(p)
    c[-1] = 1.0
    shifted = odds_ratio * c / (1.0 + (odds_ratio - 1.0) * c)
    shifted[-1] = 1.0
    return np.diff(np.concatenate([[0.0], shifted]))


def _shared_null(params: POScenarioParams) -> ScenarioParams:
    base = params.shared_dynamics.null_effect()
    return replace(
        base,
        horizon_days=params.horizon_days,
        categories=params.categories,
        n_per_arm=params.n_per_arm,
    )


def _baseline_block(params: POScenarioParams, shared: ScenarioParams, n: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Null-law scores with day-1 categories drawn from baseline_probs.

    The latent intercept is the drawn category plus a uniform fraction, so
    the day-1 floor reproduces the requested baseline distribution exactly
    (when the daily noise multiplier is zero).
    """
    cum = np.cumsum(np.asarray(params.baseline_probs))
    cum[-1] = 1.0
    s1 = np.searchsorted(cum, rng.random(n), side="right") + 1
    frac = rng.random(n)
    p_death = shared.p_death_control
    dies = rng.random(n) < p_death
    z = _standard_normals(rng, n)
    slope = np.where(
        dies,
        shared.death_slope_mean + shared.death_slope_sd * z,
        shared.recover_slope_mean + shared.recover_slope_sd * z,
    )
    days = np.arange(1, params.horizon_days + 1, dtype=np.float64)
    logd = np.log(days)[None, :]
    y = (s1 + frac)[:, None] + (shared.time_slope + slope)[:, None] * logd
    y = y + _noise(shared, n, rng)
    return enforce_absorbing(floor_clamp(y, params.categories), params.categories)


def gen_trial_po(params: POScenarioParams, rng: np.random.Generator) -> TrialDataset:
    """Two arms from one null law, treatment re-mapped to shifted marginals.

    Per day, each treatment subject's score is sent through the monotone
    quantile map from the pooled control marginal to its odds-shifted
    version.  The subject's latent rank inside their score's probability
    band uses a single uniform drawn once per subject, preserving the
    shifted marginals exactly while keeping within-subject ordering; the
    absorbing rule is re-enforced afterwards.
    """
    shared = _shared_null(params)
    n = params.n_per_arm
    K = params.categories
    ctrl = _baseline_block(params, shared, n, rng)
    trt = _baseline_block(params, shared, n, rng)
    v = rng.random(n)[:, None]  # one latent rank fraction per subject

    ratios = params.daily_odds_ratios()
    # pooled control empirical cumulative distribution per day, (D, K)
    counts = np.stack([np.bincount(ctrl[:, d], minlength=K + 1)[1:] for d in range(params.horizon_days)])
    fcum = np.cumsum(counts, axis=1) / n
    fcum[:, -1] = 1.0

    mapped = np.empty_like(trt)
    for d in range(params.horizon_days):
        ratio = ratios[d]
        gcum = ratio * fcum[d] / (1.0 + (ratio - 1.0) * fcum[d])
        gcum[-1] = 1.0
        x = trt[:, d].astype(np.int64)
        low = np.where(x > 1, fcum[d][x - 2], 0.0)
        high = fcum[d][x - 1]
        u = low + v[:, 0] * (high - low)
        mapped[:, d] = np.searchsorted(gcum, u, side="right") + 1
    np.clip(mapped, 1, K, out=mapped)
    trt_final = enforce_absorbing(mapped.astype(np.int16), K)

    scores = np.vstack([ctrl, trt_final])
    arms = np.concatenate([np.zeros(n, dtype=np.int8), np.ones(n, dtype=np.int8)])
    ids = [f"c{i:04d}" for i in range(n)] + [f"t{i:04d}" for i in range(n)]
    return TrialDataset.from_arrays(scores, arms, ids, categories=K, recovery_threshold=1)
