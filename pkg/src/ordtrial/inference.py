"""Two-sample tests and estimators used by the endpoint power studies.

Everything here is implemented directly on numpy/scipy.special primitives:
cumulative-logit (proportional odds) regression, Wilcoxon rank-sum with an
exact small-sample mode, Welch/pooled t, pooled-variance two-proportion z,
Fisher's exact test, the two-group log-rank test, Cox regression for a single
binary covariate with Efron (or Breslow) tie handling, and the Schoenfeld
events formula for log-rank sample size.

Sign conventions: group 1 is "treatment".  For the proportional odds model an
odds ratio above 1 means higher odds of a *better* (lower) category under
treatment; for Cox fits the estimate is the instantaneous event-rate ratio
treatment/control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from .errors import DegenerateInputError, InvalidArgumentError, UndefinedValueError

Z975 = float(special.ndtri(0.975))
P_FLOOR = 1e-15

MAX_ITER = 100
SCORE_TOL = 1e-8


@dataclass(frozen=True)
class TestResult:
    """Estimate, two-sided CI, test statistic and p-value for one method."""

    method: str
    estimate: float
    ci_low: float
    ci_high: float
    statistic: float
    p_value: float
    n_used: int
    day: int | None = None
    converged: bool = True
    message: str = ""

    def with_day(self, day: int | None) -> "TestResult":
        return replace(self, day=day)


def _two_sided_p(z: float) -> float:
    return max(float(2.0 * special.ndtr(-abs(z))), P_FLOOR)


# ---------------------------------------------------------------------------
# proportional odds (cumulative logit) regression
# ---------------------------------------------------------------------------

def _po_counts(control_scores, treatment_scores) -> np.ndarray:
    c = np.asarray(control_scores, dtype=np.int64)
    t = np.asarray(treatment_scores, dtype=np.int64)
    if c.size == 0 or t.size == 0:
        raise DegenerateInputError("both arms must be non-empty")
    cats = np.unique(np.concatenate([c, t]))
    counts = np.zeros((2, cats.size), dtype=np.float64)
    for z, vals in enumerate((c, t)):
        idx = np.searchsorted(cats, vals)
        np.add.at(counts[z], idx, 1.0)
    return counts


def _po_loglik_parts(theta: np.ndarray, counts: np.ndarray):
    """Log-likelihood, gradient and Hessian for ordered intercepts + one slope.

    theta = (alpha_1..alpha_J, beta) with J = n_categories - 1; the cumulative
    model is logit P(Y <= k | z) = alpha_k + beta * z for z in {0, 1}.
    """
    ncat = counts.shape[1]
    J = ncat - 1
    alpha = theta[:J]
    beta = theta[J]
    npar = J + 1

    loglik = 0.0
    grad = np.zeros(npar)
    hess = np.zeros((npar, npar))

    for z in (0, 1):
        n = counts[z]
        eta = alpha + beta * z
        gamma = special.expit(eta)
        g = gamma * (1.0 - gamma)
        h = g * (1.0 - 2.0 * gamma)
        cum = np.concatenate([[0.0], gamma, [1.0]])
        p = np.diff(cum)
        if np.any(p <= 0.0):
            return -np.inf, grad, hess
        loglik += float(np.dot(n, np.log(p)))
        r = n / p  # length ncat
        # e_j basis: unit vector at j plus z in the beta slot
        w1 = (r[:J] - r[1:]) * g  # score weight per cutpoint
        grad[:J] += w1
        grad[J] += z * float(np.sum(w1))

        # A[k, :] = d p_k / d theta  (rows k = 1..ncat)
        A = np.zeros((ncat, npar))
        for j in range(J):
            A[j, j] += g[j]
            A[j, J] += z * g[j]
            A[j + 1, j] -= g[j]
            A[j + 1, J] -= z * g[j]
        hess -= A.T @ (A * (n / p**2)[:, None])
        w2 = (r[:J] - r[1:]) * h
        for j in range(J):
            hess[j, j] += w2[j]
            hess[j, J] += z * w2[j]
            hess[J, j] += z * w2[j]
            hess[J, J] += z * z * w2[j]
    return loglik, grad, hess


def fit_proportional_odds(control_scores, treatment_scores, alpha: float = 0.05) -> TestResult:
    """ML fit of the cumulative-logit model with a single treatment effect.

    Empty categories are collapsed before fitting, leaving K'-1 ordered
    intercepts.  Newton-Raphson with step-halving; convergence when the
    largest absolute score entry drops below 1e-8.  Complete separation is
    reported as a non-converged result rather than raised.
    """
    return po_fit_counts(_po_counts(control_scores, treatment_scores), alpha)


def po_fit_counts(counts: np.ndarray, alpha: float = 0.05) -> TestResult:
    """Proportional odds fit from a (2, n_categories) count matrix.

    Row 0 is control, row 1 treatment; all-empty categories must already be
    dropped (the power engine does this with a bincount mask).
    """
    counts = np.asarray(counts, dtype=np.float64)
    keep = counts.sum(axis=0) > 0
    counts = counts[:, keep]
    ncat = counts.shape[1]
    n_used = int(counts.sum())
    if counts.shape[0] != 2 or np.any(counts.sum(axis=1) == 0):
        raise DegenerateInputError("both arms must be non-empty")
    if ncat < 2:
        raise DegenerateInputError("need at least 2 observed categories to fit")

    pooled = counts.sum(axis=0)
    cumprob = np.clip(np.cumsum(pooled)[:-1] / pooled.sum(), 1e-6, 1 - 1e-6)
    theta = np.concatenate([special.logit(cumprob), [0.0]])

    loglik, grad, hess = _po_loglik_parts(theta, counts)
    converged = False
    for _ in range(MAX_ITER):
        if np.max(np.abs(grad)) < SCORE_TOL:
            converged = True
            break
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        new = theta - step
        new_ll, new_grad, new_hess = _po_loglik_parts(new, counts)
        halvings = 0
        while (not np.isfinite(new_ll) or new_ll < loglik) and halvings < 40:
            step *= 0.5
            new = theta - step
            new_ll, new_grad, new_hess = _po_loglik_parts(new, counts)
            halvings += 1
        if not np.isfinite(new_ll):
            break
        theta, loglik, grad, hess = new, new_ll, new_grad, new_hess
    else:
        converged = np.max(np.abs(grad)) < SCORE_TOL

    beta = float(theta[-1])
    if converged and abs(beta) < 30:
        info = -hess
        try:
            se = float(math.sqrt(np.linalg.inv(info)[-1, -1]))
        except (np.linalg.LinAlgError, ValueError):
            se = float("nan")
            converged = False
    else:
        se = float("nan")
        converged = False

    if not converged or not np.isfinite(se) or se == 0.0:
        return TestResult(
            method="prop_odds",
            estimate=float(np.exp(beta)),
            ci_low=float("nan"),
            ci_high=float("nan"),
            statistic=float("nan"),
            p_value=float("nan"),
            n_used=n_used,
            converged=False,
            message="no convergence (possible complete separation)",
        )

    zstat = beta / se
    zq = float(special.ndtri(1.0 - alpha / 2.0))
    return TestResult(
        method="prop_odds",
        estimate=float(np.exp(beta)),
        ci_low=float(np.exp(max(beta - zq * se, -700.0))),
        ci_high=float(np.exp(min(beta + zq * se, 700.0))),
        statistic=float(zstat),
        p_value=_two_sided_p(zstat),
        n_used=n_used,
    )


# ---------------------------------------------------------------------------
# Wilcoxon rank-sum
# ---------------------------------------------------------------------------

def _midranks(pooled: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mid-ranks of a pooled sample plus the tie-group sizes."""
    order = np.argsort(pooled, kind="stable")
    sorted_vals = pooled[order]
    uniq, start = np.unique(sorted_vals, return_index=True)
    counts = np.diff(np.append(start, pooled.size))
    # rank of a tie group = average of its positions (1-based)
    group_rank = start + (counts + 1) / 2.0
    ranks = np.empty(pooled.size)
    ranks[order] = np.repeat(group_rank, counts)
    return ranks, counts.astype(np.float64)


def _exact_ranksum_tail(doubled: np.ndarray, n_x: int, w2: float) -> tuple[float, float]:
    """P(W2 <= w2) and P(W2 >= w2) over all equally likely n_x-subsets.

    `doubled` holds 2x the pooled mid-ranks (integers), so the distribution
    of the doubled rank-sum can be tabulated with an integer-indexed DP.
    Counts are float64, exact for the small-sample sizes the exact mode
    targets.  Partial sums above the n_x-largest-items cap cannot extend to
    a valid size-n_x subset, so the table can be truncated there.
    """
    doubled = np.sort(doubled)[::-1]
    cap = int(doubled[:n_x].sum())
    ways = np.zeros((n_x + 1, cap + 1))
    ways[0, 0] = 1.0
    for item in doubled:
        item = int(item)
        # descending j so each value is used at most once
        for j in range(n_x, 0, -1):
            ways[j, item:] += ways[j - 1, : cap + 1 - item]
    dist = ways[n_x]
    total = dist.sum()
    w2i = int(round(w2))
    lo = dist[: w2i + 1].sum() / total
    hi = dist[w2i:].sum() / total
    return float(lo), float(hi)


def wilcoxon_rank_sum(x, y, alpha: float = 0.05, exact: bool | None = None) -> TestResult:
    """Two-sample Wilcoxon rank-sum test with mid-ranks for ties.

    Uses the exact permutation distribution when the smaller sample has
    fewer than 10 observations (or when `exact=True`), and the normal
    approximation with tie-corrected variance otherwise.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size == 0 or y.size == 0:
        raise DegenerateInputError("both samples must be non-empty")
    n_x, n_y = x.size, y.size
    N = n_x + n_y
    pooled = np.concatenate([x, y])
    ranks, tie_sizes = _midranks(pooled)
    W = float(ranks[:n_x].sum())
    mean_W = n_x * (N + 1) / 2.0
    tie_term = float(np.sum(tie_sizes**3 - tie_sizes)) / (N * (N - 1)) if N > 1 else 0.0
    var_W = n_x * n_y / 12.0 * ((N + 1) - tie_term)

    estimate = float(x.mean() - y.mean())
    if var_W <= 0.0:
        return TestResult(
            method="wilcoxon",
            estimate=estimate,
            ci_low=float("nan"),
            ci_high=float("nan"),
            statistic=0.0,
            p_value=1.0,
            n_used=N,
        )

    zstat = (W - mean_W) / math.sqrt(var_W)
    use_exact = exact if exact is not None else min(n_x, n_y) < 10
    if use_exact:
        doubled = np.rint(2.0 * ranks).astype(np.int64)
        lo, hi = _exact_ranksum_tail(doubled, n_x, round(2.0 * W))
        p = min(1.0, 2.0 * min(lo, hi))
    else:
        p = _two_sided_p(zstat)
    return TestResult(
        method="wilcoxon",
        estimate=estimate,
        ci_low=float("nan"),
        ci_high=float("nan"),
        statistic=float(zstat),
        p_value=float(p),
        n_used=N,
    )


# ---------------------------------------------------------------------------
# t test
# ---------------------------------------------------------------------------

def t_test(x, y, alpha: float = 0.05, pooled: bool = False) -> TestResult:
    """Welch t-test by default (Satterthwaite df); pooled-variance by flag."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        raise DegenerateInputError("t test needs at least 2 observations per sample")
    n_x, n_y = x.size, y.size
    v_x, v_y = float(np.var(x, ddof=1)), float(np.var(y, ddof=1))
    estimate = float(x.mean() - y.mean())

    if pooled:
        df = n_x + n_y - 2
        sp2 = ((n_x - 1) * v_x + (n_y - 1) * v_y) / df
        se = math.sqrt(sp2 * (1.0 / n_x + 1.0 / n_y))
    else:
        se = math.sqrt(v_x / n_x + v_y / n_y)
        if v_x == 0.0 and v_y == 0.0:
            df = n_x + n_y - 2
        else:
            df = (v_x / n_x + v_y / n_y) ** 2 / (
                (v_x / n_x) ** 2 / (n_x - 1) + (v_y / n_y) ** 2 / (n_y - 1)
            )

    if se == 0.0:
        if estimate == 0.0:
            return TestResult("t_test", 0.0, 0.0, 0.0, 0.0, 1.0, n_x + n_y)
        stat = math.inf if estimate > 0 else -math.inf
        return TestResult("t_test", estimate, estimate, estimate, stat, P_FLOOR, n_x + n_y)

    tstat = estimate / se
    p = max(float(2.0 * special.stdtr(df, -abs(tstat))), P_FLOOR)
    tq = float(special.stdtrit(df, 1.0 - alpha / 2.0))
    return TestResult(
        method="t_test",
        estimate=estimate,
        ci_low=estimate - tq * se,
        ci_high=estimate + tq * se,
        statistic=float(tstat),
        p_value=p,
        n_used=n_x + n_y,
    )


# ---------------------------------------------------------------------------
# proportions
# ---------------------------------------------------------------------------

def two_proportion_test(deaths_t: int, n_t: int, deaths_c: int, n_c: int, alpha: float = 0.05,
                        continuity_correction: bool = False) -> TestResult:
    """Pooled-variance z test of two proportions.

    No continuity correction by default.  `continuity_correction=True`
    applies the Yates adjustment (shrinks |p_t - p_c| by (1/n_t + 1/n_c)/2),
    which reproduces the common R default and is deliberately conservative.
    Estimate is the risk difference (treatment minus control) with an
    unpooled Wald interval.
    """
    if n_t < 1 or n_c < 1:
        raise DegenerateInputError("both arms need at least one subject")
    if not (0 <= deaths_t <= n_t and 0 <= deaths_c <= n_c):
        raise InvalidArgumentError("event counts must lie in [0, n]")
    p_t, p_c = deaths_t / n_t, deaths_c / n_c
    estimate = p_t - p_c
    pbar = (deaths_t + deaths_c) / (n_t + n_c)
    se_pooled = math.sqrt(pbar * (1.0 - pbar) * (1.0 / n_t + 1.0 / n_c))
    diff = estimate
    if continuity_correction:
        shrink = 0.5 * (1.0 / n_t + 1.0 / n_c)
        diff = math.copysign(max(abs(diff) - shrink, 0.0), diff)
    zstat = 0.0 if se_pooled == 0.0 else diff / se_pooled
    p = 1.0 if se_pooled == 0.0 else _two_sided_p(zstat)
    se_wald = math.sqrt(p_t * (1 - p_t) / n_t + p_c * (1 - p_c) / n_c)
    zq = float(special.ndtri(1.0 - alpha / 2.0))
    return TestResult(
        method="two_proportion",
        estimate=float(estimate),
        ci_low=float(estimate - zq * se_wald),
        ci_high=float(estimate + zq * se_wald),
        statistic=float(zstat),
        p_value=float(p),
        n_used=n_t + n_c,
    )


def _hypergeom_logpmf(k: np.ndarray, N: int, K: int, n: int) -> np.ndarray:
    lg = special.gammaln
    return (
        lg(K + 1) - lg(k + 1) - lg(K - k + 1)
        + lg(N - K + 1) - lg(n - k + 1) - lg(N - K - n + k + 1)
        - (lg(N + 1) - lg(n + 1) - lg(N - n + 1))
    )


def fisher_exact(a: int, b: int, c: int, d: int, alpha: float = 0.05) -> TestResult:
    """Two-sided Fisher exact test on the 2x2 table [[a, b], [c, d]].

    The p-value sums hypergeometric probabilities no larger than that of the
    observed table; the estimate is the sample odds ratio ad/bc.
    """
    for v in (a, b, c, d):
        if v < 0:
            raise InvalidArgumentError("counts must be nonnegative")
    r1, r2, c1, c2 = a + b, c + d, a + c, b + d
    N = r1 + r2
    if b * c == 0:
        odds = math.nan if a * d == 0 else math.inf
    else:
        odds = (a * d) / (b * c)
    if min(r1, r2, c1, c2) == 0:
        return TestResult("fisher", float(odds), float("nan"), float("nan"), 0.0, 1.0, N)

    lo, hi = max(0, c1 - r2), min(r1, c1)
    support = np.arange(lo, hi + 1)
    logpmf = _hypergeom_logpmf(support, N, r1, c1)
    pmf = np.exp(logpmf - logpmf.max())
    pmf /= pmf.sum()
    p_obs = pmf[a - lo]
    p = float(np.sum(pmf[pmf <= p_obs * (1.0 + 1e-7)]))
    expected_a = r1 * c1 / N
    return TestResult(
        method="fisher",
        estimate=float(odds),
        ci_low=float("nan"),
        ci_high=float("nan"),
        statistic=float(a - expected_a),
        p_value=min(p, 1.0),
        n_used=N,
    )


# ---------------------------------------------------------------------------
# survival: log-rank and Cox
# ---------------------------------------------------------------------------

def _surv_arrays(obs) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(obs, tuple) and len(obs) == 2 and not hasattr(obs[0], "time"):
        times, events = obs
        return np.asarray(times, dtype=np.float64), np.asarray(events, dtype=bool)
    times = np.array([o.time for o in obs], dtype=np.float64)
    events = np.array([o.event for o in obs], dtype=bool)
    return times, events


def _risk_table(t0, e0, t1, e1):
    """Arrays over distinct event times: (treated events, total events,
    treated at risk, total at risk).

    Censored subjects remain at risk through their censoring time
    (right-continuous risk sets).  Uses a bincount sweep when the times are
    small nonnegative integers, which is the hot path for day-grid data.
    """
    n0, n1 = t0.size, t1.size
    i0 = t0.astype(np.int64)
    i1 = t1.astype(np.int64)
    if (
        np.all(i0 == t0) and np.all(i1 == t1)
        and min(i0.min(initial=1), i1.min(initial=1)) >= 0
        and max(i0.max(initial=0), i1.max(initial=0)) <= 100_000
    ):
        tmax = int(max(i0.max(initial=0), i1.max(initial=0)))
        leave0 = np.bincount(i0, minlength=tmax + 1)
        leave1 = np.bincount(i1, minlength=tmax + 1)
        ev0 = np.bincount(i0[e0], minlength=tmax + 1)
        ev1 = np.bincount(i1[e1], minlength=tmax + 1)
        days = np.nonzero(ev0 + ev1)[0]
        cum0 = np.cumsum(leave0)
        cum1 = np.cumsum(leave1)
        r0 = n0 - cum0[days - 1]
        r1 = n1 - cum1[days - 1]
        return (
            ev1[days].astype(np.float64),
            (ev0[days] + ev1[days]).astype(np.float64),
            r1.astype(np.float64),
            (r0 + r1).astype(np.float64),
        )
    all_times = np.concatenate([t0, t1])
    all_events = np.concatenate([e0, e1])
    group = np.concatenate([np.zeros(n0, dtype=bool), np.ones(n1, dtype=bool)])
    event_times = np.unique(all_times[all_events])
    a = np.empty(event_times.size)
    d = np.empty(event_times.size)
    r1 = np.empty(event_times.size)
    r = np.empty(event_times.size)
    for i, t in enumerate(event_times):
        at_risk = all_times >= t
        dying = all_events & (all_times == t)
        a[i] = (dying & group).sum()
        d[i] = dying.sum()
        r1[i] = (at_risk & group).sum()
        r[i] = at_risk.sum()
    return a, d, r1, r


def _logrank_ingredients(t0, e0, t1, e1) -> tuple[float, float]:
    """Sum of (observed - expected) group-1 events and its hypergeometric variance."""
    a, d, r1, r = _risk_table(t0, e0, t1, e1)
    o_minus_e = float(np.sum(a - d * r1 / r))
    safe = r > 1
    frac = r1 / r
    var = float(np.sum(
        (d * frac * (1 - frac) * (r - d))[safe] / (r[safe] - 1)
    ))
    return o_minus_e, var


def log_rank(obs_control, obs_treatment, alpha: float = 0.05) -> TestResult:
    """Standard two-group log-rank test (1 df chi-square)."""
    t0, e0 = _surv_arrays(obs_control)
    t1, e1 = _surv_arrays(obs_treatment)
    if e0.sum() + e1.sum() == 0:
        raise UndefinedValueError("log-rank is undefined with zero events")
    o_minus_e, var = _logrank_ingredients(t0, e0, t1, e1)
    if var == 0.0:
        return TestResult("log_rank", float("nan"), float("nan"), float("nan"), 0.0, 1.0,
                          t0.size + t1.size)
    chi2 = o_minus_e**2 / var
    p = max(float(special.chdtrc(1.0, chi2)), P_FLOOR)
    return TestResult(
        method="log_rank",
        estimate=float("nan"),
        ci_low=float("nan"),
        ci_high=float("nan"),
        statistic=float(chi2),
        p_value=p,
        n_used=t0.size + t1.size,
    )


def _cox_setup(t0, e0, t1, e1, ties: str = "efron"):
    """Flatten the tie-corrected partial likelihood into two vectors.

    With A, B per pseudo-event-step, the log partial likelihood is
    a_total*beta - sum(log(A*exp(beta) + B)), so each Newton iteration is a
    handful of vector operations.  Efron uses step fractions l/d within each
    tied group; Breslow uses fraction 0 for every step.
    """
    a, d, r1, r = _risk_table(t0, e0, t1, e1)
    r0 = r - r1
    di = d.astype(np.int64)
    day_idx = np.repeat(np.arange(d.size), di)
    steps = np.concatenate([np.arange(k) for k in di]) if day_idx.size else np.empty(0)
    if ties == "efron":
        frac = steps / np.repeat(d, di)
    else:
        frac = np.zeros_like(steps, dtype=np.float64)
    A = r1[day_idx] - frac * a[day_idx]
    B = r0[day_idx] - frac * (d - a)[day_idx]
    return float(a.sum()), A, B


def _cox_loglik_score_info(beta: float, a_total: float, A: np.ndarray, B: np.ndarray):
    theta = math.exp(beta)
    denom = A * theta + B
    term = A * theta / denom
    loglik = a_total * beta - float(np.sum(np.log(denom)))
    score = a_total - float(np.sum(term))
    info = float(np.sum(term * (1.0 - term)))
    return loglik, score, info


def cox_fit(obs_control, obs_treatment, alpha: float = 0.05, ties: str = "efron") -> TestResult:
    """Cox partial-likelihood MLE for a single binary covariate.

    Efron tie correction by default (Breslow by flag).  The estimate is the
    event-rate ratio treatment/control; with recovery or improvement as the
    event this is the recovery/improvement rate ratio, with death it is the
    hazard ratio.
    """
    if ties not in ("efron", "breslow"):
        raise InvalidArgumentError("ties must be 'efron' or 'breslow'")
    t0, e0 = _surv_arrays(obs_control)
    t1, e1 = _surv_arrays(obs_treatment)
    n_used = t0.size + t1.size
    d0, d1 = int(e0.sum()), int(e1.sum())
    if d0 + d1 == 0:
        raise UndefinedValueError("Cox fit is undefined with zero events")
    if d0 == 0 or d1 == 0:
        est = math.inf if d0 == 0 else 0.0
        return TestResult("cox", est, float("nan"), float("nan"), float("nan"), float("nan"),
                          n_used, converged=False,
                          message="all events in one arm: estimate diverges")

    a_total, A, B = _cox_setup(t0, e0, t1, e1, ties)
    beta = 0.0
    loglik, score, info = _cox_loglik_score_info(beta, a_total, A, B)
    converged = False
    for _ in range(MAX_ITER):
        if abs(score) < SCORE_TOL:
            converged = True
            break
        if info <= 0.0 or abs(beta) > 30.0:
            break
        step = score / info
        new_beta = beta + step
        new_ll, new_score, new_info = _cox_loglik_score_info(new_beta, a_total, A, B)
        halvings = 0
        while (not math.isfinite(new_ll) or new_ll < loglik) and halvings < 40:
            step *= 0.5
            new_beta = beta + step
            new_ll, new_score, new_info = _cox_loglik_score_info(new_beta, a_total, A, B)
            halvings += 1
        beta, loglik, score, info = new_beta, new_ll, new_score, new_info
    else:
        converged = abs(score) < SCORE_TOL

    # a "converged" score at a huge |beta| is separation, not a finite MLE
    if not converged or info <= 0.0 or abs(beta) > 15.0:
        est = float(np.exp(np.clip(beta, -700, 700)))
        return TestResult("cox", est, float("nan"), float("nan"),
                          float("nan"), float("nan"), n_used, converged=False,
                          message="no convergence (monotone partial likelihood?)")

    se = 1.0 / math.sqrt(info)
    zstat = beta / se
    zq = float(special.ndtri(1.0 - alpha / 2.0))
    return TestResult(
        method="cox",
        estimate=float(math.exp(beta)),
        ci_low=float(np.exp(min(beta - zq * se, 700.0))),
        ci_high=float(np.exp(min(beta + zq * se, 700.0))),
        statistic=float(zstat),
        p_value=_two_sided_p(zstat),
        n_used=n_used,
    )


# ---------------------------------------------------------------------------
# sample size
# ---------------------------------------------------------------------------

def schoenfeld_sample_size(
    hazard_ratio: float,
    alpha: float = 0.05,
    power: float = 0.85,
    event_probability: float = 0.10,
    allocation: float = 1.0,
) -> dict[str, int]:
    """Events and total N for a two-arm log-rank test via the events formula.

    events = (z_{1-alpha/2} + z_power)^2 / (p1 p2 log(HR)^2) where p1, p2 are
    the allocation fractions; total N scales events by the event probability.
    """
    if hazard_ratio <= 0 or hazard_ratio == 1.0:
        raise InvalidArgumentError("hazard ratio must be positive and != 1")
    if not (0 < alpha < 1 and 0 < power < 1):
        raise InvalidArgumentError("alpha and power must be in (0, 1)")
    if not 0 < event_probability <= 1:
        raise InvalidArgumentError("event_probability must be in (0, 1]")
    if allocation <= 0:
        raise InvalidArgumentError("allocation ratio must be positive")
    p1 = allocation / (1.0 + allocation)
    p2 = 1.0 - p1
    za = float(special.ndtri(1.0 - alpha / 2.0))
    zb = float(special.ndtri(power))
    events = math.ceil((za + zb) ** 2 / (p1 * p2 * math.log(hazard_ratio) ** 2))
    total_n = math.ceil(events / event_probability)
    return {"events_required": int(events), "total_n": int(total_n)}
