"""Monte Carlo verification harnesses built on exact conditional laws.

The central tool is the conditional-maximum oracle: given any finite set of
evaluations of W covering t = 0 and t = 1, one bridge-maximum draw per
consecutive pair, maximized over pairs, is an exact sample of
M = sup_{[0,1]} W conditioned on those evaluations. No discretization bias
enters anywhere; every check here compares exact samples against the bound
under test.

Every harness returns a :class:`VerificationReport` with raw counts, the
theoretical bound, a Wilson confidence limit where a rate is being tested,
and a pass verdict. Trial j of a suite seeded with s always uses the child
seed ``derive_seed(s, j)``, so suites are reproducible trial-by-trial and
safe to parallelize (counts reduce by summing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from .brownian import bridge_max_from_uniforms, bridge_max_sample, new_path
from .optimizer import eta, run_oob, run_oob_on_path, RunResult
from .rng import RandomSource, derive_seed

__all__ = [
    "NearOptimalCount",
    "VerificationReport",
    "Z95",
    "baseline_separation",
    "complexity_fit",
    "conditional_max_sample",
    "conditional_max_samples",
    "event_c_check",
    "lemma3_mc",
    "near_optimal_count",
    "pac_estimate",
    "uniform_grid_baseline",
    "wilson_ci",
]

# Two-sided 95% standard normal quantile, Phi^-1(0.975).
Z95 = 1.959963984540054

# Stream tags for auxiliary draws that must not collide with trial seeds.
_ORACLE_TAG = 0x6F7261636C65  # "oracle"
_RUNNER_TAG = 0x72756E6E6572  # "runner"


def wilson_ci(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Stays valid near 0 and 1 where the normal-approximation interval
    collapses, which matters here because several bounds under test are
    tiny (fifth-power rates).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt((p * (1.0 - p) + z2 / (4.0 * trials)) / trials) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class VerificationReport:
    """Summary of one Monte Carlo suite.

    ``violations / trials`` always equals ``empirical_rate``; what counts
    as a trial and a violation is suite-specific and recorded in
    ``metadata`` together with the exact comparison that decided
    ``passed``. ``wilson_upper_95`` is None for suites whose verdict is
    not a binomial-rate comparison.
    """

    trials: int
    violations: int
    empirical_rate: float
    bound: float
    wilson_upper_95: float | None
    passed: bool
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        """Flat dict with stable key order for serialization."""
        return {
            "trials": self.trials,
            "violations": self.violations,
            "empirical_rate": self.empirical_rate,
            "bound": self.bound,
            "wilson_upper_95": self.wilson_upper_95,
            "passed": self.passed,
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class NearOptimalCount:
    """How many depth-h grid points come within eta of a maximum reference."""

    h: int
    eta: float
    count: int

    def __post_init__(self) -> None:
        if not 0 <= self.count <= (1 << self.h) + 1:
            raise ValueError(f"count {self.count} outside [0, 2**{self.h} + 1]")


def _evaluation_arrays(
    evaluations: list[tuple[float, float]]
) -> tuple[np.ndarray, np.ndarray]:
    """Validate an evaluation set covering [0, 1] and split it into arrays."""
    if len(evaluations) < 2:
        raise ValueError("need at least the two endpoint evaluations")
    t = np.asarray([point[0] for point in evaluations], dtype=float)
    w = np.asarray([point[1] for point in evaluations], dtype=float)
    if t[0] != 0.0 or t[-1] != 1.0:
        raise ValueError("evaluations must start at t=0 and end at t=1")
    if np.any(np.diff(t) <= 0.0):
        raise ValueError("evaluation times must be strictly increasing")
    return t, w


def conditional_max_sample(
    evaluations: list[tuple[float, float]], rng: RandomSource
) -> float:
    """Exact draw of M = sup W over [0, 1] given the evaluations.

    Consecutive evaluations pin independent bridges; one bridge-maximum
    draw per cell, maximized over cells, has exactly the conditional law
    of M. Consumes one uniform per cell, left to right. The result is
    never below the best evaluation.
    """
    t, w = _evaluation_arrays(evaluations)
    best = -math.inf
    for i in range(len(t) - 1):
        x = bridge_max_sample(rng, t[i], t[i + 1], w[i], w[i + 1])
        if x > best:
            best = x
    return best


def conditional_max_samples(
    evaluations: list[tuple[float, float]], rng: RandomSource, count: int
) -> np.ndarray:
    """``count`` independent conditional draws of M over one evaluation set.

    Batched counterpart of :func:`conditional_max_sample`: consumes
    ``count * cells`` uniforms in one call, row r holding the cell draws
    of sample r. Values match ``count`` sequential scalar calls up to
    elementwise rounding differences in the numpy kernels.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    t, w = _evaluation_arrays(evaluations)
    u = rng.uniforms_open((count, len(t) - 1))
    x = bridge_max_from_uniforms(u, np.diff(t), w[:-1], w[1:])
    return x.max(axis=1)


def pac_estimate(
    epsilon: float, trials: int, oracle_draws_per_trial: int, seed: int
) -> VerificationReport:
    """Estimate the probability that a run's answer is more than epsilon low.

    Per trial: one optimizer run on a fresh path, then
    ``oracle_draws_per_trial`` conditional draws of M given that run's
    final evaluation set (continuing the trial path's own stream). Each
    draw with M - m_hat > epsilon counts as an exceedance. The claimed
    bound is that the exceedance probability is at most epsilon; the
    report passes when the empirical rate is within one Wilson 95%
    half-width of that.
    """
    if trials < 1 or oracle_draws_per_trial < 1:
        raise ValueError("trials and oracle_draws_per_trial must be >= 1")
    exceedances = 0
    for j in range(trials):
        path = new_path(derive_seed(seed, j))
        result = run_oob_on_path(epsilon, path)
        samples = conditional_max_samples(
            path.evaluations(), path.rng, oracle_draws_per_trial
        )
        exceedances += int(np.count_nonzero(samples - result.m_hat > epsilon))
    total = trials * oracle_draws_per_trial
    rate = exceedances / total
    upper = wilson_ci(exceedances, total)[1]
    slack = upper - rate
    return VerificationReport(
        trials=total,
        violations=exceedances,
        empirical_rate=rate,
        bound=epsilon,
        wilson_upper_95=upper,
        passed=rate <= epsilon + slack,
        metadata={
            "suite": "pac",
            "epsilon": epsilon,
            "runs": trials,
            "oracle_draws_per_run": oracle_draws_per_trial,
            "seed": seed,
            "comparison": "empirical_rate <= bound + (wilson_upper_95 - empirical_rate)",
        },
    )


def near_optimal_count(
    grid_values: list[float], m_ref: float, eta: float
) -> NearOptimalCount:
    """Count grid values within eta of the maximum reference m_ref.

    ``grid_values`` must hold W at the 2**h + 1 points of a depth-h dyadic
    grid, in order; h is inferred from the length. Counts entries with
    value >= m_ref - eta.
    """
    if eta < 0.0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    n = len(grid_values)
    h = (n - 1).bit_length() - 1
    if n < 2 or (1 << h) != n - 1:
        raise ValueError(f"grid length must be 2**h + 1 for some h >= 0, got {n}")
    values = np.asarray(grid_values, dtype=float)
    count = int(np.count_nonzero(values >= m_ref - eta))
    return NearOptimalCount(h=h, eta=eta, count=count)


def _dyadic_grid_walk(rng: RandomSource, depth: int) -> np.ndarray:
    """W on the depth-`depth` dyadic grid by sequential increments.

    Consumes 2**depth Gaussians; returns the 2**depth + 1 grid values.
    """
    n = 1 << depth
    z = rng.normals(n)
    w = np.empty(n + 1)
    w[0] = 0.0
    np.cumsum(z, out=w[1:])
    w[1:] *= math.sqrt(math.ldexp(1.0, -depth))
    return w


def _cell_max_samples(rng: RandomSource, w: np.ndarray, depth: int) -> np.ndarray:
    """One exact sup draw per cell of the depth-`depth` grid holding w.

    Consumes 2**depth uniforms, left to right.
    """
    u = rng.uniforms_open(w.size - 1)
    return bridge_max_from_uniforms(u, math.ldexp(1.0, -depth), w[:-1], w[1:])


def lemma3_mc(
    h: int, eta: float, trials: int, oracle_depth: int, seed: int
) -> VerificationReport:
    """Check that E[near-optimal count at depth h] <= 6 * eta**2 * 2**h.

    Per trial: walk W on the depth-``oracle_depth`` grid, form the maximum
    reference as the max over per-cell exact sup draws (jointly with the
    grid this has exactly the law of the true global maximum, and it never
    falls below the fine-grid max), and count depth-h grid points within
    eta of it. Passes when mean count + 3 standard errors <= the bound;
    this is a one-sided bound check, so only overshoot fails it.

    In the report, ``violations`` is the summed count over trials, making
    ``empirical_rate`` the mean count per trial; ``wilson_upper_95`` is
    None since the statistic is a mean of small integers, not a rate.
    """
    if h < 0:
        raise ValueError(f"h must be >= 0, got {h}")
    if eta < 0.0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if oracle_depth < h:
        raise ValueError(f"oracle_depth must be >= h, got {oracle_depth} < {h}")
    stride = 1 << (oracle_depth - h)
    counts = np.empty(trials)
    for j in range(trials):
        rng = RandomSource(derive_seed(seed, j))
        w = _dyadic_grid_walk(rng, oracle_depth)
        m_ref = float(_cell_max_samples(rng, w, oracle_depth).max())
        counts[j] = np.count_nonzero(w[::stride] >= m_ref - eta)
    bound = 6.0 * eta * eta * (1 << h)
    mean = float(counts.mean())
    std_error = float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    total = int(counts.sum())
    return VerificationReport(
        trials=trials,
        violations=total,
        empirical_rate=total / trials,
        bound=bound,
        wilson_upper_95=None,
        passed=mean + 3.0 * std_error <= bound,
        metadata={
            "suite": "lemma3",
            "h": h,
            "eta": eta,
            "oracle_depth": oracle_depth,
            "seed": seed,
            "mean_count": mean,
            "std_error": std_error,
            "mean_plus_3se": mean + 3.0 * std_error,
            "comparison": "mean_count + 3*std_error <= bound",
        },
    )


def event_c_check(
    epsilon: float, check_depth: int, trials: int, seed: int
) -> VerificationReport:
    """Estimate how often some dyadic interval beats its optimistic bound.

    Per trial: walk W on the depth-``check_depth`` grid and draw one exact
    sup sample per finest cell. Sups of coarser dyadic intervals are the
    maxima of their cells' draws, reused consistently up the tree, so all
    (2**(check_depth+1) - 1) interval sups come from one coherent joint
    sample. The trial is a violation if any interval's sup exceeds its
    bound max(endpoints) + eta(epsilon, length). The theoretical bound on
    the violation probability is epsilon**5.

    Only depths h <= check_depth are examined, so the empirical rate is a
    lower bound for the untruncated event; deeper intervals contribute a
    rapidly vanishing tail. This caveat is recorded in the metadata.
    """
    if not 0.0 < epsilon <= 0.5:
        raise ValueError(f"epsilon must satisfy 0 < epsilon <= 1/2, got {epsilon}")
    if check_depth < 1:
        raise ValueError(f"check_depth must be >= 1, got {check_depth}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    widths = [eta(epsilon, math.ldexp(1.0, -h)) for h in range(check_depth + 1)]
    violations = 0
    for j in range(trials):
        rng = RandomSource(derive_seed(seed, j))
        w = _dyadic_grid_walk(rng, check_depth)
        sups = _cell_max_samples(rng, w, check_depth)
        bad = False
        level = sups
        for h in range(check_depth, -1, -1):
            ends = w[:: 1 << (check_depth - h)]
            bounds = np.maximum(ends[:-1], ends[1:]) + widths[h]
            if np.any(level > bounds):
                bad = True
                break
            if h:
                level = np.maximum(level[0::2], level[1::2])
        violations += bad
    rate = violations / trials
    bound = epsilon**5
    upper = wilson_ci(violations, trials)[1]
    slack = upper - rate
    return VerificationReport(
        trials=trials,
        violations=violations,
        empirical_rate=rate,
        bound=bound,
        wilson_upper_95=upper,
        passed=rate <= bound + slack,
        metadata={
            "suite": "eventc",
            "epsilon": epsilon,
            "check_depth": check_depth,
            "seed": seed,
            "truncation": (
                "intervals of depth <= check_depth only; the empirical rate "
                "lower-bounds the untruncated violation probability"
            ),
            "comparison": "empirical_rate <= bound + (wilson_upper_95 - empirical_rate)",
        },
    )


def uniform_grid_baseline(n: int, seed: int) -> RunResult:
    """Non-adaptive reference: evaluate W at k/n for k = 1..n and take the best.

    Returns a :class:`RunResult` with ``n_evals = n`` and the argmax over
    the n evaluations plus the free candidate t = 0. The fields that only
    make sense for the optimizer carry sentinels: ``epsilon = nan`` and
    ``h_max = -1``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    path = new_path(seed)
    trace = []
    t_hat, m_hat = 0.0, 0.0
    for k in range(1, n + 1):
        t = k / n
        w = path.evaluate(t)
        trace.append((t, w))
        if w > m_hat:
            t_hat, m_hat = t, w
    return RunResult(
        epsilon=math.nan,
        t_hat=t_hat,
        m_hat=m_hat,
        n_evals=n,
        h_max=-1,
        trace=tuple(trace),
        seed=seed,
    )


def baseline_separation(
    epsilons: tuple[float, ...] = (0.05, 0.01),
    grid_sizes: tuple[int, ...] = tuple(2**k for k in range(4, 15)),
    trials: int = 101,
    oob_runs: int = 200,
    min_factor: float = 3.0,
    seed: int = 0,
) -> VerificationReport:
    """Compare grid sizes needed for target error against optimizer cost.

    For each grid size, the median conditional error M - m_hat is measured
    over ``trials`` fresh paths (M drawn by the conditional oracle over the
    grid evaluations). For each target epsilon, in decreasing order, the
    smallest grid size whose median error is <= epsilon is divided by the
    optimizer's mean evaluation count at that epsilon. The suite passes
    when every target is reachable, the cost ratio strictly grows as
    epsilon shrinks, and the ratio at the smallest epsilon is at least
    ``min_factor``. One violation is counted per epsilon level that breaks
    its part of that contract.
    """
    if len(epsilons) < 1 or any(not 0.0 < e < 0.5 for e in epsilons):
        raise ValueError("epsilons must be non-empty with each in (0, 1/2)")
    if any(epsilons[i + 1] >= epsilons[i] for i in range(len(epsilons) - 1)):
        raise ValueError("epsilons must be strictly decreasing")
    if len(grid_sizes) < 1 or any(n < 1 for n in grid_sizes):
        raise ValueError("grid_sizes must be non-empty positive integers")
    if trials < 1 or oob_runs < 1:
        raise ValueError("trials and oob_runs must be >= 1")

    medians = {}
    for i, n in enumerate(grid_sizes):
        level_seed = derive_seed(seed, i)
        errors = []
        for j in range(trials):
            trial_seed = derive_seed(level_seed, j)
            result = uniform_grid_baseline(n, trial_seed)
            evaluations = [(0.0, 0.0)] + list(result.trace)
            oracle = RandomSource(derive_seed(trial_seed, _ORACLE_TAG))
            m = conditional_max_sample(evaluations, oracle)
            errors.append(m - result.m_hat)
        medians[n] = median(errors)

    ratios: list[float | None] = []
    mean_evals = []
    required = []
    violations = 0
    for level, epsilon in enumerate(epsilons):
        base = derive_seed(seed, _RUNNER_TAG + level)
        mean_n = sum(
            run_oob(epsilon, derive_seed(base, j)).n_evals for j in range(oob_runs)
        ) / oob_runs
        mean_evals.append(mean_n)
        n_req = next((n for n in grid_sizes if medians[n] <= epsilon), None)
        required.append(n_req)
        ratio = None if n_req is None else n_req / mean_n
        ratios.append(ratio)
        failed = ratio is None
        if not failed and level > 0:
            previous = ratios[level - 1]
            failed = previous is None or ratio <= previous
        if not failed and level == len(epsilons) - 1:
            failed = ratio < min_factor
        violations += failed
    levels = len(epsilons)
    return VerificationReport(
        trials=levels,
        violations=violations,
        empirical_rate=violations / levels,
        bound=min_factor,
        wilson_upper_95=None,
        passed=violations == 0,
        metadata={
            "suite": "baseline",
            "epsilons": list(epsilons),
            "grid_sizes": list(grid_sizes),
            "trials_per_grid": trials,
            "oob_runs": oob_runs,
            "seed": seed,
            "median_errors": {str(n): medians[n] for n in grid_sizes},
            "required_grid_n": required,
            "oob_mean_evals": mean_evals,
            "cost_ratios": ratios,
            "comparison": (
                "each epsilon reachable; cost_ratios strictly increasing; "
                "final ratio >= bound"
            ),
        },
    )


def complexity_fit(epsilons: list[float], mean_evals: list[float]) -> dict:
    """Least-squares line of mean evaluation counts against ln(1/eps)**2.

    Returns slope, intercept, and r_squared. Two distinct epsilon values
    minimum; with exactly two the fit is a perfect line and r_squared is 1.
    """
    if len(epsilons) != len(mean_evals) or len(epsilons) < 2:
        raise ValueError("need matching lists with at least two points")
    x = np.array([math.log(1.0 / e) ** 2 for e in epsilons])
    y = np.asarray(mean_evals, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    total = float(np.sum((y - y.mean()) ** 2))
    residual = float(np.sum((y - predicted) ** 2))
    r_squared = 1.0 if total == 0.0 else 1.0 - residual / total
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "r_squared": r_squared,
    }
