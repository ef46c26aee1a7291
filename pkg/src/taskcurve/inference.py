"""Binomial credible intervals, the chi-squared score, and curve fitting.

Statistics layer for accuracy measurements.  Each measured point is R
successes out of N trials at complexity c.  With a flat prior the posterior
for the success probability is Beta(R + 1, N - R + 1); 95% intervals come
from the symmetric half-width mu around R/N that captures 95% of posterior
mass after clipping to [0, 1].

The goodness-of-fit score divides each squared residual by the squared 95%
half-width and averages over points:

    chi2 = (1/n) sum_c (a_c - ahat_c)^2 / mu_c^2

The half-widths are used as-is (no conversion to one sigma); the absolute
normalization of chi2 is conventional and only comparisons matter.

Fitting minimizes chi2 over log-parameters with a coarse log-grid seeding
followed by Nelder-Mead descent, and estimates parameter uncertainties by
a parametric bootstrap (resample R_c ~ Binomial(N_c, ahat_c), refit, take
sample standard deviations).
"""

import math
from dataclasses import dataclass
from functools import lru_cache

from taskcurve import rng, specfun
from taskcurve.error_model import ErrorModelParams, accuracy
from taskcurve.exceptions import ConvergenceError, DomainError

__all__ = [
    "AccuracyPoint",
    "FitResult",
    "posterior_density",
    "posterior_cdf",
    "credible_halfwidth",
    "chi_squared",
    "fit",
]

_HALFWIDTH_TOL = 1e-10


def _check_counts(n_correct, n_trials, minimum_trials=0):
    if n_trials < minimum_trials:
        raise DomainError(f"n_trials must be >= {minimum_trials}, got {n_trials!r}")
    if not 0 <= n_correct <= n_trials:
        raise DomainError(
            f"need 0 <= n_correct <= n_trials, got {n_correct!r} of {n_trials!r}"
        )


@dataclass(frozen=True)
class AccuracyPoint:
    """One measured accuracy: R = n_correct successes of N = n_trials at
    complexity c, with the 95% credible half-width.

    Counts may be None for synthetic points that carry only a mean and a
    half-width (exactly-on-curve fixtures, ingested summaries).  When
    counts are present, mean_accuracy must equal R/N exactly.
    """

    c: float
    n_trials: int | None
    n_correct: int | None
    mean_accuracy: float
    ci_halfwidth: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise DomainError(f"c must be positive, got {self.c!r}")
        if (self.n_trials is None) != (self.n_correct is None):
            raise DomainError("n_trials and n_correct must be given together")
        if self.n_trials is not None:
            _check_counts(self.n_correct, self.n_trials, minimum_trials=1)
            if self.mean_accuracy != self.n_correct / self.n_trials:
                raise DomainError(
                    "mean_accuracy must equal n_correct / n_trials exactly"
                )
        if not 0.0 <= self.mean_accuracy <= 1.0:
            raise DomainError(
                f"mean_accuracy must lie in [0, 1], got {self.mean_accuracy!r}"
            )
        if not 0.0 <= self.ci_halfwidth <= 1.0:
            raise DomainError(
                f"ci_halfwidth must lie in [0, 1], got {self.ci_halfwidth!r}"
            )

    @classmethod
    def from_counts(cls, c, n_trials, n_correct, level=0.95):
        """Build a point from trial counts, deriving the mean and the
        credible half-width."""
        return cls(
            c=c,
            n_trials=n_trials,
            n_correct=n_correct,
            mean_accuracy=n_correct / n_trials,
            ci_halfwidth=credible_halfwidth(n_correct, n_trials, level),
        )

    @classmethod
    def from_curve(cls, c, mean_accuracy, ci_halfwidth):
        """Synthetic point without underlying counts."""
        return cls(
            c=c,
            n_trials=None,
            n_correct=None,
            mean_accuracy=mean_accuracy,
            ci_halfwidth=ci_halfwidth,
        )


def posterior_density(p: float, n_correct: int, n_trials: int) -> float:
    """Flat-prior posterior density of the success probability:
    Beta(R + 1, N - R + 1) evaluated at p, computed in log space."""
    _check_counts(n_correct, n_trials)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    r = n_correct
    miss = n_trials - n_correct
    if p == 0.0 and r > 0:
        return 0.0
    if p == 1.0 and miss > 0:
        return 0.0
    log_norm = (
        specfun.ln_gamma(n_trials + 2.0)
        - specfun.ln_gamma(r + 1.0)
        - specfun.ln_gamma(miss + 1.0)
    )
    log_shape = 0.0
    if r > 0:
        log_shape += r * math.log(p)
    if miss > 0:
        log_shape += miss * math.log1p(-p)
    return math.exp(log_norm + log_shape)


def posterior_cdf(p: float, n_correct: int, n_trials: int) -> float:
    """Posterior probability that the success probability is below p:
    the regularized incomplete beta I_p(R + 1, N - R + 1)."""
    _check_counts(n_correct, n_trials)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    return specfun.reg_inc_beta(n_correct + 1.0, n_trials - n_correct + 1.0, p)


@lru_cache(maxsize=None)
def credible_halfwidth(n_correct: int, n_trials: int, level: float = 0.95) -> float:
    """Symmetric half-width mu around R/N holding ``level`` posterior mass.

    Solves C(min(R/N + mu, 1)) - C(max(R/N - mu, 0)) = level by bisection
    to absolute tolerance 1e-10, where C is posterior_cdf.  The clipping
    keeps the interval inside [0, 1]; it always contains R/N.
    """
    _check_counts(n_correct, n_trials, minimum_trials=1)
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    center = n_correct / n_trials

    def mass(mu):
        hi = posterior_cdf(min(center + mu, 1.0), n_correct, n_trials)
        lo = posterior_cdf(max(center - mu, 0.0), n_correct, n_trials)
        return hi - lo

    lo, hi = 0.0, 1.0
    while hi - lo > _HALFWIDTH_TOL:
        mid = 0.5 * (lo + hi)
        if mass(mid) >= level:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def chi_squared(points, params: ErrorModelParams) -> float:
    """Mean squared residual in units of the 95% half-widths."""
    pts = list(points)
    if not pts:
        raise DomainError("chi_squared needs at least one point")
    total = 0.0
    for pt in pts:
        if pt.ci_halfwidth <= 0.0:
            raise DomainError(f"point at c={pt.c!r} has non-positive half-width")
        residual = pt.mean_accuracy - accuracy(params, pt.c)
        total += (residual / pt.ci_halfwidth) ** 2
    return total / len(pts)


@dataclass(frozen=True)
class FitResult:
    """Best-fit parameters with bootstrap uncertainties.

    se_* fields are one-standard-deviation bootstrap spreads; None when the
    bootstrap was skipped (bootstrap_replicates == 0) or the parameter was
    held fixed (se_alpha).  grid_seeds lists coarse-grid starting cells
    whose chi2 came within 1% of the best cell, as (r, q, alpha, chi2)
    rows; more than one row signals a shallow valley in the objective.
    """

    params: ErrorModelParams
    se_r: float | None
    se_q: float | None
    se_alpha: float | None
    chi_squared: float
    n_points: int
    converged: bool
    bootstrap_replicates: int
    degenerate: bool
    grid_seeds: tuple

    def __post_init__(self):
        if self.chi_squared < 0.0:
            raise DomainError("chi_squared must be non-negative")
        for name in ("se_r", "se_q", "se_alpha"):
            value = getattr(self, name)
            if value is not None and value < 0.0:
                raise DomainError(f"{name} must be non-negative, got {value!r}")


# Nelder-Mead with standard coefficients; deterministic, no restarts.
_NM_MAX_ITER_PER_DIM = 400


def _nelder_mead(func, x0, step=0.5, xatol=1e-8):
    """Minimize func over R^n. Returns (x, fx, converged).

    Stops when the simplex collapses below xatol in every coordinate
    (parameter change), or after a fixed iteration budget (converged
    False)."""
    n = len(x0)
    simplex = [list(x0)]
    for i in range(n):
        vertex = list(x0)
        vertex[i] += step
        simplex.append(vertex)
    values = [func(v) for v in simplex]
    max_iter = _NM_MAX_ITER_PER_DIM * n

    def sort_simplex():
        order = sorted(range(n + 1), key=lambda k: values[k])
        return [simplex[k] for k in order], [values[k] for k in order]

    simplex, values = sort_simplex()
    for _ in range(max_iter):
        spread = max(
            abs(simplex[j][i] - simplex[0][i])
            for j in range(1, n + 1)
            for i in range(n)
        )
        if spread < xatol:
            return simplex[0], values[0], True
        centroid = [
            sum(simplex[j][i] for j in range(n)) / n for i in range(n)
        ]
        worst = simplex[n]
        reflected = [2.0 * centroid[i] - worst[i] for i in range(n)]
        f_ref = func(reflected)
        if f_ref < values[0]:
            expanded = [3.0 * centroid[i] - 2.0 * worst[i] for i in range(n)]
            f_exp = func(expanded)
            if f_exp < f_ref:
                simplex[n], values[n] = expanded, f_exp
            else:
                simplex[n], values[n] = reflected, f_ref
        elif f_ref < values[n - 1]:
            simplex[n], values[n] = reflected, f_ref
        else:
            if f_ref < values[n]:
                contracted = [
                    1.5 * centroid[i] - 0.5 * worst[i] for i in range(n)
                ]
            else:
                contracted = [
                    0.5 * centroid[i] + 0.5 * worst[i] for i in range(n)
                ]
            f_con = func(contracted)
            if f_con < min(f_ref, values[n]):
                simplex[n], values[n] = contracted, f_con
            else:
                best = simplex[0]
                for j in range(1, n + 1):
                    simplex[j] = [
                        0.5 * (simplex[j][i] + best[i]) for i in range(n)
                    ]
                    values[j] = func(simplex[j])
        simplex, values = sort_simplex()
    return simplex[0], values[0], False


# log-space guards keeping the optimizer in a numerically sane region
_LN_R_RANGE = (-60.0, 10.0)
_LN_Q_RANGE = (-20.0, 20.0)
_LN_ALPHA_RANGE = (-5.0, 5.0)

_GRID_R_DECADES = (-6.0, -1.0, 11)
_GRID_Q_DECADES = (-1.0, 2.0, 13)
_GRID_ALPHA = (0.25, 0.5, 1.0, 2.0, 4.0)


def _log_spaced(lo_exp, hi_exp, count):
    stride = (hi_exp - lo_exp) / (count - 1)
    return [10.0 ** (lo_exp + stride * i) for i in range(count)]


def _objective(points, alpha_fixed):
    lo_r, hi_r = _LN_R_RANGE
    lo_q, hi_q = _LN_Q_RANGE
    lo_a, hi_a = _LN_ALPHA_RANGE

    def func(x):
        if not (lo_r <= x[0] <= hi_r and lo_q <= x[1] <= hi_q):
            return math.inf
        if alpha_fixed is None and not lo_a <= x[2] <= hi_a:
            return math.inf
        alpha = alpha_fixed if alpha_fixed is not None else math.exp(x[2])
        params = ErrorModelParams(
            r=math.exp(x[0]), q=math.exp(x[1]), alpha=alpha
        )
        try:
            return chi_squared(points, params)
        except ConvergenceError:
            return math.inf

    return func


def _vector_to_params(x, alpha_fixed):
    alpha = alpha_fixed if alpha_fixed is not None else math.exp(x[2])
    return ErrorModelParams(r=math.exp(x[0]), q=math.exp(x[1]), alpha=alpha)


def _seed_grid(alpha_fixed):
    r_values = _log_spaced(*_GRID_R_DECADES)
    q_values = _log_spaced(*_GRID_Q_DECADES)
    alphas = (None,) if alpha_fixed is not None else _GRID_ALPHA
    cells = []
    for r in r_values:
        for q in q_values:
            for a in alphas:
                x = [math.log(r), math.log(q)]
                if a is not None:
                    x.append(math.log(a))
                cells.append(x)
    return cells


def _fit_once(points, alpha_fixed, n_descents):
    """Grid seeding plus simplex descent. Returns the best descent
    outcome and the near-degenerate grid diagnostics."""
    func = _objective(points, alpha_fixed)
    cells = _seed_grid(alpha_fixed)
    scored = sorted(
        ((func(x), i) for i, x in enumerate(cells)), key=lambda t: t[0]
    )
    best_cell_chi2 = scored[0][0]
    diagnostics = []
    if math.isfinite(best_cell_chi2):
        threshold = best_cell_chi2 * 1.01 + 1e-15
        for chi2, i in scored:
            if chi2 > threshold:
                break
            params = _vector_to_params(cells[i], alpha_fixed)
            diagnostics.append((params.r, params.q, params.alpha, chi2))
    best = None
    for chi2, i in scored[:n_descents]:
        if not math.isfinite(chi2):
            continue
        x, fx, converged = _nelder_mead(func, cells[i])
        if best is None or fx < best[1]:
            best = (x, fx, converged)
    if best is None:
        raise DomainError("no usable starting point: objective not finite anywhere on the seed grid")
    return best, tuple(diagnostics)


def fit(
    points,
    *,
    alpha: float | None = 1.0,
    seed: int = 0,
    bootstrap_replicates: int = 200,
) -> FitResult:
    """Fit the accuracy law to measured points by minimizing chi_squared.

    alpha: fix the exponent at this value, or None to fit it as a third
    free parameter.  Needs at least 3 points with distinct c and positive
    half-widths.  Uncertainties come from a parametric bootstrap with
    ``bootstrap_replicates`` refits (at least 200, or 0 to skip); the
    whole procedure is deterministic given ``seed``.
    """
    pts = list(points)
    if len(pts) < 3:
        raise DomainError(f"fit needs at least 3 points, got {len(pts)}")
    if len({pt.c for pt in pts}) < 3:
        raise DomainError("fit needs at least 3 distinct c values")
    for pt in pts:
        if pt.ci_halfwidth <= 0.0:
            raise DomainError(f"point at c={pt.c!r} has non-positive half-width")
    if alpha is not None:
        _ = ErrorModelParams(r=1.0, q=1.0, alpha=alpha)  # validate
    if bootstrap_replicates != 0 and bootstrap_replicates < 200:
        raise DomainError(
            "bootstrap_replicates must be 0 (skip) or >= 200, "
            f"got {bootstrap_replicates!r}"
        )

    have_counts = all(pt.n_trials is not None for pt in pts)
    degenerate = have_counts and (
        all(pt.n_correct == 0 for pt in pts)
        or all(pt.n_correct == pt.n_trials for pt in pts)
    )

    (x, chi2, converged), diagnostics = _fit_once(pts, alpha, n_descents=3)
    params = _vector_to_params(x, alpha)

    se_r = se_q = se_alpha = None
    used = 0
    if bootstrap_replicates > 0 and not have_counts:
        raise DomainError(
            "bootstrap needs trial counts on every point; "
            "pass bootstrap_replicates=0 for synthetic points"
        )
    if bootstrap_replicates > 0:
        fitted = [accuracy(params, pt.c) for pt in pts]
        level_cache = {}
        samples = []
        for rep in range(bootstrap_replicates):
            rep_key = rng.derive_key(seed, rep)
            rep_points = []
            for idx, pt in enumerate(pts):
                r_star = rng.binomial(
                    rng.derive_key(rep_key, idx), pt.n_trials, fitted[idx]
                )
                cache_key = (r_star, pt.n_trials)
                if cache_key not in level_cache:
                    level_cache[cache_key] = credible_halfwidth(
                        r_star, pt.n_trials
                    )
                rep_points.append(
                    AccuracyPoint(
                        c=pt.c,
                        n_trials=pt.n_trials,
                        n_correct=r_star,
                        mean_accuracy=r_star / pt.n_trials,
                        ci_halfwidth=level_cache[cache_key],
                    )
                )
            try:
                (bx, _, b_conv), _ = _fit_once(rep_points, alpha, n_descents=1)
            except DomainError:
                continue
            if not b_conv:
                continue
            samples.append(_vector_to_params(bx, alpha))
        used = len(samples)
        if used >= 2:
            se_r = _sample_sd([p.r for p in samples])
            se_q = _sample_sd([p.q for p in samples])
            if alpha is None:
                se_alpha = _sample_sd([p.alpha for p in samples])

    return FitResult(
        params=params,
        se_r=se_r,
        se_q=se_q,
        se_alpha=se_alpha,
        chi_squared=chi2,
        n_points=len(pts),
        converged=converged,
        bootstrap_replicates=used,
        degenerate=degenerate,
        grid_seeds=diagnostics,
    )


def _sample_sd(values):
    n = len(values)
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
