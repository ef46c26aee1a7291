"""The accuracy law, its asymptotic forms, and Monte Carlo validators.

The model: a task of complexity c is answered correctly when a q-dimensional
Gaussian error vector with per-coordinate variance sigma^2 c^{2 alpha} stays
inside a ball of radius tau.  With the rate parameter r = q sigma^2 / tau^2
the success probability is

    accuracy(c) = P(q / 2,  q / (2 r c^{2 alpha}))

where P is the regularized lower incomplete gamma function.  q plays the
role of an effective number of independent error directions and need not be
an integer outside the simulator; r is the elementary noise rate.

The law is invariant under c -> lambda c combined with
r -> lambda^{-2 alpha} r, so only the product r c^{2 alpha} is physical.
"""

import math
from dataclasses import dataclass

import numpy as np

from taskcurve import _kernels, rng, specfun
from taskcurve.exceptions import DomainError

__all__ = [
    "ErrorModelParams",
    "MonteCarloConfig",
    "ScalingDemoConfig",
    "ScalingDemoResult",
    "accuracy",
    "accuracy_large_c",
    "accuracy_small_c",
    "naive_accuracy",
    "rescale",
    "mc_accuracy",
    "scaling_demo",
]


def _positive_finite(name, value):
    if not (math.isfinite(value) and value > 0.0):
        raise DomainError(f"{name} must be finite and positive, got {value!r}")


@dataclass(frozen=True)
class ErrorModelParams:
    """Parameters of the accuracy law.

    r: elementary noise rate (> 0).
    q: effective number of error directions (> 0, real valued).
    alpha: variance growth exponent (> 0, default 1).
    """

    r: float
    q: float
    alpha: float = 1.0

    def __post_init__(self):
        _positive_finite("r", self.r)
        _positive_finite("q", self.q)
        _positive_finite("alpha", self.alpha)


def _gamma_argument(params: ErrorModelParams, c: float) -> float:
    """y = q / (2 r c^{2 alpha}), with overflow mapped to +inf."""
    if not (math.isfinite(c) and c > 0.0):
        raise DomainError(f"c must be finite and positive, got {c!r}")
    denom = 2.0 * params.r * math.pow(c, 2.0 * params.alpha)
    if denom == 0.0 or denom == math.inf:
        return math.inf if denom == 0.0 else 0.0
    return params.q / denom


def accuracy(params: ErrorModelParams, c: float) -> float:
    """Success probability at complexity c: P(q/2, q / (2 r c^{2 alpha}))."""
    y = _gamma_argument(params, c)
    if y == math.inf:
        # so deep in the plateau that the double-precision answer is 1
        return 1.0
    return specfun.reg_lower_gamma(params.q / 2.0, y)


def accuracy_large_c(params: ErrorModelParams, c: float) -> float:
    """Leading power-law decay u^{q/2} / Gamma(q/2 + 1) with
    u = q / (2 r c^{2 alpha}).  Only valid deep in the tail; requires
    u < 0.1."""
    u = _gamma_argument(params, c)
    if not u < 0.1:
        raise DomainError(
            f"accuracy_large_c needs q/(2 r c^(2 alpha)) < 0.1, got {u!r}"
        )
    s = params.q / 2.0
    return math.exp(s * math.log(u) - specfun.ln_gamma(s + 1.0))


def accuracy_small_c(params: ErrorModelParams, c: float) -> float:
    """Plateau approximation 1 - y^{q/2 - 1} e^{-y} / Gamma(q/2) with
    y = q / (2 r c^{2 alpha}).  Requires y > 10."""
    y = _gamma_argument(params, c)
    if not y > 10.0:
        raise DomainError(
            f"accuracy_small_c needs q/(2 r c^(2 alpha)) > 10, got {y!r}"
        )
    if y == math.inf:
        return 1.0
    s = params.q / 2.0
    deficit = math.exp((s - 1.0) * math.log(y) - y - specfun.ln_gamma(s))
    return 1.0 - deficit


def naive_accuracy(rate: float, l_out: int) -> float:
    """Accuracy if each of l_out output tokens failed independently at a
    fixed rate: (1 - rate)^{l_out}."""
    if not (math.isfinite(rate) and 0.0 <= rate <= 1.0):
        raise DomainError(f"rate must lie in [0, 1], got {rate!r}")
    if l_out < 0:
        raise DomainError(f"l_out must be a non-negative count, got {l_out!r}")
    return (1.0 - rate) ** l_out


def rescale(params: ErrorModelParams, lam: float) -> ErrorModelParams:
    """Parameters after measuring complexity in units of lam:
    r -> lam^{-2 alpha} r, q and alpha unchanged.  accuracy is invariant
    under applying this together with c -> lam c."""
    _positive_finite("lam", lam)
    return ErrorModelParams(
        r=params.r * math.pow(lam, -2.0 * params.alpha),
        q=params.q,
        alpha=params.alpha,
    )


@dataclass(frozen=True)
class MonteCarloConfig:
    """Direct simulation of the threshold-crossing picture.

    Draws q-dimensional Gaussian error vectors with per-coordinate variance
    sigma^2 c^{2 alpha} and counts how often the squared norm stays below
    tau^2.  Here q must be an actual dimension count, unlike the analytic
    law where it interpolates.
    """

    sigma: float
    tau: float
    q: int
    alpha: float
    samples: int
    seed: int

    def __post_init__(self):
        _positive_finite("sigma", self.sigma)
        _positive_finite("tau", self.tau)
        _positive_finite("alpha", self.alpha)
        if not isinstance(self.q, int) or self.q < 1:
            raise DomainError(f"q must be an integer >= 1, got {self.q!r}")
        if self.samples < 1000:
            raise DomainError(
                f"samples must be at least 1000, got {self.samples!r}"
            )
        rate = self.q * self.sigma ** 2 / self.tau ** 2
        if not (math.isfinite(rate) and rate > 0.0):
            raise DomainError(f"implied rate q sigma^2/tau^2 = {rate!r} invalid")

    @classmethod
    def from_rate(cls, r, q, alpha, samples, seed, tau=1.0):
        """Config with sigma chosen so that q sigma^2 / tau^2 == r.

        Only the ratio sigma/tau matters, so tau defaults to 1.
        """
        _positive_finite("r", r)
        if not isinstance(q, int) or q < 1:
            raise DomainError(f"q must be an integer >= 1, got {q!r}")
        return cls(
            sigma=tau * math.sqrt(r / q),
            tau=tau,
            q=q,
            alpha=alpha,
            samples=samples,
            seed=seed,
        )

    @property
    def rate(self) -> float:
        return self.q * self.sigma ** 2 / self.tau ** 2

    def params(self) -> ErrorModelParams:
        """Analytic counterpart of this simulation."""
        return ErrorModelParams(r=self.rate, q=float(self.q), alpha=self.alpha)


def mc_accuracy(cfg: MonteCarloConfig, c: float) -> float:
    """Simulated accuracy at complexity c; deterministic given cfg.seed.

    Sample i consumes gaussians [i q, (i + 1) q) of the stream keyed by
    cfg.seed, so results are independent of evaluation chunking.
    """
    if not (math.isfinite(c) and c > 0.0):
        raise DomainError(f"c must be finite and positive, got {c!r}")
    variance = cfg.sigma ** 2 * math.pow(c, 2.0 * cfg.alpha)
    hits = _kernels.count_below_threshold(
        cfg.seed, cfg.samples, cfg.q, variance, cfg.tau ** 2
    )
    return hits / cfg.samples


@dataclass(frozen=True)
class ScalingDemoConfig:
    """Experiment showing how correlation changes variance scaling.

    Each trial sums c per-token noise terms.  In the uncorrelated regime
    every token gets a fresh Gaussian draw, so the sum's variance grows
    like c (alpha = 1/2).  In the correlated regime each token belongs to
    one of ``token_classes`` classes and all tokens of a class share a
    single draw per trial; with one class the sum is c times one draw and
    the variance grows like c^2 (alpha = 1).
    """

    token_classes: int
    context_lengths: tuple
    trials_per_length: int
    per_term_noise: float
    seed: int

    def __post_init__(self):
        if self.token_classes < 1:
            raise DomainError(
                f"token_classes must be >= 1, got {self.token_classes!r}"
            )
        lengths = tuple(self.context_lengths)
        object.__setattr__(self, "context_lengths", lengths)
        if len(lengths) < 4:
            raise DomainError(
                f"need at least 4 context lengths, got {len(lengths)}"
            )
        if any(lc < 1 for lc in lengths):
            raise DomainError(f"context lengths must be >= 1, got {lengths!r}")
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise DomainError(
                f"context lengths must be strictly increasing, got {lengths!r}"
            )
        if self.trials_per_length < 2:
            raise DomainError(
                f"trials_per_length must be >= 2, got {self.trials_per_length!r}"
            )
        _positive_finite("per_term_noise", self.per_term_noise)


@dataclass(frozen=True)
class ScalingDemoResult:
    context_lengths: tuple
    uncorrelated_variances: tuple
    correlated_variances: tuple
    alpha_uncorrelated: float
    alpha_correlated: float


def scaling_demo(cfg: ScalingDemoConfig) -> ScalingDemoResult:
    """Run both regimes and regress log(variance of sum) on log(c).

    Returns slope/2 per regime as the fitted variance exponent alpha-hat.
    Both regimes at a given length share the same noise stream, so for
    length 1 with a single token class they produce literally identical
    sums.
    """
    sigma = cfg.per_term_noise
    n_cls = cfg.token_classes
    trials = cfg.trials_per_length
    var_u = []
    var_c = []
    for li, c in enumerate(cfg.context_lengths):
        noise_key = rng.derive_key(cfg.seed, 2 * li)
        class_key = rng.derive_key(cfg.seed, 2 * li + 1)

        fresh = rng.gaussians(noise_key, 0, trials * c).reshape(trials, c)
        sums_u = sigma * fresh.sum(axis=1)
        var_u.append(float(np.var(sums_u, ddof=1)))

        shared = rng.gaussians(noise_key, 0, trials * n_cls)
        shared = shared.reshape(trials, n_cls)
        u = rng.uniforms(class_key, 0, trials * c).reshape(trials, c)
        classes = np.minimum((u * n_cls).astype(np.int64), n_cls - 1)
        counts = np.empty((trials, n_cls), dtype=np.float64)
        for k in range(n_cls):
            counts[:, k] = np.count_nonzero(classes == k, axis=1)
        sums_c = sigma * (counts * shared).sum(axis=1)
        var_c.append(float(np.var(sums_c, ddof=1)))

    log_c = np.log(np.asarray(cfg.context_lengths, dtype=np.float64))
    slope_u = float(np.polyfit(log_c, np.log(var_u), 1)[0])
    slope_c = float(np.polyfit(log_c, np.log(var_c), 1)[0])
    return ScalingDemoResult(
        context_lengths=cfg.context_lengths,
        uncorrelated_variances=tuple(var_u),
        correlated_variances=tuple(var_c),
        alpha_uncorrelated=slope_u / 2.0,
        alpha_correlated=slope_c / 2.0,
    )
