"""Special functions used by the accuracy model and the statistics layer.

Thin validated wrappers over the kernel backend.  The numerical methods:

* ``ln_gamma`` -- Lanczos approximation (g = 7, 9 coefficients), with the
  recurrence ln Gamma(x) = ln Gamma(x + 1) - ln x below x = 0.5.
* ``reg_lower_gamma`` -- power series for x < s + 1, otherwise a modified
  Lentz continued fraction for the upper function, complemented.
* ``reg_inc_beta`` -- modified Lentz continued fraction, evaluated on the
  fast-converging side of x = (a + 1)/(a + b + 2) via the symmetry
  I_x(a, b) = 1 - I_{1-x}(b, a).

Iterative routines stop when the relative update drops below
``config.rel_tolerance`` and raise ``ConvergenceError`` if that does not
happen within ``config.max_iterations``; they never return a partial
result.  Outputs of the two regularized functions are clamped to [0, 1].
"""

import math
from dataclasses import dataclass

from taskcurve import _kernels
from taskcurve.exceptions import DomainError


@dataclass(frozen=True)
class SpecFunConfig:
    """Convergence policy for the iterative special functions."""

    rel_tolerance: float = 1e-12
    max_iterations: int = 500

    def __post_init__(self):
        if not (0.0 < self.rel_tolerance < 1.0):
            raise DomainError(
                f"rel_tolerance must lie in (0, 1), got {self.rel_tolerance!r}"
            )
        if self.max_iterations < 1:
            raise DomainError(
                f"max_iterations must be positive, got {self.max_iterations!r}"
            )


DEFAULT_CONFIG = SpecFunConfig()


def _require_finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


def ln_gamma(x: float) -> float:
    """ln Gamma(x) for finite x > 0."""
    _require_finite("x", x)
    if x <= 0.0:
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    return _kernels.ln_gamma(x)


def reg_lower_gamma(s: float, x: float, config: SpecFunConfig = DEFAULT_CONFIG) -> float:
    """Regularized lower incomplete gamma P(s, x) in [0, 1].

    Requires finite s > 0 and finite x >= 0.
    """
    _require_finite("s", s)
    _require_finite("x", x)
    if s <= 0.0:
        raise DomainError(f"reg_lower_gamma requires s > 0, got {s!r}")
    if x < 0.0:
        raise DomainError(f"reg_lower_gamma requires x >= 0, got {x!r}")
    return _kernels.reg_lower_gamma(s, x, config.rel_tolerance, config.max_iterations)


def reg_inc_beta(a: float, b: float, x: float, config: SpecFunConfig = DEFAULT_CONFIG) -> float:
    """Regularized incomplete beta I_x(a, b) in [0, 1].

    Requires finite a > 0, b > 0 and x in [0, 1].
    """
    _require_finite("a", a)
    _require_finite("b", b)
    _require_finite("x", x)
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"reg_inc_beta requires a, b > 0, got a={a!r}, b={b!r}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"reg_inc_beta requires 0 <= x <= 1, got {x!r}")
    return _kernels.reg_inc_beta(a, b, x, config.rel_tolerance, config.max_iterations)
