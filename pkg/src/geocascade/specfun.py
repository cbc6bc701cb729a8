"""Series and distribution functions behind the load-moment formulas.

The two series here are entire functions related to the exponential
integral:

    expint_series(x)  = sum_{k>=1} x^k / (k * k!)   = integral_0^x (e^t - 1)/t dt
    expint_series2(x) = sum_{k>=1} x^k / (k^2 * k!) = integral_0^x expint_series(t)/t dt

They give the conditional inverse moments of a positive Poisson count, which
is how the share of a failed node's load reaching one particular neighbor is
averaged.
"""

import math

from .errors import ParameterDomainError

# Stop summing once a term drops below this fraction of the partial sum.
_SERIES_REL_TOL = 1e-16
# Terms grow until k ~ x and only then decay super-exponentially, so the
# cap must clear the largest argument the series route handles (700 plus
# a few hundred terms of decay); it only guards pathological input.
_SERIES_MAX_TERMS = 1300
# Above this the e^x-scale intermediates overflow; switch to the 1/x
# asymptotic expansion of the conditional moments instead.
_ASYMPTOTIC_CUTOFF = 700.0


def expint_series(x):
    """sum_{k>=1} x^k / (k * k!), for x > 0."""
    if x <= 0:
        raise ParameterDomainError(f"series argument must be positive, got {x}")
    term = x  # k = 1
    total = x
    for k in range(2, _SERIES_MAX_TERMS + 1):
        term *= x / k
        total += term / k
        if term / k < _SERIES_REL_TOL * total:
            break
    return total


def expint_series2(x):
    """sum_{k>=1} x^k / (k^2 * k!), for x > 0."""
    if x <= 0:
        raise ParameterDomainError(f"series argument must be positive, got {x}")
    term = x
    total = x
    for k in range(2, _SERIES_MAX_TERMS + 1):
        term *= x / k
        contrib = term / (k * k)
        total += contrib
        if contrib < _SERIES_REL_TOL * total:
            break
    return total


def _asymptotic_inv_moment(lam, coeffs):
    # a few terms of the divergent 1/lam expansion; terms shrink while
    # j < lam, which holds comfortably at the cutoff
    acc = 0.0
    for j, c in enumerate(coeffs):
        acc += c / lam ** j
    return acc


def inv_moment1(lam):
    """E[1/N | N > 0] for N ~ Poisson(lam).

    Equals exp(-lam) * expint_series(lam) / (1 - exp(-lam)); lies in (0, 1]
    and decreases in lam.
    """
    if lam <= 0:
        raise ParameterDomainError(f"Poisson mean must be positive, got {lam}")
    if lam > _ASYMPTOTIC_CUTOFF:
        # e^{-lam} g(lam) ~ (1/lam)(1 + 1/lam + 2/lam^2 + ...), the j! series
        return _asymptotic_inv_moment(lam, (1.0, 1.0, 2.0, 6.0, 24.0, 120.0)) / lam
    if lam < 1e-6:
        # expm1 keeps the tiny-lam ratio accurate
        return math.exp(-lam) * expint_series(lam) / -math.expm1(-lam)
    return math.exp(-lam) * expint_series(lam) / (1.0 - math.exp(-lam))


def inv_moment2(lam):
    """E[1/N^2 | N > 0] for N ~ Poisson(lam).

    Equals exp(-lam) * expint_series2(lam) / (1 - exp(-lam)); lies in (0, 1]
    and is at least inv_moment1(lam)**2.
    """
    if lam <= 0:
        raise ParameterDomainError(f"Poisson mean must be positive, got {lam}")
    if lam > _ASYMPTOTIC_CUTOFF:
        # coefficients follow c_j = j! + (j+1) c_{j-1}
        return _asymptotic_inv_moment(lam, (1.0, 3.0, 11.0, 50.0, 274.0, 1764.0)) / (
            lam * lam
        )
    if lam < 1e-6:
        return math.exp(-lam) * expint_series2(lam) / -math.expm1(-lam)
    return math.exp(-lam) * expint_series2(lam) / (1.0 - math.exp(-lam))


def normal_cdf(z):
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))
