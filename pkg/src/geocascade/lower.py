"""Lower bound on the mean failure ratio, and its large-density limit.

The bound considers the most favorable absorption scenario: first-ring
nodes jointly own slack (tolerance - 1) per node, and the attack's load is
spread over all of them. If the attacked count already exceeds that joint
slack, even full cooperation cannot stop the spread, and the ring-mean
growth pattern keeps it that way ring after ring. The probability of that
event lower-bounds the mean failure ratio.
"""

import math
from dataclasses import dataclass

from .errors import ParameterDomainError
from .rgg import ring_mean
from .specfun import normal_cdf

# The bound's hypothesis: tolerance < 3/2 + attack_radius/conn_radius.
_VALIDITY_MARGIN = 1.5


@dataclass(frozen=True)
class RingSequence:
    """Mean node counts of the attack disk and the rings around it."""

    attack_mean: float
    ring_means: tuple
    radius_ratio: float

    @classmethod
    def from_config(cls, cfg, depth):
        if depth < 1:
            raise ParameterDomainError(f"depth must be >= 1, got {depth}")
        return cls(
            attack_mean=cfg.mean_attacked,
            ring_means=tuple(ring_mean(cfg, i) for i in range(1, depth + 1)),
            radius_ratio=cfg.radius_ratio,
        )


@dataclass(frozen=True)
class LowerBoundResult:
    """Bound value plus whether the theorem behind it applies at all."""

    value: float
    applicable: bool
    k_max: int = 0


def validity_limit(radius_ratio):
    """Largest tolerance the lower bound covers: 3/2 + attack/conn ratio."""
    return _VALIDITY_MARGIN + radius_ratio


def lower_bound(alpha, cfg, k_max=None):
    """Lower bound on the mean failure ratio at tolerance alpha.

    Sums, over the Poisson-distributed attacked count k, the (Gaussian
    approximated) probability that the first ring cannot absorb k even
    with full cooperation. Only valid for alpha below validity_limit(q);
    outside that the result is 0 with applicable=False. The sum is
    truncated at k_max (default three times the attacked mean, whose
    residual truncation_residual bounds).
    """
    if alpha <= 1:
        raise ParameterDomainError(f"tolerance must exceed 1, got {alpha}")
    a_mean = cfg.mean_attacked
    if k_max is None:
        k_max = max(int(3 * a_mean), 1)
    if alpha >= validity_limit(cfg.radius_ratio):
        return LowerBoundResult(0.0, False, k_max)
    ring1 = ring_mean(cfg, 1)
    slack = alpha - 1.0
    log_a = math.log(a_mean)
    total = 0.0
    for k in range(1, k_max + 1):
        # Poisson weight in log space: a_mean can be in the hundreds
        log_w = -a_mean + k * log_a - math.lgamma(k + 1)
        z = (k / slack - ring1) / math.sqrt(ring1)
        total += normal_cdf(z) * math.exp(log_w)
    return LowerBoundResult(min(total, 1.0), True, k_max)


def truncation_residual(a_mean, k_max):
    """Poisson tail bound exp(-m) (e*m)^x / x^x at x = k_max.

    Bounds the weight of the terms dropped by the truncated sum; only
    valid at or above the mean.
    """
    if a_mean <= 0:
        raise ParameterDomainError(f"mean must be positive, got {a_mean}")
    if k_max < a_mean:
        raise ParameterDomainError(
            f"tail point must not be below the mean, got {k_max} < {a_mean}"
        )
    x = float(k_max)
    return math.exp(-a_mean + x * (1.0 + math.log(a_mean) - math.log(x)))


def critical_tolerance_lower(radius_ratio):
    """Tolerance below which the dense-network bound forces total failure.

    1 + q^2/(1+2q) for q = attack_radius/conn_radius: the attacked mean
    exceeds the first ring's joint slack exactly below this point.
    Strictly increasing and sublinear in q, and always below
    validity_limit(q).
    """
    if radius_ratio <= 0:
        raise ParameterDomainError(f"radius ratio must be positive, got {radius_ratio}")
    q = radius_ratio
    return 1.0 + q * q / (1.0 + 2.0 * q)


def ring_inequalities(cfg, alpha, depth):
    """Numeric report of the ring-mean inequalities the bound rests on.

    Returns a list of check records (name, index, applicable, holds,
    detail). A record is applicable only when its hypothesis holds for
    (alpha, q); the chain checks themselves are unconditional. Consumed by
    the validate command and the property tests, not by lower_bound.
    """
    if depth < 2:
        raise ParameterDomainError(f"depth must be >= 2, got {depth}")
    seq = RingSequence.from_config(cfg, depth + 1)
    q = seq.radius_ratio
    slack = alpha - 1.0
    checks = []

    first_ratio_ok = slack < 0.5 + q
    checks.append(
        dict(
            name="first-ring-ratio",
            index=1,
            applicable=first_ratio_ok,
            holds=(
                seq.ring_means[1] / seq.ring_means[0] < alpha / slack
                if first_ratio_ok and slack > 0
                else None
            ),
            detail=f"ring2/ring1={seq.ring_means[1] / seq.ring_means[0]:.6f}",
        )
    )

    ratios = [b / a for a, b in zip(seq.ring_means, seq.ring_means[1:])]
    for i in range(1, len(ratios)):
        checks.append(
            dict(
                name="ring-ratio-chain",
                index=i + 1,
                applicable=True,
                holds=ratios[i] <= ratios[i - 1] + 1e-12,
                detail=f"ratio[{i + 1}]={ratios[i]:.6f} ratio[{i}]={ratios[i - 1]:.6f}",
            )
        )

    below_lower_threshold = alpha < critical_tolerance_lower(q)
    checks.append(
        dict(
            name="first-ring-absorption",
            index=1,
            applicable=below_lower_threshold,
            holds=(
                seq.ring_means[0] * slack < seq.attack_mean
                if below_lower_threshold
                else None
            ),
            detail=f"ring1*slack={seq.ring_means[0] * slack:.4f} attacked={seq.attack_mean:.4f}",
        )
    )

    cumulative = seq.attack_mean
    for i in range(1, depth + 1):
        cumulative += seq.ring_means[i - 1]
        checks.append(
            dict(
                name="cumulative-absorption",
                index=i,
                applicable=below_lower_threshold,
                holds=(
                    cumulative > seq.ring_means[i] * slack
                    if below_lower_threshold
                    else None
                ),
                detail=f"cumulative={cumulative:.4f} next*slack={seq.ring_means[i] * slack:.4f}",
            )
        )
    return checks
