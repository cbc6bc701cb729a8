"""Upper bound on the mean failure ratio, and its large-density limit.

The chain of quantities, all for a node at distance ``node_dist`` from the
attack center:

  share_mean / share_sqmean
      moments of the load share one attacked neighbor at radius r sheds to
      the node (a failed node splits equally over its Poisson-many
      neighbors outside the attack disk).
  load_stats
      mean and variance of the total load the node receives in the first
      redistribution, mixing the shares over the node's attacked-neighbor
      lens.
  failure_prob / first_ring_survival_prob
      Gaussian approximation of the received load; the survival
      probability averages it over a uniformly placed first-ring node.
  upper_bound
      no cascade can start unless some first-ring node overloads, which
      caps the mean failure ratio.

As the density grows the received load concentrates on a deterministic
profile; ``asymptotic_load`` evaluates it and ``critical_tolerance_upper``
turns it into the step-transition threshold.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import geometry, specfun
from .errors import ParameterDomainError

_INNER_TOL = 1e-11  # inner load-moment quadratures
_OUTER_TOL = 1e-6  # survival-probability quadrature
_PROFILE_GRID = 513


@dataclass(frozen=True)
class LoadStats:
    """First-redistribution load moments for a node at ``node_dist``."""

    mean: float
    variance: float
    node_dist: float

    @property
    def sigma(self):
        return math.sqrt(max(self.variance, 0.0))


def _poisson_area(cfg, r):
    """Mean outside-neighbor count of an attacked node at radius r."""
    return cfg.density * geometry.exterior_area(
        r, cfg.conn_radius, cfg.attack_radius, allow_degenerate=True
    )


def share_mean(r, cfg):
    """Mean load share one attacked node at radius r sheds to a neighbor
    outside the attack disk."""
    area = geometry.exterior_area(r, cfg.conn_radius, cfg.attack_radius)
    return specfun.inv_moment1(cfg.density * area)


def share_sqmean(r, cfg):
    """Second moment of the same load share."""
    area = geometry.exterior_area(r, cfg.conn_radius, cfg.attack_radius)
    return specfun.inv_moment2(cfg.density * area)


def exact_share_mean(r, cfg):
    """Exact mean share reaching one fixed recipient.

    The recipient is itself one of the shedding node's outside neighbors,
    so the share is 1/(1 + M) with M the count of the *other* outside
    neighbors, Poisson with mean density * exterior_area. Averaging gives
    (1 - exp(-m))/m, which also handles a vanishing outside area (the fixed
    recipient then collects the whole load). The conditioned-count moments
    (share_mean) overstate this at moderate densities; both agree in the
    dense limit.
    """
    m = _poisson_area(cfg, r)
    return -math.expm1(-m) / m if m > 1e-12 else 1.0


def exact_share_sqmean(r, cfg):
    """Exact second moment of the same share: E[1/(1+M)^2]."""
    m = _poisson_area(cfg, r)
    return math.exp(-m) * specfun.expint_series(m) / m if m > 1e-12 else 1.0


def _share_mean_clipped(lam_u):
    # conditional moments tend to 1 as the neighbor mean vanishes; the
    # integrands below may touch that endpoint
    return 1.0 if lam_u < 1e-12 else specfun.inv_moment1(lam_u)


def _share_sqmean_clipped(lam_u):
    return 1.0 if lam_u < 1e-12 else specfun.inv_moment2(lam_u)


def _exact_share_mean_clipped(lam_u):
    return -math.expm1(-lam_u) / lam_u if lam_u > 1e-12 else 1.0


def _exact_share_sqmean_clipped(lam_u):
    return (
        math.exp(-lam_u) * specfun.expint_series(lam_u) / lam_u
        if lam_u > 1e-12
        else 1.0
    )


def _integration_breakpoints(lo, hi, cfg, node_dist):
    pts = []
    branch = cfg.conn_radius - node_dist  # full-circle to partial-arc switch
    if lo < branch < hi:
        pts.append(branch)
    return pts or None


def load_stats(node_dist, cfg, method="auto", share_model="conditioned"):
    """Mean and variance of the load a node at ``node_dist`` receives in
    the first redistribution after the attack.

    ``node_dist`` must lie in [attack_radius, attack_radius + conn_radius];
    at the outer end the lens vanishes and both moments are exactly 0.
    When the attack disk sits wholly inside the node's neighborhood
    (conn_radius - node_dist >= attack_radius) the radial mixing integral
    collapses to a single constant-share evaluation; ``method`` can force
    the "general" integral or the "contained" shortcut for cross-checking,
    the default picks the cheaper one.

    share_model picks the per-neighbor share moments:

    "conditioned"
        positive-conditioned count moments (share_mean / share_sqmean) with
        the fixed-count variance form; this is what the survival bound
        chain is built on.
    "exact"
        size-bias-corrected shares (exact_share_mean / exact_share_sqmean)
        with the Poisson-sum variance form. The mean is exact for the point
        process and is what simulations reproduce; the variance still
        omits the positive covariance between shares of different shedding
        nodes (their outside neighborhoods overlap), so it understates the
        simulated variance at moderate densities.
    """
    ra, cr = cfg.attack_radius, cfg.conn_radius
    if not ra <= node_dist <= ra + cr:
        raise ParameterDomainError(
            f"node_dist must lie in [{ra}, {ra + cr}], got {node_dist}"
        )
    if method not in ("auto", "general", "contained"):
        raise ValueError(f"unknown method {method!r}")
    if share_model == "conditioned":
        moment1, moment2 = _share_mean_clipped, _share_sqmean_clipped
    elif share_model == "exact":
        moment1, moment2 = _exact_share_mean_clipped, _exact_share_sqmean_clipped
    else:
        raise ValueError(f"unknown share_model {share_model!r}")
    lens = geometry.lens_area(node_dist, cr, ra)
    if lens <= 1e-300:
        return LoadStats(0.0, 0.0, node_dist)
    contained = cr - node_dist >= ra
    if method == "contained" and not contained:
        raise ParameterDomainError(
            "contained shortcut needs conn_radius - node_dist >= attack_radius"
        )
    if contained and method != "general":
        lam_u = cfg.density * math.pi * (cr * cr - ra * ra)
        m1, m2 = moment1(lam_u), moment2(lam_u)
        n_mean = cfg.density * math.pi * ra * ra
        if share_model == "exact":
            return LoadStats(n_mean * m1, n_mean * m2, node_dist)
        return LoadStats(n_mean * m1, n_mean * (m2 - m1 * m1), node_dist)

    def weighted(moment_fn):
        def f(r):
            return moment_fn(_poisson_area(cfg, r)) * geometry.arc_weight(
                r, node_dist, cr
            )

        lo, hi = geometry.pdf_support(node_dist, cr, ra)
        val, _ = quad(
            f,
            lo,
            hi,
            epsabs=_INNER_TOL,
            epsrel=_INNER_TOL,
            limit=300,
            points=_integration_breakpoints(lo, hi, cfg, node_dist),
        )
        return val

    a1 = weighted(moment1)
    a2 = weighted(moment2)
    mean = cfg.density * a1
    if share_model == "exact":
        variance = cfg.density * a2
    else:
        variance = cfg.density * (a2 - a1 * a1 / lens)
    return LoadStats(mean, max(variance, 0.0), node_dist)


def failure_prob(node_dist, alpha, cfg, stats=None):
    """Probability the node's received load exceeds its slack alpha - 1,
    under the Gaussian approximation of the load."""
    if alpha < 1:
        raise ParameterDomainError(f"tolerance must be >= 1, got {alpha}")
    if stats is None:
        stats = load_stats(node_dist, cfg)
    slack = alpha - 1.0
    if stats.sigma == 0.0:
        return 1.0 if stats.mean > slack else 0.0
    return 1.0 - specfun.normal_cdf((slack - stats.mean) / stats.sigma)


class LoadProfile:
    """Interpolated load moments over the first ring.

    The survival-probability integral nests the radial share integral; a
    one-time grid of the inner integral keeps a tolerance sweep cheap.
    """

    def __init__(self, cfg, n_grid=_PROFILE_GRID):
        ra, cr = cfg.attack_radius, cfg.conn_radius
        self.lo, self.hi = ra, ra + cr
        grid = np.linspace(self.lo, self.hi, n_grid)
        stats = [load_stats(r, cfg) for r in grid]
        self._mean = PchipInterpolator(grid, [s.mean for s in stats])
        self._sigma = PchipInterpolator(grid, [s.sigma for s in stats])

    def mean(self, r):
        return float(self._mean(r))

    def sigma(self, r):
        return max(float(self._sigma(r)), 0.0)


@lru_cache(maxsize=32)
def _profile(density, conn_radius, attack_radius):
    # the profile only depends on these three parameters
    from types import SimpleNamespace

    key = SimpleNamespace(
        density=density, conn_radius=conn_radius, attack_radius=attack_radius
    )
    return LoadProfile(key)


def load_profile(cfg):
    """Shared, cached LoadProfile for this config's geometry and density."""
    return _profile(cfg.density, cfg.conn_radius, cfg.attack_radius)


def first_ring_survival_prob(alpha, cfg, profile=None):
    """Probability that a uniformly placed first-ring node keeps its load
    within the slack alpha - 1 after the first redistribution."""
    if alpha < 1:
        raise ParameterDomainError(f"tolerance must be >= 1, got {alpha}")
    if profile is None:
        profile = load_profile(cfg)
    ra, cr = cfg.attack_radius, cfg.conn_radius
    ring_area = math.pi * ((ra + cr) ** 2 - ra * ra)
    slack = alpha - 1.0

    def integrand(r):
        m, s = profile.mean(r), profile.sigma(r)
        if s == 0.0:
            surv = 0.0 if m > slack else 1.0
        else:
            surv = specfun.normal_cdf((slack - m) / s)
        return surv * 2.0 * math.pi * r / ring_area

    pts = []
    if profile.mean(ra) > slack > 0.0:
        # the Gaussian argument crosses 0 where the mean profile hits the
        # slack; hand that point to the integrator
        try:
            pts.append(brentq(lambda r: profile.mean(r) - slack, ra, ra + cr))
        except ValueError:
            pass
    val, _ = quad(
        integrand,
        ra,
        ra + cr,
        epsabs=_OUTER_TOL,
        epsrel=_OUTER_TOL,
        limit=300,
        points=pts or None,
    )
    return min(max(val, 0.0), 1.0)


def upper_bound(alpha, cfg, profile=None):
    """Upper bound on the mean failure ratio at tolerance alpha.

    One minus the probability that no first-ring node overloads; failures
    anywhere require a first-ring failure first.
    """
    p_survive = first_ring_survival_prob(alpha, cfg, profile=profile)
    ring_mean_count = cfg.density * math.pi * (
        (cfg.attack_radius + cfg.conn_radius) ** 2 - cfg.attack_radius**2
    )
    return 1.0 - math.exp(-ring_mean_count * (1.0 - p_survive))


def asymptotic_load(node_dist, cfg):
    """Deterministic limit of the received load as the density grows.

    Independent of the density; strictly decreasing in ``node_dist``. When
    the attack disk is wider than the connection radius, nodes right at the
    attack edge border a region where the per-neighbor share does not decay,
    and the limit diverges: this returns math.inf there.
    """
    ra, cr = cfg.attack_radius, cfg.conn_radius
    if not ra <= node_dist <= ra + cr:
        raise ParameterDomainError(
            f"node_dist must lie in [{ra}, {ra + cr}], got {node_dist}"
        )
    if node_dist >= ra + cr:
        return 0.0
    if ra > cr and node_dist <= ra:
        # integrand blows up like 1/(r - (ra - cr)) at the lower limit
        return math.inf

    def integrand(r):
        area = geometry.exterior_area(r, cr, ra, allow_degenerate=True)
        if area <= 0.0:
            return 0.0
        return geometry.arc_weight(r, node_dist, cr) / area

    lo, hi = geometry.pdf_support(node_dist, cr, ra)
    val, _ = quad(
        integrand,
        lo,
        hi,
        epsabs=1e-9,
        epsrel=1e-9,
        limit=400,
        points=_integration_breakpoints(lo, hi, cfg, node_dist),
    )
    return val


def critical_tolerance_upper(cfg):
    """Tolerance above which the dense-network failure ratio drops to 0.

    One plus the limiting load at the attack edge. Depends only on the
    ratio attack_radius / conn_radius; infinite when that ratio exceeds 1.
    """
    return 1.0 + asymptotic_load(cfg.attack_radius, cfg)


def asymptotic_failure_ratio(alpha, cfg):
    """Dense-network failure ratio: 1 below the critical tolerance, else 0."""
    if alpha < 1:
        raise ParameterDomainError(f"tolerance must be >= 1, got {alpha}")
    return 1.0 if alpha < critical_tolerance_upper(cfg) else 0.0
