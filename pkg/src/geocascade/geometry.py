"""Planar circle geometry used by the load-redistribution analysis.

Everything here is expressed in terms of three circles: the attack disk of
radius ``attack_radius`` centered at the origin, a node's connection disk of
radius ``conn_radius`` centered at distance ``r`` (or ``node_dist``) from the
origin, and their overlap lens.
"""

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .errors import DegenerateGeometryError, ParameterDomainError

# Absolute tolerance for the 1-D adaptive quadratures in this module.
QUAD_ABS_TOL = 1e-8


@dataclass(frozen=True)
class Circle:
    """A circle whose center lies ``center_distance`` from the origin."""

    center_distance: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ParameterDomainError(f"radius must be positive, got {self.radius}")
        if self.center_distance < 0:
            raise ParameterDomainError(
                f"center_distance must be non-negative, got {self.center_distance}"
            )


def _clamped_acos(x):
    # Floating error near tangency can push the cosine argument slightly
    # outside [-1, 1]; clamp so the branch cases stay continuous.
    return math.acos(min(1.0, max(-1.0, x)))


def lens_area(d, r1, r2):
    """Area of the intersection of two circles with radii r1, r2 and center
    distance d.

    Handles the containment (one circle inside the other) and disjoint cases
    explicitly; the textbook two-arc-segment formula only covers partial
    overlap. Symmetric in (r1, r2) and continuous in d.
    """
    if d < 0 or r1 <= 0 or r2 <= 0:
        raise ParameterDomainError(
            f"need d >= 0 and positive radii, got d={d}, r1={r1}, r2={r2}"
        )
    if d >= r1 + r2:
        return 0.0
    if d + min(r1, r2) <= max(r1, r2):
        rmin = min(r1, r2)
        return math.pi * rmin * rmin
    cos1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)
    cos2 = (d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)
    seg = (
        r1 * r1 * _clamped_acos(cos1)
        + r2 * r2 * _clamped_acos(cos2)
    )
    prod = (-d + r1 + r2) * (d + r2 - r1) * (d - r2 + r1) * (d + r2 + r1)
    return seg - 0.5 * math.sqrt(max(prod, 0.0))


def exterior_area(r, conn_radius, attack_radius, *, allow_degenerate=False):
    """Area of a node's connection disk outside the attack disk.

    The node sits at distance ``r`` from the origin, inside the attack disk
    (r < attack_radius). When the whole connection disk is swallowed by the
    attack disk (conn_radius <= attack_radius - r) the area is exactly zero;
    downstream moment formulas are undefined there, so by default this raises
    DegenerateGeometryError. Pass allow_degenerate=True to get 0.0 instead.
    """
    if r < 0 or r >= attack_radius:
        raise ParameterDomainError(
            f"need 0 <= r < attack_radius, got r={r}, attack_radius={attack_radius}"
        )
    if conn_radius <= 0:
        raise ParameterDomainError(f"conn_radius must be positive, got {conn_radius}")
    area = math.pi * conn_radius * conn_radius - lens_area(r, conn_radius, attack_radius)
    if conn_radius <= attack_radius - r:
        if not allow_degenerate:
            raise DegenerateGeometryError(
                "connection disk lies entirely inside the attack disk "
                f"(r={r}, conn_radius={conn_radius}, attack_radius={attack_radius})"
            )
        return 0.0
    return max(area, 0.0)


def arc_weight(r, node_dist, conn_radius):
    """Unnormalized radial density 2*r*theta(r) of points of the lens at
    distance r from the origin.

    theta(r) is the half-angle of the arc of radius r (about the origin)
    that lies inside the connection disk of a node at distance ``node_dist``:
    the full pi when the arc is entirely inside (r + node_dist <= conn_radius),
    otherwise the opening angle of the triangle with sides r, node_dist,
    conn_radius.  Dividing by the lens area turns this into the distance PDF.
    """
    if r <= 0:
        return 0.0
    if r + node_dist <= conn_radius:
        theta = math.pi
    else:
        theta = _clamped_acos(
            (node_dist * node_dist - conn_radius * conn_radius + r * r)
            / (2.0 * node_dist * r)
        )
    return 2.0 * r * theta


def distance_pdf(r, node_dist, conn_radius, attack_radius):
    """PDF of the origin-distance of a point drawn uniformly on the lens.

    The lens is the intersection of the attack disk with the connection disk
    of a node at ``node_dist`` >= attack_radius. Support is
    [max(0, node_dist - conn_radius), attack_radius]; outside it the density
    is 0 (not an error).
    """
    if node_dist < attack_radius:
        raise ParameterDomainError(
            f"need node_dist >= attack_radius, got {node_dist} < {attack_radius}"
        )
    lo = max(0.0, node_dist - conn_radius)
    if r < lo or r > attack_radius:
        return 0.0
    lens = lens_area(node_dist, conn_radius, attack_radius)
    if lens <= 0.0:
        return 0.0
    return arc_weight(r, node_dist, conn_radius) / lens


def pdf_support(node_dist, conn_radius, attack_radius):
    """Support interval [lo, hi] of distance_pdf, clipped at zero."""
    return max(0.0, node_dist - conn_radius), attack_radius


def integrate_distance_pdf(node_dist, conn_radius, attack_radius):
    """Integral of distance_pdf over its support (should be 1)."""
    lo, hi = pdf_support(node_dist, conn_radius, attack_radius)
    # The density switches branch where r + node_dist = conn_radius; give
    # the adaptive integrator that breakpoint when it falls inside.
    pts = []
    branch = conn_radius - node_dist
    if lo < branch < hi:
        pts.append(branch)
    val, _ = quad(
        distance_pdf,
        lo,
        hi,
        args=(node_dist, conn_radius, attack_radius),
        epsabs=QUAD_ABS_TOL,
        limit=200,
        points=pts or None,
    )
    return val
