import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import chi2

from geocascade.errors import DegenerateGeometryError, ParameterDomainError
from geocascade.geometry import (
    Circle,
    distance_pdf,
    exterior_area,
    integrate_distance_pdf,
    lens_area,
    pdf_support,
)

from oracles import mc_lens_area, mc_lens_points


def test_circle_validation():
    Circle(0.2, 0.1)
    with pytest.raises(ParameterDomainError):
        Circle(0.2, 0.0)
    with pytest.raises(ParameterDomainError):
        Circle(-0.1, 0.1)


class TestLensArea:
    def test_coincident_circles(self):
        assert lens_area(0.0, 0.1, 0.1) == pytest.approx(math.pi * 0.01, rel=1e-12)

    def test_disjoint_circles(self):
        assert lens_area(0.3, 0.1, 0.1) == 0.0
        assert lens_area(0.2, 0.1, 0.1) == 0.0  # tangent counts as disjoint

    def test_partial_overlap_frozen_value(self):
        # frozen from the closed form; cross-checked below against MC
        assert lens_area(0.1, 0.1, 0.1) == pytest.approx(0.012283696986087571, rel=1e-12)

    def test_partial_overlap_vs_rejection_sampling(self):
        cases = [
            (0.1, 0.1, 0.1),
            (0.15, 0.1, 0.1),
            (0.05, 0.1, 0.08),
            (0.12, 0.2, 0.05),
        ]
        for i, (d, r1, r2) in enumerate(cases):
            exact = lens_area(d, r1, r2)
            est, se = mc_lens_area(d, r1, r2, samples=10_000_000, seed=100 + i)
            assert abs(est - exact) <= 5e-4 * exact + 4 * se

    def test_containment(self):
        assert lens_area(0.02, 0.1, 0.05) == pytest.approx(math.pi * 0.05**2, rel=1e-12)
        assert lens_area(0.05, 0.05, 0.1) == pytest.approx(math.pi * 0.05**2, rel=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            r1, r2 = rng.uniform(0.01, 0.5, 2)
            d = rng.uniform(0.0, r1 + r2 + 0.1)
            assert lens_area(d, r1, r2) == pytest.approx(lens_area(d, r2, r1), abs=1e-15)

    def test_monotone_in_distance(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            r1, r2 = rng.uniform(0.05, 0.4, 2)
            ds = np.linspace(0.0, r1 + r2 + 0.05, 200)
            vals = [lens_area(d, r1, r2) for d in ds]
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_continuity_at_case_boundaries(self):
        # tangency boundaries of the explicit case analysis
        for r1, r2 in [(0.1, 0.1), (0.2, 0.07)]:
            for d0 in [abs(r1 - r2), r1 + r2]:
                if d0 == 0.0:
                    continue
                lo = lens_area(d0 * (1 - 1e-9), r1, r2)
                hi = lens_area(d0 * (1 + 1e-9), r1, r2)
                assert abs(lo - hi) < 1e-6

    def test_invalid_inputs(self):
        with pytest.raises(ParameterDomainError):
            lens_area(-0.1, 0.1, 0.1)
        with pytest.raises(ParameterDomainError):
            lens_area(0.1, -0.1, 0.1)
        with pytest.raises(ParameterDomainError):
            lens_area(0.1, 0.1, 0.0)


class TestExteriorArea:
    def test_attack_disk_inside_neighborhood(self):
        # conn disk of a node at the center swallows the whole attack disk
        want = math.pi * (0.1**2 - 0.05**2)
        assert exterior_area(0.0, 0.1, 0.05) == pytest.approx(want, rel=1e-12)

    def test_partial_overlap_matches_lens(self):
        got = exterior_area(0.05, 0.1, 0.1)
        want = math.pi * 0.01 - lens_area(0.05, 0.1, 0.1)
        assert got == pytest.approx(want, rel=1e-12)

    def test_degenerate_raises_by_default(self):
        with pytest.raises(DegenerateGeometryError):
            exterior_area(0.0, 0.05, 0.1)

    def test_degenerate_flag_returns_zero(self):
        assert exterior_area(0.0, 0.05, 0.1, allow_degenerate=True) == 0.0
        assert exterior_area(0.04, 0.05, 0.1, allow_degenerate=True) == 0.0

    def test_out_of_domain(self):
        with pytest.raises(ParameterDomainError):
            exterior_area(0.1, 0.1, 0.1)  # r == attack radius
        with pytest.raises(ParameterDomainError):
            exterior_area(-0.01, 0.1, 0.1)

    def test_complements_lens_exactly(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            conn_r = rng.uniform(0.05, 0.3)
            attack_r = rng.uniform(0.02, 0.3)
            r = rng.uniform(0.0, attack_r * 0.999)
            area = exterior_area(r, conn_r, attack_r, allow_degenerate=True)
            total = area + lens_area(r, conn_r, attack_r)
            assert total == pytest.approx(math.pi * conn_r**2, rel=1e-12)


class TestDistancePdf:
    def test_normalization(self):
        cases = [
            (0.15, 0.1, 0.1),
            (0.1, 0.1, 0.1),
            (0.12, 0.2, 0.05),
            (0.25, 0.1, 0.2),
            (0.05, 0.2, 0.05),
        ]
        for node_dist, conn_r, attack_r in cases:
            total = integrate_distance_pdf(node_dist, conn_r, attack_r)
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_zero_outside_support(self):
        assert distance_pdf(0.095, 0.2, 0.1, 0.1) == 0.0  # below node_dist - conn
        assert distance_pdf(0.11, 0.15, 0.1, 0.1) == 0.0  # beyond attack radius

    def test_arccos_branch_when_node_at_conn_radius(self):
        # node_dist == conn_radius: r + node_dist > conn_radius for all r > 0,
        # so the density must stay below the full-circle 2*pi*r / I line
        node_dist = conn_r = attack_r = 0.1
        lens = lens_area(node_dist, conn_r, attack_r)
        for r in np.linspace(1e-4, attack_r - 1e-4, 50):
            val = distance_pdf(r, node_dist, conn_r, attack_r)
            assert 0.0 < val < 2.0 * math.pi * r / lens

    def test_full_circle_branch(self):
        # node close enough that small circles around the origin sit wholly
        # inside its neighborhood: density is exactly 2*pi*r / I there
        node_dist, conn_r, attack_r = 0.05, 0.2, 0.05
        lens = lens_area(node_dist, conn_r, attack_r)
        for r in [0.01, 0.05, 0.1]:
            if r + node_dist <= conn_r and r <= attack_r:
                val = distance_pdf(r, node_dist, conn_r, attack_r)
                assert val == pytest.approx(2.0 * math.pi * r / lens, rel=1e-12)

    def test_against_sampled_lens_histogram(self):
        node_dist, conn_r, attack_r = 0.15, 0.1, 0.1
        pts = mc_lens_points(node_dist, conn_r, attack_r, samples=1_000_000, seed=42)
        lo, hi = pdf_support(node_dist, conn_r, attack_r)
        edges = np.linspace(lo, hi, 41)
        observed, _ = np.histogram(pts, bins=edges)
        expected = []
        for a, b in zip(edges[:-1], edges[1:]):
            p, _ = quad(
                distance_pdf, a, b, args=(node_dist, conn_r, attack_r), epsabs=1e-10
            )
            expected.append(p * pts.size)
        expected = np.asarray(expected)
        stat = float(np.sum((observed - expected) ** 2 / expected))
        assert stat < chi2.ppf(0.999, len(expected) - 1)

    def test_node_dist_below_attack_radius_rejected(self):
        with pytest.raises(ParameterDomainError):
            distance_pdf(0.05, 0.09, 0.1, 0.1)
