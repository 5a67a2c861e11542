import math

import numpy as np
import pytest

from oamchip.analysis import (
    interfere,
    net_topological_charge,
    oam_spectrum,
    ring_power_ratio,
    spectrum_weights_error,
)
from oamchip.optics import (
    BeamSpec,
    ComplexField,
    Grid,
    gaussian,
    lg_mode,
    rotate,
    sample_bilinear,
    superpose,
)


def lg(grid, ell, p=0, w=5.0):
    return lg_mode(grid, BeamSpec("lg", ell, p, w))


def two_rings(grid, r_a=4.0, r_b=9.0, sigma=0.8, outer_power=0.067, ell=1):
    """Two thin Gaussian-profile rings with a known power split."""
    r, phi = grid.polar()
    a = np.exp(-((r - r_a) ** 2) / (2 * sigma**2)) * np.exp(1j * ell * phi)
    b = np.exp(-((r - r_b) ** 2) / (2 * sigma**2)) * np.exp(1j * ell * phi)
    pa = np.sum(np.abs(a) ** 2) * grid.cell_area
    pb = np.sum(np.abs(b) ** 2) * grid.cell_area
    return ComplexField(grid, a / math.sqrt(pa) + b * math.sqrt(outer_power / pb))


class TestSpectrum:
    @pytest.mark.parametrize("ell", [-3, 0, 1, 6])
    def test_pure_mode(self, grid, ell):
        assert oam_spectrum(lg(grid, ell), 12)[ell] == pytest.approx(1, abs=1e-6)

    def test_radial_index_agnostic(self, grid):
        assert oam_spectrum(lg(grid, 2, p=3), 12)[2] == pytest.approx(1, abs=1e-6)

    def test_parseval(self, grid):
        rng = np.random.default_rng(1)
        terms = [(complex(*rng.normal(size=2)), lg(grid, l, p)) for l in range(-5, 6) for p in (0, 1)]
        s = oam_spectrum(superpose(terms), 12)
        assert s.total >= 0.999
        assert s.total <= 1 + 1e-9
        assert np.all((s.p >= 0) & (s.p <= 1))

    def test_conjugation_reflects(self, grid):
        f = superpose([(1, lg(grid, 2)), (0.5j, lg(grid, -1)), (0.2, lg(grid, 0))])
        a, b = oam_spectrum(f, 12), oam_spectrum(f.conj(), 12)
        assert np.max(np.abs(a.p - b.p[::-1])) < 1e-9

    def test_rotation_invariance(self, grid):
        f = superpose([(1, lg(grid, 2)), (0.5j, lg(grid, -1)), (0.2, lg(grid, 0))])
        a, b = oam_spectrum(f, 12), oam_spectrum(rotate(f, math.pi / 2), 12)
        assert np.max(np.abs(a.p - b.p)) < 1e-6

    def test_indexing_and_errors(self, grid):
        s = oam_spectrum(lg(grid, 1), 3)
        assert s[10] == 0.0
        assert list(s.ells) == list(range(-3, 4))
        assert s.argmax() == 1
        with pytest.raises(ValueError):
            oam_spectrum(lg(grid, 1), 0)

    def test_zero_field(self, grid):
        s = oam_spectrum(ComplexField(grid, np.zeros(grid.shape)), 2)
        assert s.total == 0

    def test_weights_error(self, grid):
        s = oam_spectrum(superpose([(1, lg(grid, 1)), (1, lg(grid, -1))]), 4)
        assert spectrum_weights_error(s, {1: 0.5, -1: 0.5}) < 1e-6
        assert spectrum_weights_error(s, {1: 1.0}) == pytest.approx(0.5, abs=1e-6)


class TestCharge:
    def test_lg(self, grid):
        assert net_topological_charge(lg(grid, 1), 3.5) == 1
        assert net_topological_charge(lg(grid, 1).conj(), 3.5) == -1
        assert net_topological_charge(lg(grid, -4), 6.0) == -4

    def test_invariant_under_phase_and_scale(self, grid):
        f = lg(grid, 3)
        assert net_topological_charge(f.scaled(7.5 * np.exp(2.1j)), 5.0) == 3

    def test_dark_circle(self, grid):
        with pytest.raises(ValueError, match="insufficient"):
            net_topological_charge(lg(grid, 1), 28.0)
        with pytest.raises(ValueError):
            net_topological_charge(lg(grid, 1), 40.0)


class TestInterference:
    def test_self_reference_is_constructive(self, grid):
        g = gaussian(grid, 8.0)
        pattern = interfere(g, 8.0)
        assert np.allclose(pattern, 4 * g.intensity, rtol=1e-12, atol=1e-18)

    def test_curved_reference_spiral_follows_charge(self, grid):
        # a circle through the ring crosses |ell| bright spiral arms
        for ell in (1, 2, -1):
            f = lg(grid, ell)
            t = np.linspace(0, 2 * np.pi, 720, endpoint=False)
            r = 3.5 * math.sqrt(max(abs(ell), 1))
            pattern = ComplexField(grid, interfere(f, 20.0, 1.0))
            ring = sample_bilinear(pattern, r * np.cos(t), r * np.sin(t)).real
            ring = ring - ring.mean()
            arms = np.sum((ring[:-1] < 0) & (ring[1:] >= 0)) + (ring[-1] < 0 <= ring[0])
            assert arms == abs(ell)

    def test_bad_waist(self, grid):
        with pytest.raises(ValueError):
            interfere(lg(grid, 1), 0.0)


class TestRings:
    def test_synthetic_ratio(self):
        g = Grid(400, 400, 0.1, 0.1)
        reps = ring_power_ratio(two_rings(g), (2.0, 6.0, 6.0, 12.0))
        assert reps["annulus_integral"].ratio == pytest.approx(0.067, rel=0.01)

    def test_methods_agree_on_smooth_fields(self):
        g = Grid(400, 400, 0.1, 0.1)
        for frac in (0.03, 0.067, 0.2):
            reps = ring_power_ratio(two_rings(g, outer_power=frac), (2.0, 6.0, 6.0, 12.0))
            a, b = reps["annulus_integral"].ratio, reps["radial_trapezoid"].ratio
            assert abs(a - b) / a < 0.15

    def test_single_ring(self, grid):
        reps = ring_power_ratio(lg(grid, 1, w=3.0), (1.0, 4.5, 12.0, 20.0))
        assert reps["annulus_integral"].ratio < 1e-3
        assert reps["annulus_integral"].radii == (1.0, 4.5, 12.0, 20.0)

    @pytest.mark.parametrize("radii", [(3, 2, 5, 6), (1, 2, 1.5, 3), (0, 1, 2, 3), (1, 2, 3, 40)])
    def test_bad_radii(self, grid, radii):
        with pytest.raises(ValueError):
            ring_power_ratio(lg(grid, 1), radii)
