import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oamchip.optics import BeamSpec, ComplexField, Grid, lg_mode
from oamchip.quantum import (
    PhotonDistribution,
    SpdcSource,
    g2_zero,
    heralded_distribution,
    iccd_image,
    poisson_distribution,
    truncation,
    unheralded_distribution,
)

lambdas = st.floats(min_value=0.01, max_value=0.95)


def camera_beam():
    g = Grid(64, 64, 1.0, 1.0)
    return lg_mode(g, BeamSpec("lg", 1, 0, 5.0))


class TestDistributions:
    def test_vacuum(self):
        d = unheralded_distribution(SpdcSource(0.0))
        assert d.p[0] == 1.0 and d.mean == 0.0

    def test_half(self):
        d = unheralded_distribution(SpdcSource(0.5))
        n = np.arange(6)
        assert np.allclose(d.p[:6], 0.75 * 0.25**n, rtol=0, atol=1e-15)
        assert d.mean == pytest.approx(1 / 3, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(lambdas)
    def test_thermal_moments(self, lam):
        d = unheralded_distribution(SpdcSource(lam))
        mean = lam**2 / (1 - lam**2)
        assert d.mean == pytest.approx(mean, abs=1e-10, rel=1e-10)
        assert d.variance == pytest.approx(d.mean * (1 + d.mean), abs=1e-10, rel=1e-10)
        assert d.p.sum() == pytest.approx(1, abs=1e-12)
        assert lam ** (2 * (d.n_max + 1)) < 1e-10

    @pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
    def test_thermal_g2(self, lam):
        assert unheralded_distribution(SpdcSource(lam)).g2() == pytest.approx(2, abs=1e-9)
        assert g2_zero("thermal", SpdcSource(lam)) == pytest.approx(2, abs=1e-9)

    def test_coherent(self):
        assert g2_zero("coherent") == 1.0
        assert poisson_distribution(3.0).g2() == pytest.approx(1, abs=1e-9)

    def test_source_bounds(self):
        for bad in (-0.1, 1.0, 1.5):
            with pytest.raises(ValueError):
                SpdcSource(bad)

    def test_distribution_validation(self):
        with pytest.raises(ValueError):
            PhotonDistribution(np.array([0.5, -0.1]))
        with pytest.raises(ZeroDivisionError):
            PhotonDistribution(np.array([1.0])).g2()

    def test_truncation_rule(self):
        assert truncation(0.0) == 0
        assert truncation(0.5) == math.ceil(math.log(1e-20) / math.log(0.25))


class TestHerald:
    @settings(max_examples=30, deadline=None)
    @given(st.floats(min_value=0.01, max_value=0.9))
    def test_closed_form_at_unit_efficiency(self, lam):
        # a perfect click on arm B removes only the vacuum term, which leaves a
        # geometric law shifted by one photon: g2 = 2 lambda^2
        assert g2_zero("heralded", SpdcSource(lam)) == pytest.approx(2 * lam**2, rel=1e-9)

    def test_small_lambda(self):
        assert g2_zero("heralded", SpdcSource(0.1)) < 0.1
        assert g2_zero("heralded", SpdcSource(0.0)) == 0.0

    def test_monotone(self):
        ladder = np.arange(0.05, 0.501, 0.05)
        vals = [g2_zero("heralded", SpdcSource(l)) for l in ladder]
        assert all(0 < v < 1 for v in vals)
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_lossy_herald(self):
        lam = 0.3
        d = heralded_distribution(SpdcSource(lam), eta=0.5)
        assert d.p[0] == 0.0
        assert 0 < g2_zero("heralded", SpdcSource(lam), 0.5) < 1
        # lossy heralds accept more multi-pair events
        assert g2_zero("heralded", SpdcSource(lam), 0.5) > g2_zero("heralded", SpdcSource(lam), 1.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            heralded_distribution(SpdcSource(0.3), eta=0)
        with pytest.raises(ValueError):
            g2_zero("laser")
        with pytest.raises(ValueError):
            g2_zero("heralded")


class TestIccd:
    def test_empty(self):
        img = iccd_image(camera_beam(), 0, 0.0, seed=1)
        assert img.counts.sum() == 0

    def test_budget(self):
        img = iccd_image(camera_beam(), 5000, 0.1, seed=2)
        assert img.signal_total == 5000
        assert img.counts.sum() == img.signal_total + img.dark_total
        assert np.all(img.counts >= 0)

    def test_histogram_converges(self):
        f = camera_beam()
        img = iccd_image(f, 10**6, 0.0, seed=11)
        p = f.intensity / f.intensity.sum()
        tv = 0.5 * np.abs(img.counts / img.counts.sum() - p).sum()
        assert tv < 0.01

    def test_dark_counts_are_poisson(self):
        g = Grid(128, 128, 1.0, 1.0)
        img = iccd_image(ComplexField(g, np.zeros(g.shape)), 0, 0.5, seed=5)
        mean = 0.5 * g.nx * g.ny
        assert abs(img.dark_total - mean) < 5 * math.sqrt(mean)

    def test_seeded(self):
        a = iccd_image(camera_beam(), 2000, 0.01, seed=42).counts
        b = iccd_image(camera_beam(), 2000, 0.01, seed=42).counts
        c = iccd_image(camera_beam(), 2000, 0.01, seed=43).counts
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_documented_sequence(self):
        # multinomial signal first, then one Poisson draw per pixel
        f = camera_beam()
        rng = np.random.Generator(np.random.PCG64(9))
        I = f.intensity.ravel()
        ref = rng.multinomial(300, I / I.sum()) + rng.poisson(0.2, I.size)
        assert np.array_equal(iccd_image(f, 300, 0.2, seed=9).counts.ravel(), ref)

    def test_errors(self):
        g = Grid(16, 16, 1, 1)
        with pytest.raises(ValueError):
            iccd_image(ComplexField(g, np.zeros(g.shape)), 10)
        with pytest.raises(ValueError):
            iccd_image(camera_beam(), -1)
