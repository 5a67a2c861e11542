import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oamchip import io as fio
from oamchip.optics import BeamSpec, ComplexField, Grid, lg_mode
from oamchip.quantum import iccd_image

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


class TestFieldFormat:
    def test_header_layout(self, grid):
        f = lg_mode(grid, BeamSpec("lg", 1, 0, 5.0))
        buf = fio.field_to_bytes(f)
        assert buf[:8] == b"OAMFLD01"
        assert struct.unpack_from("<IIddd", buf, 8) == (300, 300, 0.2, 0.2, 0.78)
        assert len(buf) == 8 + 32 + 16 * 300 * 300
        # first sample is (re, im) of row 0, column 0
        re, im = struct.unpack_from("<dd", buf, 40)
        assert complex(re, im) == f.samples[0, 0]

    @settings(max_examples=25, deadline=None)
    @given(arrays(np.float64, (2, 16, 18), elements=finite))
    def test_roundtrip_bit_exact(self, parts):
        g = Grid(18, 16, 0.37, 0.21, 1.064)
        f = ComplexField(g, parts[0] + 1j * parts[1])
        back = fio.field_from_bytes(fio.field_to_bytes(f))
        assert back.grid == g
        assert back.samples.tobytes() == f.samples.tobytes()

    def test_file_roundtrip(self, tmp_path, grid):
        f = lg_mode(grid, BeamSpec("lg", -3, 1, 4.0, (0.3, -0.2)))
        path = fio.write_field(tmp_path / "a" / "f.fld", f)
        assert fio.read_field(path).samples.tobytes() == f.samples.tobytes()
        assert not list(path.parent.glob(".*tmp"))

    def test_rejects_bad_input(self, grid):
        buf = fio.field_to_bytes(lg_mode(grid, BeamSpec("lg", 1, 0, 5.0)))
        with pytest.raises(ValueError, match="magic"):
            fio.field_from_bytes(b"XXXXXXXX" + buf[8:])
        with pytest.raises(ValueError, match="length"):
            fio.field_from_bytes(buf[:-8])


class TestIndexFormat:
    def test_roundtrip(self, tmp_path, chip_profile):
        path = fio.write_index(tmp_path / "chip.idx", chip_profile)
        back = fio.read_index(path)
        assert path.read_bytes()[:8] == b"OAMIDX01"
        assert back.n.tobytes() == chip_profile.n.tobytes()
        assert back.n0 == pytest.approx(chip_profile.n0)
        assert back.delta_n == pytest.approx(chip_profile.delta_n, rel=1e-9)


class TestImages:
    def test_phase_pgm(self, tmp_path):
        g = Grid(16, 16, 1, 1)
        ph = np.zeros(g.shape)
        ph[0, :] = np.pi
        path = fio.write_phase_pgm(tmp_path / "m.pgm", ph)
        img, maxval = fio.read_pgm(path)
        assert maxval == 255
        assert path.read_bytes().startswith(b"P5\n16 16\n255\n")
        assert img[0, 0] == 128 and img[1, 0] == 0

    def test_intensity_pgm(self, tmp_path, grid):
        f = lg_mode(grid, BeamSpec("lg", 1, 0, 5.0))
        path = fio.write_intensity_pgm(tmp_path / "i.pgm", f.intensity)
        img, maxval = fio.read_pgm(path)
        assert maxval == 65535 and img.max() == 65535
        side = path.with_suffix(".txt").read_text()
        peak = float(side.split("=")[1].split()[0])
        assert peak == f.intensity.max()
        rebuilt = img / 65535 * peak
        assert np.max(np.abs(rebuilt - f.intensity)) <= peak / 65535

    def test_count_pgm(self, tmp_path):
        f = lg_mode(Grid(64, 64, 1, 1), BeamSpec("lg", 1, 0, 5.0))
        img = iccd_image(f, 1000, 0.01, seed=4)
        path = fio.write_count_pgm(tmp_path / "c.pgm", img)
        counts, _ = fio.read_pgm(path)
        assert np.array_equal(counts, img.counts)
        side = path.with_suffix(".txt").read_text()
        assert "seed = 4" in side and "n_photons = 1000" in side

    def test_not_pgm(self, tmp_path):
        p = tmp_path / "x.pgm"
        p.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
        with pytest.raises(ValueError):
            fio.read_pgm(p)


class TestCsv:
    def test_roundtrip(self, tmp_path):
        path = fio.write_csv(tmp_path / "t.csv", ["a", "b"], [(1, 0.1), (2, 1 / 3)])
        rows = fio.read_csv(path)
        assert rows[1]["a"] == "2" and float(rows[1]["b"]) == 1 / 3

    def test_modes(self, tmp_path, chip_modes):
        paths = fio.write_modes(tmp_path / "m", chip_modes)
        rows = fio.read_csv(tmp_path / "m" / "modes.csv")
        assert list(rows[0]) == ["mode_index", "n_eff"]
        assert float(rows[0]["n_eff"]) == chip_modes[0].n_eff
        assert len(paths) == len(chip_modes) + 1

    def test_trace(self, tmp_path):
        path = fio.write_trace_csv(tmp_path / "tr.csv", [(0.0, 1.0), (200.0, 0.9)])
        assert path.read_text().splitlines()[0] == "z_um,guided_power"
