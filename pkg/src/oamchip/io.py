"""Binary and text artifact formats.

OAMFLD01 / OAMIDX01: 8 magic bytes, little-endian ``u32 nx, u32 ny, f64 dx,
f64 dy, f64 wavelength``, then row-major (x fastest) samples: ``(re, im)`` f64
pairs for fields, one f64 per pixel for index maps.

PGM images are written top row first with +y up, so the array is flipped
vertically on output.
"""

from __future__ import annotations

import csv
import io
import os
import re
import struct
import tempfile
from pathlib import Path

import numpy as np

from .optics import ComplexField, Grid
from .waveguide import IndexProfile

FIELD_MAGIC = b"OAMFLD01"
INDEX_MAGIC = b"OAMIDX01"
_HEADER = struct.Struct("<IIddd")


def atomic_write(path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _header(magic: bytes, g: Grid) -> bytes:
    return magic + _HEADER.pack(g.nx, g.ny, g.dx, g.dy, g.wavelength)


def _read_header(buf: bytes, magic: bytes):
    if buf[:8] != magic:
        raise ValueError(f"bad magic {buf[:8]!r}, expected {magic!r}")
    nx, ny, dx, dy, wl = _HEADER.unpack_from(buf, 8)
    return Grid(nx, ny, dx, dy, wl), 8 + _HEADER.size


def field_to_bytes(field: ComplexField) -> bytes:
    data = np.ascontiguousarray(field.samples, dtype="<c16").tobytes()
    return _header(FIELD_MAGIC, field.grid) + data


def field_from_bytes(buf: bytes) -> ComplexField:
    g, off = _read_header(buf, FIELD_MAGIC)
    n = g.nx * g.ny
    if len(buf) != off + 16 * n:
        raise ValueError("field file has the wrong length")
    s = np.frombuffer(buf, dtype="<c16", count=n, offset=off).reshape(g.shape)
    return ComplexField(g, s)


def write_field(path, field: ComplexField) -> Path:
    return atomic_write(path, field_to_bytes(field))


def read_field(path) -> ComplexField:
    return field_from_bytes(Path(path).read_bytes())


def index_to_bytes(profile: IndexProfile) -> bytes:
    return _header(INDEX_MAGIC, profile.grid) + np.ascontiguousarray(profile.n, dtype="<f8").tobytes()


def index_from_bytes(buf: bytes) -> IndexProfile:
    g, off = _read_header(buf, INDEX_MAGIC)
    n = g.nx * g.ny
    if len(buf) != off + 8 * n:
        raise ValueError("index file has the wrong length")
    arr = np.frombuffer(buf, dtype="<f8", count=n, offset=off).reshape(g.shape)
    n0 = float(arr.min())
    return IndexProfile(g, arr, n0, float(arr.max()) - n0)


def write_index(path, profile: IndexProfile) -> Path:
    return atomic_write(path, index_to_bytes(profile))


def read_index(path) -> IndexProfile:
    return index_from_bytes(Path(path).read_bytes())


def pgm_bytes(values: np.ndarray, maxval: int) -> bytes:
    v = np.flipud(np.asarray(values))
    h, w = v.shape
    dtype = ">u2" if maxval > 255 else "u1"
    head = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    return head + np.ascontiguousarray(v, dtype=dtype).tobytes()


def read_pgm(path) -> tuple[np.ndarray, int]:
    buf = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", buf)
    if not m:
        raise ValueError("not a binary PGM")
    w, h, maxval = (int(v) for v in m.groups())
    body = buf[m.end():]
    dtype = ">u2" if maxval > 255 else "u1"
    return np.flipud(np.frombuffer(body, dtype=dtype).reshape(h, w)), maxval


def write_phase_pgm(path, phase: np.ndarray) -> Path:
    """8-bit mask image, gray level = round(255 phase / 2 pi)."""
    levels = np.rint(np.mod(phase, 2 * np.pi) / (2 * np.pi) * 255).astype(np.uint8)
    return atomic_write(path, pgm_bytes(levels, 255))


def write_intensity_pgm(path, intensity: np.ndarray) -> Path:
    """16-bit max-normalized image plus ``<name>.txt`` holding the scale."""
    I = np.asarray(intensity, dtype=float)
    peak = float(I.max())
    levels = np.rint(I / peak * 65535) if peak > 0 else np.zeros(I.shape)
    path = atomic_write(path, pgm_bytes(levels.astype(np.uint16), 65535))
    atomic_write(path.with_suffix(".txt"), f"max_intensity = {peak!r}\nmaxval = 65535\n".encode())
    return path


def write_count_pgm(path, image) -> Path:
    """Raw photon counts as a 16-bit PGM with a sidecar of seed and budgets."""
    counts = np.asarray(image.counts)
    top = int(counts.max()) if counts.size else 0
    scale = 1.0 if top <= 65535 else 65535 / top
    levels = np.rint(counts * scale).astype(np.uint16)
    path = atomic_write(path, pgm_bytes(levels, 65535))
    side = (
        f"seed = {image.seed}\nn_photons = {image.n_photons}\ndark_rate = {image.dark_rate!r}\n"
        f"signal_total = {image.signal_total}\ndark_total = {image.dark_total}\n"
        f"count_scale = {scale!r}\n"
    )
    atomic_write(path.with_suffix(".txt"), side.encode())
    return path


def csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue().encode()


def write_csv(path, header, rows) -> Path:
    return atomic_write(path, csv_bytes(header, rows))


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_spectrum_csv(path, spectrum) -> Path:
    return write_csv(path, ["l", "power_fraction"], [(l, float(v)) for l, v in spectrum.as_dict().items()])


def write_trace_csv(path, trace) -> Path:
    return write_csv(path, ["z_um", "guided_power"], [(float(z), float(p)) for z, p in trace])


def write_modes(directory, modes) -> list[Path]:
    """One OAMFLD01 file per mode and ``modes.csv`` with ``mode_index,n_eff``."""
    directory = Path(directory)
    paths = [write_field(directory / f"mode_{i:02d}.fld", m.field) for i, m in enumerate(modes)]
    paths.append(write_csv(directory / "modes.csv", ["mode_index", "n_eff"],
                           [(i, float(m.n_eff)) for i, m in enumerate(modes)]))
    return paths
