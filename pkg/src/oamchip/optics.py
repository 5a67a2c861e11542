"""Grids, scalar fields and paraxial beam synthesis.

All lengths are in micrometres unless a name says otherwise (``*_mm``).
Field samples are stored as ``(ny, nx)`` arrays, x varying fastest, and the
sample ``(j, i)`` sits at ``((i - nx/2) dx, (j - ny/2) dy)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import eval_genlaguerre


@dataclass(frozen=True)
class Grid:
    nx: int = 300
    ny: int = 300
    dx: float = 0.2
    dy: float = 0.2
    wavelength: float = 0.78

    def __post_init__(self):
        for n in (self.nx, self.ny):
            if n < 16 or n % 2:
                raise ValueError(f"grid sizes must be even and >= 16, got {self.nx}x{self.ny}")
        if not (self.dx > 0 and self.dy > 0 and self.wavelength > 0):
            raise ValueError("grid pitch and wavelength must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def k0(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def window(self) -> float:
        """Smaller side of the simulation window."""
        return min(self.nx * self.dx, self.ny * self.dy)

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.dx

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) - self.ny // 2) * self.dy

    def mesh(self, center=(0.0, 0.0)):
        X, Y = np.meshgrid(self.x - center[0], self.y - center[1], indexing="xy")
        return X, Y

    def polar(self, center=(0.0, 0.0)):
        X, Y = self.mesh(center)
        return np.hypot(X, Y), np.arctan2(Y, X)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.shape != self.grid.shape:
            raise ValueError(f"samples shape {s.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", _frozen(s))

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def with_samples(self, samples) -> "ComplexField":
        return ComplexField(self.grid, samples)

    def scaled(self, c: complex) -> "ComplexField":
        return ComplexField(self.grid, self.samples * c)

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, np.conj(self.samples))

    def normalized(self) -> "ComplexField":
        p = power(self)
        if p == 0:
            raise ValueError("cannot normalize a zero field")
        return self.scaled(1 / math.sqrt(p))


@dataclass(frozen=True)
class BeamSpec:
    """Input beam description.

    ``center`` is the transverse offset of the beam axis in micrometres and
    ``amplitude * exp(i phase)`` the complex weight applied after unit-power
    normalization.
    """

    kind: str = "lg"
    ell: int = 0
    p: int = 0
    waist: float = 5.0
    center: tuple[float, float] = (0.0, 0.0)
    amplitude: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lg", "gauss"):
            raise ValueError(f"unknown beam kind {self.kind!r}")
        if self.waist <= 0:
            raise ValueError("waist must be positive")
        if self.p < 0 or int(self.p) != self.p or int(self.ell) != self.ell:
            raise ValueError("ell must be an integer and p a nonnegative integer")
        if self.kind == "gauss" and (self.ell != 0 or self.p != 0):
            raise ValueError("a gauss beam has ell = p = 0")


@dataclass(frozen=True)
class ObjectiveSpec:
    label: str
    focal_length: float  # mm
    numerical_aperture: float

    def __post_init__(self):
        if self.focal_length <= 0:
            raise ValueError("focal length must be positive")
        if not 0 < self.numerical_aperture < 1:
            raise ValueError("numerical aperture must lie in (0, 1)")


# coupling objectives of the experiment
OBJECTIVES = {
    "16X": ObjectiveSpec("16X", 11.0, 0.25),
    "20X": ObjectiveSpec("20X", 8.0, 0.50),
    "30X": ObjectiveSpec("30X", 6.2, 0.40),
}

# 1/e^2 radius of the collimated beam on the coupling objective, mm
DEFAULT_INPUT_WAIST_MM = 0.48


def power(field: ComplexField) -> float:
    """Discrete integral of |E|^2 over the grid."""
    return float(np.sum(field.intensity) * field.grid.cell_area)


def _check_same_grid(a: ComplexField, b: ComplexField):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def overlap(a: ComplexField, b: ComplexField) -> complex:
    """Inner product <a|b> = sum conj(a) b dA."""
    _check_same_grid(a, b)
    return complex(np.vdot(a.samples.ravel(), b.samples.ravel()) * a.grid.cell_area)


def coupling_fraction(a: ComplexField, b: ComplexField) -> float:
    """|<a|b>|^2 / (P_a P_b); 0 if either field is empty."""
    pa, pb = power(a), power(b)
    if pa == 0 or pb == 0:
        return 0.0
    return abs(overlap(a, b)) ** 2 / (pa * pb)


def lg_mode(grid: Grid, spec: BeamSpec) -> ComplexField:
    """Laguerre-Gaussian LG_{p,ell} at its waist plane.

    Normalized by the discrete sum on ``grid`` so that distinct modes are
    orthonormal under :func:`overlap`, then weighted by the complex
    amplitude carried by spec.
    """
    if spec.kind not in ("lg", "gauss"):
        raise ValueError(f"lg_mode cannot synthesize kind {spec.kind!r}")
    if grid.window < 6 * spec.waist:
        raise ValueError(
            f"window {grid.window:g} um is smaller than 6 x waist ({6 * spec.waist:g} um)"
        )
    ell, p, w = int(spec.ell), int(spec.p), spec.waist
    r, phi = grid.polar(spec.center)
    u = 2 * r**2 / w**2
    env = (np.sqrt(u)) ** abs(ell) * eval_genlaguerre(p, abs(ell), u) * np.exp(-u / 2)
    E = env * np.exp(1j * ell * phi)
    E /= math.sqrt(np.sum(np.abs(E) ** 2) * grid.cell_area)
    return ComplexField(grid, E * spec.amplitude * np.exp(1j * spec.phase))


def gaussian(grid: Grid, waist: float, center=(0.0, 0.0)) -> ComplexField:
    return lg_mode(grid, BeamSpec("gauss", 0, 0, waist, tuple(center)))


def superpose(terms: Sequence[tuple[complex, ComplexField]], normalize: bool = True) -> ComplexField:
    """Pointwise linear combination of ``(coefficient, field)`` pairs."""
    terms = list(terms)
    if not terms:
        raise ValueError("superpose needs at least one term")
    g = terms[0][1].grid
    acc = np.zeros(g.shape, dtype=np.complex128)
    for c, f in terms:
        if f.grid != g:
            raise ValueError("all superposed fields must share a grid")
        acc += c * f.samples
    out = ComplexField(g, acc)
    return out.normalized() if normalize else out


def bloch_state(theta: float, phi: float, ell: int, grid: Grid, waist: float,
                center=(0.0, 0.0)) -> ComplexField:
    """cos(theta/2) LG_{0,+ell} + exp(i phi) sin(theta/2) LG_{0,-ell}."""
    if int(ell) != ell or ell <= 0:
        raise ValueError("bloch_state needs a positive integer ell")
    if not 0 <= theta <= math.pi:
        raise ValueError("theta must lie in [0, pi]")
    up = lg_mode(grid, BeamSpec("lg", ell, 0, waist, tuple(center)))
    down = lg_mode(grid, BeamSpec("lg", -ell, 0, waist, tuple(center)))
    return superpose(
        [(math.cos(theta / 2), up), (np.exp(1j * phi) * math.sin(theta / 2), down)],
        normalize=True,
    )


# the six states at the poles and on the equator of the ell = 1 sphere
SIX_BLOCH_STATES = {
    "+l": (0.0, 0.0),
    "-l": (math.pi, 0.0),
    "H": (math.pi / 2, 0.0),
    "V": (math.pi / 2, math.pi),
    "D": (math.pi / 2, math.pi / 2),
    "A": (math.pi / 2, 3 * math.pi / 2),
}


def focused_waist(objective: ObjectiveSpec, input_waist: float, wavelength: float) -> float:
    """Gaussian focal waist (um) behind ``objective`` for a collimated beam of
    1/e^2 radius ``input_waist`` (mm)."""
    if input_waist <= 0 or wavelength <= 0:
        raise ValueError("input waist and wavelength must be positive")
    f_um = objective.focal_length * 1e3
    return wavelength * f_um / (math.pi * input_waist * 1e3)


def ring_radius(ell: int, waist: float) -> float:
    """Radius of peak intensity of LG_{0,ell}."""
    return waist * math.sqrt(abs(ell) / 2)


def ring_matched_waist(ell: int, radius: float) -> float:
    if ell == 0:
        raise ValueError("ell = 0 has no ring")
    return radius / math.sqrt(abs(ell) / 2)


def sample_bilinear(field: ComplexField, xs, ys) -> np.ndarray:
    """Bilinear interpolation of the field at physical points; zero outside."""
    g = field.grid
    fi = np.asarray(xs, dtype=float) / g.dx + g.nx // 2
    fj = np.asarray(ys, dtype=float) / g.dy + g.ny // 2
    i0 = np.floor(fi).astype(int)
    j0 = np.floor(fj).astype(int)
    ti = fi - i0
    tj = fj - j0
    s = field.samples
    out = np.zeros(np.broadcast(fi, fj).shape, dtype=np.complex128)
    for di, dj, wgt in ((0, 0, (1 - ti) * (1 - tj)), (1, 0, ti * (1 - tj)),
                        (0, 1, (1 - ti) * tj), (1, 1, ti * tj)):
        ii, jj = i0 + di, j0 + dj
        ok = (ii >= 0) & (ii < g.nx) & (jj >= 0) & (jj < g.ny)
        vals = np.zeros(out.shape, dtype=np.complex128)
        vals[ok] = s[jj[ok], ii[ok]]
        out += np.where(ok, wgt, 0.0) * vals
    return out


def rotate(field: ComplexField, angle: float) -> ComplexField:
    """Resample the field on coordinates rotated by ``angle`` about the origin.

    The result is ``E(R(angle) r)``: an LG_{0,ell} picks up ``exp(i ell angle)``.
    Multiples of 90 degrees are exact (up to the single grid row that leaves
    the window).
    """
    g = field.grid
    if g.dx != g.dy:
        raise ValueError("rotation needs square pixels")
    X, Y = g.mesh()
    c, s = math.cos(angle), math.sin(angle)
    if abs(c) < 1e-12:
        c = 0.0
    if abs(s) < 1e-12:
        s = 0.0
    return ComplexField(g, sample_bilinear(field, c * X - s * Y, s * X + c * Y))

