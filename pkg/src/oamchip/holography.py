"""SLM emulation: fork holograms, Fraunhofer far field and phase-flattening
projection onto a single-mode fiber."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from scipy.optimize import minimize_scalar

from .optics import BeamSpec, ComplexField, Grid, _frozen, lg_mode, overlap, power

# placeholder grating period on the simulation grid, um
DEFAULT_GRATING_PERIOD = 2.0


@dataclass(frozen=True, eq=False)
class PhaseMask:
    grid: Grid
    phase: np.ndarray

    def __post_init__(self):
        ph = np.asarray(self.phase, dtype=float)
        if ph.shape != self.grid.shape:
            raise ValueError("mask shape does not match grid")
        if not np.all(np.isfinite(ph)):
            raise ValueError("mask phase must be finite")
        object.__setattr__(self, "phase", _frozen(np.mod(ph, 2 * np.pi)))


def vortex_mask(grid: Grid, ell: int) -> PhaseMask:
    _, phi = grid.polar()
    return PhaseMask(grid, ell * phi)


def fork_hologram(grid: Grid, ell: int, grating_period: float = DEFAULT_GRATING_PERIOD) -> PhaseMask:
    """Blazed fork grating: mod(ell phi + 2 pi x / period, 2 pi)."""
    if grating_period < 4 * grid.dx:
        raise ValueError(f"grating period {grating_period} um is not resolved by dx = {grid.dx} um")
    X, _ = grid.mesh()
    _, phi = grid.polar()
    return PhaseMask(grid, ell * phi + 2 * np.pi * X / grating_period)


def apply_mask(field: ComplexField, mask: PhaseMask) -> ComplexField:
    if field.grid != mask.grid:
        raise ValueError("field and mask grids differ")
    return field.with_samples(field.samples * np.exp(1j * mask.phase))


def far_field(field: ComplexField) -> ComplexField:
    """Unitary centred Fourier transform.

    The output grid pitch is the angular spatial frequency step
    2 pi / (n dx) in rad/um, so :func:`power` is preserved.
    """
    g = field.grid
    spec = sfft.fftshift(sfft.fft2(sfft.ifftshift(field.samples)))
    spec *= g.dx * g.dy / (2 * np.pi)
    kg = Grid(g.nx, g.ny, 2 * np.pi / (g.nx * g.dx), 2 * np.pi / (g.ny * g.dy), g.wavelength)
    return ComplexField(kg, spec)


def first_order(far: ComplexField, grating_period: float) -> ComplexField:
    """Recentre the +1 diffraction order of a fork hologram and window it.

    The order sits at kx = 2 pi / period; it is shifted to the origin by a
    whole number of samples and kept within half the grating frequency.
    """
    g = far.grid
    kg = 2 * np.pi / grating_period
    shift = int(round(kg / g.dx))
    s = np.roll(far.samples, -shift, axis=1)
    r, _ = g.polar()
    return far.with_samples(np.where(r < kg / 2, s, 0))


def fiber_mode(g: Grid, w: float) -> ComplexField:
    """Unit-power Gaussian of 1/e^2 radius w on grid g, no window check."""
    r, _ = g.polar()
    E = np.exp(-(r**2) / w**2)
    return ComplexField(g, E / math.sqrt(np.sum(E**2) * g.cell_area))


def phase_flatten_project(field: ComplexField, ell: int, smf_waist: float) -> float:
    """Fraction of the field's power coupled into the fiber after flattening.

    The field is multiplied by exp(-i ell phi), taken to the far field and
    projected onto a Gaussian fiber mode of 1/e^2 radius ``smf_waist``
    (rad/um).
    """
    if smf_waist <= 0:
        raise ValueError("fiber waist must be positive")
    p = power(field)
    if p == 0:
        return 0.0
    flat = apply_mask(field, vortex_mask(field.grid, -ell))
    ff = far_field(flat)
    smf = fiber_mode(ff.grid, smf_waist)
    return min(1.0, abs(overlap(smf, ff)) ** 2 / p)


@lru_cache(maxsize=32)
def matched_smf_waist(grid: Grid, beam_waist: float, ell: int = 1) -> float:
    """Far-field fiber waist that maximizes the ell-matched projection of a
    centred LG_{0,ell} of the given waist."""
    beam = lg_mode(grid, BeamSpec("lg", ell, 0, beam_waist))
    lo = 0.2 / beam_waist
    hi = 8.0 / beam_waist
    res = minimize_scalar(lambda w: -phase_flatten_project(beam, ell, w), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-6 / beam_waist})
    return float(res.x)


def projection_spectrum(field: ComplexField, ells, smf_waist: float) -> dict[int, float]:
    return {int(l): phase_flatten_project(field, int(l), smf_waist) for l in ells}
