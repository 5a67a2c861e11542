"""Index profiles of the written structure and scalar guided-mode solving."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .analysis import OamSpectrum, oam_spectrum
from .optics import ComplexField, Grid, _frozen

# borosilicate substrate at 780 nm
DEFAULT_N0 = 1.51
DEFAULT_DELTA_N = 2e-3


class NoGuidedModeError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class IndexProfile:
    grid: Grid
    n: np.ndarray
    n0: float = DEFAULT_N0
    delta_n: float = DEFAULT_DELTA_N

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        if n.shape != self.grid.shape:
            raise ValueError("index map does not match grid")
        tol = 1e-12
        if n.min() < self.n0 - tol or n.max() > self.n0 + self.delta_n + tol:
            raise ValueError("index map leaves [n0, n0 + delta_n]")
        object.__setattr__(self, "n", _frozen(n))

    @classmethod
    def uniform(cls, grid: Grid, n0: float = DEFAULT_N0) -> "IndexProfile":
        return cls(grid, np.full(grid.shape, n0), n0, 0.0)


@dataclass(frozen=True)
class DoughnutGeometry:
    ring_diameter: float = 8.0
    n_cores: int = 12
    core_diameter: float = 2.5
    include_center: bool = False
    delta_n: float = DEFAULT_DELTA_N
    core_shape: str = "gaussian"

    def __post_init__(self):
        if self.n_cores < 3:
            raise ValueError("need at least three cores")
        if self.ring_diameter <= self.core_diameter:
            raise ValueError("ring diameter must exceed the core diameter")
        if self.core_shape not in ("gaussian", "supergaussian"):
            raise ValueError(f"unknown core shape {self.core_shape!r}")
        if self.delta_n < 0:
            raise ValueError("delta_n must be nonnegative")

    def core_centers(self) -> list[tuple[float, float]]:
        R = self.ring_diameter / 2
        pts = [(R * math.cos(2 * math.pi * k / self.n_cores),
                R * math.sin(2 * math.pi * k / self.n_cores)) for k in range(self.n_cores)]
        if self.include_center:
            pts.append((0.0, 0.0))
        return pts


@dataclass(frozen=True, eq=False)
class GuidedMode:
    field: ComplexField
    n_eff: float


def _core(r2: np.ndarray, diameter: float, shape: str) -> np.ndarray:
    # FWHM equals the written core diameter
    half = diameter / 2
    if shape == "gaussian":
        return np.exp(-math.log(2) * r2 / half**2)
    return np.exp(-math.log(2) * (r2 / half**2) ** 4)


def doughnut_profile(grid: Grid, geom: DoughnutGeometry = DoughnutGeometry(),
                     n0: float = DEFAULT_N0) -> IndexProfile:
    """Ring of overlapping written cores, combined by pointwise maximum."""
    reach = geom.ring_diameter / 2 + 2 * geom.core_diameter
    if 2 * reach > grid.window:
        raise ValueError("doughnut geometry does not fit in the grid window")
    X, Y = grid.mesh()
    shape = np.zeros(grid.shape)
    for cx, cy in geom.core_centers():
        np.maximum(shape, _core((X - cx) ** 2 + (Y - cy) ** 2, geom.core_diameter, geom.core_shape),
                   out=shape)
    return IndexProfile(grid, n0 + geom.delta_n * shape, n0, geom.delta_n)


def step_fiber_profile(grid: Grid, core_radius: float, delta_n: float,
                       n0: float = DEFAULT_N0) -> IndexProfile:
    if core_radius <= 0 or 2 * core_radius >= grid.window:
        raise ValueError("core radius must fit inside the window")
    r, _ = grid.polar()
    return IndexProfile(grid, np.where(r <= core_radius, n0 + delta_n, n0), n0, delta_n)


def v_number(core_radius: float, wavelength: float, n0: float, delta_n: float) -> float:
    """Weak-guidance V = k0 a sqrt(2 n0 delta_n)."""
    return 2 * math.pi / wavelength * core_radius * math.sqrt(2 * n0 * delta_n)


def helmholtz_operator(profile: IndexProfile) -> sp.csr_matrix:
    """5-point Laplacian plus k0^2 n^2, zero field beyond the grid edge."""
    g = profile.grid

    def lap1(n, h):
        e = np.ones(n)
        return sp.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1]) / h**2

    # x varies fastest in the flattened (ny, nx) array
    L = sp.kron(sp.identity(g.ny), lap1(g.nx, g.dx)) + sp.kron(lap1(g.ny, g.dy), sp.identity(g.nx))
    return (L + sp.diags((g.k0 * profile.n.ravel()) ** 2)).tocsr()


def solve_modes(profile: IndexProfile, k_modes: int = 4, seed: int = 0,
                tol: float = 1e-12, maxiter: int | None = None) -> list[GuidedMode]:
    """Guided eigenmodes sorted by descending effective index.

    Solves (lap + k0^2 n^2) psi = beta^2 psi by shift-invert Lanczos just above
    the largest possible beta^2 and keeps the modes with n_eff > n0.
    """
    if k_modes < 1:
        raise ValueError("k_modes must be >= 1")
    g = profile.grid
    A = helmholtz_operator(profile)
    n_top = profile.n0 + max(profile.delta_n, 0.0)
    sigma = (g.k0 * n_top) ** 2 * (1 + 1e-9)
    v0 = np.random.default_rng(seed).standard_normal(A.shape[0])
    try:
        vals, vecs = sla.eigsh(A, k=k_modes, sigma=sigma, which="LM", v0=v0, tol=tol,
                               maxiter=maxiter)
    except sla.ArpackNoConvergence as exc:
        raise RuntimeError(f"eigensolver did not converge: {exc}") from exc
    order = np.argsort(-vals)
    modes = []
    for idx in order:
        beta2 = vals[idx]
        if beta2 <= 0:
            continue
        n_eff = math.sqrt(beta2) / g.k0
        if n_eff <= profile.n0:
            continue
        psi = vecs[:, idx].real.reshape(g.shape)
        # fix the sign so repeated solves agree
        if psi.ravel()[np.argmax(np.abs(psi))] < 0:
            psi = -psi
        f = ComplexField(g, psi.astype(np.complex128))
        modes.append(GuidedMode(f.normalized(), n_eff))
    if not modes:
        raise NoGuidedModeError("profile supports no guided mode")
    return modes


def count_guided(profile: IndexProfile, k_modes: int = 10) -> int:
    try:
        return len(solve_modes(profile, k_modes))
    except NoGuidedModeError:
        return 0


def eigen_residual(profile: IndexProfile, mode: GuidedMode) -> float:
    A = helmholtz_operator(profile)
    psi = mode.field.samples.ravel()
    beta2 = (profile.grid.k0 * mode.n_eff) ** 2
    return float(np.linalg.norm(A @ psi - beta2 * psi) / np.linalg.norm(beta2 * psi))


def mode_charge_content(mode: GuidedMode, l_max: int) -> OamSpectrum:
    return oam_spectrum(mode.field, l_max)


def circular_pair(a: GuidedMode, b: GuidedMode) -> tuple[GuidedMode, GuidedMode]:
    """Recombine a degenerate real pair into (a + ib, a - ib) / sqrt 2.

    Returned as (positive-charge, negative-charge), judged by the ell = +/-1
    content of the first combination.
    """
    if a.field.grid != b.field.grid:
        raise ValueError("modes live on different grids")
    sa, sb = a.field.samples, b.field.samples
    plus = ComplexField(a.field.grid, (sa + 1j * sb) / math.sqrt(2)).normalized()
    minus = ComplexField(a.field.grid, (sa - 1j * sb) / math.sqrt(2)).normalized()
    n_eff = 0.5 * (a.n_eff + b.n_eff)
    spec = oam_spectrum(plus, 2)
    if spec[1] < spec[-1]:
        plus, minus = minus, plus
    return GuidedMode(plus, n_eff), GuidedMode(minus, n_eff)

