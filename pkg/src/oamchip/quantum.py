"""Photon-number statistics of the pair source and single-photon imaging.

Images are drawn with ``numpy.random.Generator(PCG64(seed))``: first a
multinomial draw of the signal photons over the flattened (row-major, x
fastest) intensity distribution, then one Poisson draw per pixel for dark
counts, in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .optics import ComplexField, Grid, _frozen

TAIL_TOL = 1e-20


@dataclass(frozen=True)
class SpdcSource:
    lambda_nl: float

    def __post_init__(self):
        if not 0 <= self.lambda_nl < 1:
            raise ValueError("the squeezing parameter must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class PhotonDistribution:
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p < 0):
            raise ValueError("photon distribution must be a nonnegative 1-D array")
        object.__setattr__(self, "p", _frozen(p / p.sum()))

    @property
    def n_max(self) -> int:
        return self.p.size - 1

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.p.size)

    @property
    def mean(self) -> float:
        return float(np.dot(self.n, self.p))

    @property
    def variance(self) -> float:
        return float(np.dot((self.n - self.mean) ** 2, self.p))

    def factorial_moment2(self) -> float:
        n = self.n
        return float(np.dot(n * (n - 1), self.p))

    def g2(self) -> float:
        m = self.mean
        if m == 0:
            raise ZeroDivisionError("g2 is undefined for the vacuum")
        return self.factorial_moment2() / m**2


def truncation(lambda_nl: float, tail: float = TAIL_TOL) -> int:
    """Smallest n_max whose neglected geometric tail lambda^(2(n_max+1)) < tail."""
    if lambda_nl == 0:
        return 0
    return max(1, math.ceil(math.log(tail) / math.log(lambda_nl**2)))


def unheralded_distribution(source: SpdcSource, n_max: int | None = None) -> PhotonDistribution:
    """Reduced one-arm statistics, p(n) = (1 - lambda^2) lambda^(2n)."""
    lam = source.lambda_nl
    if n_max is None:
        n_max = truncation(lam)
    n = np.arange(n_max + 1)
    return PhotonDistribution((1 - lam**2) * lam ** (2 * n))


def poisson_distribution(mean: float, n_max: int | None = None) -> PhotonDistribution:
    """Coherent-light statistics; the default cut leaves a tail far below 1e-20."""
    if mean < 0:
        raise ValueError("mean photon number must be nonnegative")
    if n_max is None:
        n_max = math.ceil(mean + 12 * math.sqrt(mean) + 30) if mean > 0 else 0
    return PhotonDistribution(poisson.pmf(np.arange(n_max + 1), mean))


def heralded_distribution(source: SpdcSource, eta: float = 1.0, n_max: int | None = None
                          ) -> PhotonDistribution:
    """Arm-A photon statistics conditioned on a click in arm B.

    Built in the truncated two-mode number basis: the pair state
    sum_n lambda^n |n, n>, the click operator 1 - (1 - eta)^(n_B) on arm B,
    then a partial trace over B.
    """
    if not 0 < eta <= 1:
        raise ValueError("herald efficiency must lie in (0, 1]")
    lam = source.lambda_nl
    if lam == 0:
        raise ValueError("no herald events at lambda = 0")
    if n_max is None:
        n_max = truncation(lam)
    d = n_max + 1
    psi = np.zeros((d, d))
    idx = np.arange(d)
    psi[idx, idx] = lam**idx * math.sqrt(1 - lam**2)
    click = 1 - (1 - eta) ** idx
    # rho_A = Tr_B[ (1 x Pi_B) |psi><psi| ]
    rho_a = (psi * click[None, :]) @ psi.T
    return PhotonDistribution(np.clip(np.diag(rho_a), 0, None))


def g2_zero(kind: str, source: SpdcSource | None = None, eta: float = 1.0) -> float:
    if kind == "coherent":
        return 1.0
    if kind == "thermal":
        if source is None or source.lambda_nl == 0:
            return 2.0
        return unheralded_distribution(source).g2()
    if kind == "heralded":
        if source is None:
            raise ValueError("heralded g2 needs a source")
        if source.lambda_nl == 0:
            return 0.0
        return heralded_distribution(source, eta).g2()
    raise ValueError(f"unknown light kind {kind!r}")


@dataclass(frozen=True, eq=False)
class CountImage:
    grid: Grid
    counts: np.ndarray
    n_photons: int
    dark_rate: float
    seed: int
    signal_total: int
    dark_total: int

    def __post_init__(self):
        object.__setattr__(self, "counts", _frozen(np.asarray(self.counts, dtype=np.int64)))


def iccd_image(field: ComplexField, n_photons: int, dark_rate: float = 0.0, seed: int = 0
               ) -> CountImage:
    """Photon-counting frame of ``field`` with uniform dark counts."""
    if n_photons < 0 or dark_rate < 0:
        raise ValueError("photon number and dark rate must be nonnegative")
    g = field.grid
    rng = np.random.Generator(np.random.PCG64(seed))
    I = field.intensity.ravel()
    total = I.sum()
    if n_photons > 0:
        if total == 0:
            raise ValueError("cannot draw photons from a zero-power field")
        signal = rng.multinomial(n_photons, I / total)
    else:
        signal = np.zeros(I.size, dtype=np.int64)
    dark = rng.poisson(dark_rate, I.size) if dark_rate > 0 else np.zeros(I.size, dtype=np.int64)
    counts = (signal + dark).reshape(g.shape)
    return CountImage(g, counts, int(n_photons), float(dark_rate), int(seed),
                      int(signal.sum()), int(dark.sum()))
