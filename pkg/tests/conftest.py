"""Shared fixtures.

Full-length chip propagations take tens of seconds each, so they are cached
for the whole session in :class:`ChipRuns` and shared between test modules.
"""

from __future__ import annotations

import pytest

from oamchip.optics import OBJECTIVES, BeamSpec, Grid, focused_waist, lg_mode
from oamchip.propagation import COUPLING_OFFSET, BpmParams, propagate, transmission
from oamchip.waveguide import doughnut_profile, solve_modes

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


class ChipRuns:
    """Memoized launches through the default doughnut chip."""

    def __init__(self, grid, profile):
        self.grid = grid
        self.profile = profile
        self._cache = {}

    def waist(self, objective="16X"):
        return focused_waist(OBJECTIVES[objective], 0.48, self.grid.wavelength)

    def run(self, ell, waist=None, offset=COUPLING_OFFSET, dz=2.0):
        """(input field, PropagationResult, efficiency) for LG_{0,ell}."""
        w = self.waist() if waist is None else waist
        key = (ell, round(w, 9), tuple(offset), dz)
        if key not in self._cache:
            src = lg_mode(self.grid, BeamSpec("lg", ell, 0, w, tuple(offset)))
            res = propagate(src, self.profile, BpmParams(dz=dz))
            self._cache[key] = (src, res, transmission(res, src))
        return self._cache[key]


@pytest.fixture(scope="session")
def grid():
    return Grid()


@pytest.fixture(scope="session")
def chip_profile(grid):
    return doughnut_profile(grid)


@pytest.fixture(scope="session")
def chip_modes(chip_profile):
    return solve_modes(chip_profile, 4)


@pytest.fixture(scope="session")
def chip(grid, chip_profile):
    return ChipRuns(grid, chip_profile)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
