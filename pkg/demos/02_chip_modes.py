"""Guided modes of the twelve-core doughnut.

Twelve evanescently coupled cores on a 4 um radius ring form a ring
supermode lattice. The lowest three modes are a charge-0 ring and a
degenerate pair whose circular combinations carry charge +1 and -1.
"""

from oamchip import Grid, doughnut_profile, mode_charge_content, solve_modes
from oamchip.waveguide import circular_pair

grid = Grid()
profile = doughnut_profile(grid)
print(f"index contrast {profile.delta_n:.1e} on a {grid.nx}x{grid.ny} grid at {grid.dx} um")

modes = solve_modes(profile, 4)
for i, m in enumerate(modes):
    s = mode_charge_content(m, 12)
    top = sorted(s.as_dict().items(), key=lambda kv: -kv[1])[:2]
    print(f"mode {i}: n_eff = {m.n_eff:.7f}, charge content "
          + ", ".join(f"P({l:+d})={p:.3f}" for l, p in top))

plus, minus = circular_pair(modes[1], modes[2])
print(f"\ncircular pair: P(+1) = {mode_charge_content(plus, 12)[1]:.5f}, "
      f"P(-1) = {mode_charge_content(minus, 12)[-1]:.5f}")
