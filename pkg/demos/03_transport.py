"""Send twisted beams through the chip and look at what comes out.

Each launch takes about half a minute on one core. First-order beams keep
their charge and couple well; higher orders mostly leak away, and what
survives has been converted to charge +1 or -1 with the sign of the input.
"""

from oamchip import OBJECTIVES, doughnut_profile, oam_spectrum, propagate, transmission
from oamchip.optics import Grid
from oamchip.propagation import BpmParams, launch

grid = Grid()
profile = doughnut_profile(grid)

for ell in (0, 1, -1, 3):
    src = launch(grid, ell, OBJECTIVES["16X"])
    res = propagate(src, profile, BpmParams())
    s = oam_spectrum(res.output, 8)
    print(f"input l={ell:+d}: efficiency {transmission(res, src):.3g}, "
          f"output charge {s.argmax():+d} with weight {s[s.argmax()]:.3f}")
