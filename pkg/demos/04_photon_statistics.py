"""Photon statistics of a pair source and a simulated camera frame.

Each arm of a two-mode squeezed vacuum alone is thermal (g2 = 2). A click
on the partner arm heralds a state much closer to a single photon. The
camera model scatters detected photons over the beam profile and adds
Poisson dark counts, reproducibly for a fixed seed.
"""

from oamchip import SpdcSource, g2_zero, iccd_image, lg_mode
from oamchip.optics import BeamSpec, Grid

for lam in (0.05, 0.1, 0.2, 0.3, 0.5):
    src = SpdcSource(lam)
    print(f"lambda={lam:.2f}: unheralded g2={g2_zero('thermal', src):.3f}, "
          f"heralded g2={g2_zero('heralded', src):.4f}, "
          f"with 50% herald efficiency {g2_zero('heralded', src, 0.5):.4f}")

cam = Grid(64, 64, 1.0, 1.0)
beam = lg_mode(cam, BeamSpec("lg", 1, 0, 10.0))
for dark in (0.0005, 0.02):
    img = iccd_image(beam, 20000, dark, seed=7)
    centre = img.counts[cam.ny // 2 - 1:cam.ny // 2 + 2, cam.nx // 2 - 1:cam.nx // 2 + 2].sum()
    print(f"dark rate {dark}: {img.signal_total} signal + {img.dark_total} dark counts, "
          f"{centre} counts in the 3x3 centre of the doughnut")
