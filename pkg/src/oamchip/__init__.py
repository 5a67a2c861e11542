"""Desk-scale simulation of twisted light in a doughnut waveguide chip.

Fields live on a centred :class:`Grid` in micrometres. The submodules cover
beam synthesis (:mod:`oamchip.optics`), SLM holography and projection
(:mod:`oamchip.holography`), index profiles and guided modes
(:mod:`oamchip.waveguide`), split-step transport (:mod:`oamchip.propagation`),
measurement emulation (:mod:`oamchip.analysis`) and photon statistics
(:mod:`oamchip.quantum`).
"""

from .analysis import (
    OamSpectrum,
    RingReport,
    interfere,
    net_topological_charge,
    oam_spectrum,
    ring_power_ratio,
)
from .holography import (
    PhaseMask,
    apply_mask,
    far_field,
    fork_hologram,
    phase_flatten_project,
)
from .optics import (
    OBJECTIVES,
    BeamSpec,
    ComplexField,
    Grid,
    ObjectiveSpec,
    bloch_state,
    focused_waist,
    lg_mode,
    overlap,
    power,
    ring_radius,
    superpose,
)
from .propagation import BpmParams, PropagationResult, coupling_sweep, propagate, transmission
from .quantum import (
    CountImage,
    PhotonDistribution,
    SpdcSource,
    g2_zero,
    heralded_distribution,
    iccd_image,
    unheralded_distribution,
)
from .waveguide import (
    DoughnutGeometry,
    GuidedMode,
    IndexProfile,
    NoGuidedModeError,
    doughnut_profile,
    mode_charge_content,
    solve_modes,
    step_fiber_profile,
)

__version__ = "0.1.0"
