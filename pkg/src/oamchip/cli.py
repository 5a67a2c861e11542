"""Command line front end: ``oamchip <subcommand> [options]``.

Angles are given in degrees here and converted to radians before any library
call. Exit status is 0 on success, 1 when a step fails and 2 for usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import re
import sys
from pathlib import Path

from . import io as fio
from .analysis import interfere, oam_spectrum, ring_power_ratio
from .holography import fork_hologram, matched_smf_waist, projection_spectrum
from .optics import SIX_BLOCH_STATES, BeamSpec, Grid, bloch_state, lg_mode
from .propagation import CHIP_LENGTH, BpmParams, coupling_sweep, propagate, transmission
from .quantum import SpdcSource, g2_zero, iccd_image
from .scenario import (
    ConfigError,
    Scenario,
    _Run,
    apply_overrides,
    load_scenario,
    run_scenario,
)
from .waveguide import NoGuidedModeError, solve_modes

log = logging.getLogger("oamchip")


def parse_grid(text: str) -> Grid:
    """``NXxNY:DX`` in samples and micrometres, e.g. ``300x300:0.2``."""
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*:\s*([0-9.eE+-]+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"grid must look like 300x300:0.2, got {text!r}")
    nx, ny, dx = int(m[1]), int(m[2]), float(m[3])
    try:
        return Grid(nx, ny, dx, dx)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _scenario(args) -> Scenario:
    sc = load_scenario(args.config) if args.config else Scenario()
    return apply_overrides(sc, seed=args.seed, dz=args.dz, grid=args.grid)


def _threads(n: int) -> int:
    return (os.cpu_count() or 1) if n == 0 else n


def _need_out(args) -> Path:
    if not args.out:
        raise ConfigError("--out is required for this subcommand")
    return Path(args.out)


# --- subcommands -------------------------------------------------------------

def cmd_gen_beam(args) -> int:
    sc = _scenario(args)
    run = _Run(sc, Path("."), 1)
    waist = args.waist_um if args.waist_um else run.waist(args.objective)
    center = (args.center_x_um, args.center_y_um)
    if args.bloch:
        theta, phi = SIX_BLOCH_STATES[args.bloch]
    elif args.theta_deg is not None:
        theta, phi = math.radians(args.theta_deg), math.radians(args.phi_deg)
    else:
        theta = None
    if theta is None:
        f = lg_mode(sc.grid, BeamSpec("lg", args.ell, args.p, waist, center))
    else:
        f = bloch_state(theta, phi, abs(args.ell) or 1, sc.grid, waist, center)
    out = _need_out(args)
    fio.write_field(out, f)
    if args.pgm:
        fio.write_intensity_pgm(args.pgm, f.intensity)
    if args.hologram:
        fio.write_phase_pgm(args.hologram, fork_hologram(sc.grid, args.ell, args.grating_um).phase)
    return 0


def cmd_build_chip(args) -> int:
    sc = _scenario(args)
    c = sc.chip
    for key in ("delta_n", "ring_diameter", "n_cores", "core_diameter"):
        v = getattr(args, key)
        if v is not None:
            setattr(c, key, v)
    if args.center:
        c.include_center = True
    prof = _Run(sc, Path("."), 1).profile
    fio.write_index(_need_out(args), prof)
    if args.pgm:
        fio.write_intensity_pgm(args.pgm, prof.n - prof.n0)
    return 0


def cmd_solve_modes(args) -> int:
    prof = fio.read_index(args.index)
    try:
        modes = solve_modes(prof, args.k_modes, seed=args.seed or 0)
    except NoGuidedModeError as exc:
        log.error("%s", exc)
        return 1
    fio.write_modes(_need_out(args), modes)
    for i, m in enumerate(modes):
        print(f"mode {i}: n_eff = {m.n_eff:.10f}")
    return 0


def cmd_propagate(args) -> int:
    src = fio.read_field(args.input)
    prof = fio.read_index(args.index)
    params = BpmParams(dz=args.dz or 2.0, length=args.length_um)
    res = propagate(src, prof, params)
    out = _need_out(args)
    fio.write_field(out / "output.fld", res.output)
    fio.write_trace_csv(out / "trace.csv", res.power_trace)
    eff = transmission(res, src, args.aperture_um)
    fio.write_csv(out / "efficiency.csv", ["aperture_um", "efficiency"], [(args.aperture_um, eff)])
    print(f"efficiency = {eff:.6g}")
    return 0


def cmd_spectrum(args) -> int:
    spec = oam_spectrum(fio.read_field(args.input), args.l_max)
    fio.write_spectrum_csv(_need_out(args), spec)
    return 0


def cmd_project(args) -> int:
    f = fio.read_field(args.input)
    w = args.smf_waist or matched_smf_waist(f.grid, args.beam_waist_um)
    proj = projection_spectrum(f, range(-args.l_max, args.l_max + 1), w)
    fio.write_csv(_need_out(args), ["l", "power_fraction"], [(l, float(v)) for l, v in proj.items()])
    return 0


def cmd_interfere(args) -> int:
    f = fio.read_field(args.input)
    pattern = interfere(f, args.ref_waist_um, args.ref_curvature_mm, math.radians(args.ref_phase_deg),
                        args.ref_amplitude)
    fio.write_intensity_pgm(_need_out(args), pattern)
    return 0


def cmd_rings(args) -> int:
    f = fio.read_field(args.input)
    if len(args.radii_um) != 4:
        raise ConfigError("--radii-um needs four values r1,r2,r3,r4")
    reps = ring_power_ratio(f, args.radii_um, math.radians(args.angle_deg))
    fio.write_csv(_need_out(args), ["method", "inner_power", "outer_power", "ratio"],
                  [(r.method, r.inner_power, r.outer_power, r.ratio) for r in reps.values()])
    return 0


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    run = _Run(sc, Path("."), 1)
    prof = fio.read_index(args.index) if args.index else run.profile
    ells = args.ells or (list(sc.sweep.ells) if sc.sweep else [1, 2])
    labels = args.objectives or (list(sc.sweep.objectives) if sc.sweep else list(sc.objectives))
    objs = [sc.objectives[o] for o in labels]
    beams = [BeamSpec("lg", e, 0, 1.0, tuple(sc.coupling.offset)) for e in ells]
    rows = coupling_sweep(beams, objs, prof, sc.bpm, sc.coupling.input_waist_mm,
                          threads=_threads(args.threads))
    fio.write_csv(_need_out(args), ["ell", "objective", "efficiency", "error"],
                  [(r.beam.ell, r.objective.label, float(r.efficiency), r.error or "") for r in rows])
    return 1 if any(r.error for r in rows) else 0


def cmd_g2(args) -> int:
    rows = [(lam, g2_zero("thermal", SpdcSource(lam)), g2_zero("heralded", SpdcSource(lam), args.eta))
            for lam in args.lambdas]
    fio.write_csv(_need_out(args), ["lambda", "g2_thermal", "g2_heralded"], rows)
    return 0


def cmd_iccd(args) -> int:
    f = fio.read_field(args.input)
    img = iccd_image(f, args.n_photons, args.dark_rate, args.seed or 0)
    fio.write_count_pgm(_need_out(args), img)
    return 0


def cmd_run(args) -> int:
    if not args.config:
        raise ConfigError("run needs --config <path or bundled name>")
    sc = _scenario(args)
    out = Path(args.out) if args.out else Path("runs") / sc.name
    manifest = run_scenario(sc, out, _threads(args.threads))
    for s in manifest["steps"]:
        print(f"{s['step']}: {s['status']}" + (f" ({s['error']})" if "error" in s else ""))
    print(f"{len(manifest['artifacts'])} artifacts, manifest at {out / 'manifest.json'}")
    return 0 if manifest["ok"] else 1


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file or bundled name (fig2, fig3, suppE, fig4)")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--seed", type=_seed, default=None, help="unsigned 64-bit seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    common.add_argument("--dz", type=float, default=None, help="propagation step in um")
    common.add_argument("--grid", type=parse_grid, default=None, help="NXxNY:DX_um")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="oamchip", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    s = add("gen-beam", cmd_gen_beam, "synthesize an LG beam or Bloch state (OAMFLD01)")
    s.add_argument("--ell", type=int, default=1)
    s.add_argument("--p", type=int, default=0)
    s.add_argument("--waist-um", type=float, default=None,
                   help="beam waist; default is the focal waist of --objective")
    s.add_argument("--objective", default=None)
    s.add_argument("--center-x-um", type=float, default=0.0)
    s.add_argument("--center-y-um", type=float, default=0.0)
    s.add_argument("--bloch", choices=sorted(SIX_BLOCH_STATES))
    s.add_argument("--theta-deg", type=float, default=None)
    s.add_argument("--phi-deg", type=float, default=0.0)
    s.add_argument("--pgm", help="also write an intensity PGM")
    s.add_argument("--hologram", help="also write the fork hologram phase PGM")
    s.add_argument("--grating-um", type=float, default=2.0)

    s = add("build-chip", cmd_build_chip, "write the doughnut index profile (OAMIDX01)")
    s.add_argument("--delta-n", type=float, default=None)
    s.add_argument("--ring-diameter", type=float, default=None, help="um")
    s.add_argument("--n-cores", type=int, default=None)
    s.add_argument("--core-diameter", type=float, default=None, help="um")
    s.add_argument("--center", action="store_true", help="add the central core")
    s.add_argument("--pgm", help="also write an index-contrast PGM")

    s = add("solve-modes", cmd_solve_modes, "guided modes of an index profile")
    s.add_argument("--index", required=True)
    s.add_argument("--k-modes", type=int, default=4)

    s = add("propagate", cmd_propagate, "split-step propagation through an index profile")
    s.add_argument("--input", required=True)
    s.add_argument("--index", required=True)
    s.add_argument("--length-um", type=float, default=CHIP_LENGTH)
    s.add_argument("--aperture-um", type=float, default=10.0)

    s = add("spectrum", cmd_spectrum, "azimuthal OAM power spectrum (CSV)")
    s.add_argument("--input", required=True)
    s.add_argument("--l-max", type=int, default=12)

    s = add("project", cmd_project, "phase-flattening projection spectrum (CSV)")
    s.add_argument("--input", required=True)
    s.add_argument("--l-max", type=int, default=6)
    s.add_argument("--smf-waist", type=float, default=None, help="far-field fiber waist, rad/um")
    s.add_argument("--beam-waist-um", type=float, default=5.69,
                   help="beam waist used to match the fiber when --smf-waist is absent")

    s = add("interfere", cmd_interfere, "interference with a Gaussian reference (PGM)")
    s.add_argument("--input", required=True)
    s.add_argument("--ref-waist-um", type=float, default=20.0)
    s.add_argument("--ref-curvature-mm", type=float, default=1.0)
    s.add_argument("--ref-phase-deg", type=float, default=0.0)
    s.add_argument("--ref-amplitude", type=float, default=1.0)

    s = add("rings", cmd_rings, "outer-to-inner ring power ratio (CSV)")
    s.add_argument("--input", required=True)
    s.add_argument("--radii-um", type=_floats, default=[2.0, 6.0, 6.0, 12.0])
    s.add_argument("--angle-deg", type=float, default=0.0)

    s = add("sweep", cmd_sweep, "coupling efficiency over charges and objectives (CSV)")
    s.add_argument("--index", default=None, help="index profile; default builds the configured chip")
    s.add_argument("--ells", type=_ints, default=None)
    s.add_argument("--objectives", type=lambda t: [v.strip() for v in t.split(",") if v.strip()],
                   default=None)

    s = add("g2", cmd_g2, "thermal and heralded g2(0) against lambda (CSV)")
    s.add_argument("--lambdas", type=_floats, default=[0.05, 0.1, 0.2, 0.3, 0.4, 0.5])
    s.add_argument("--eta", type=float, default=1.0)

    s = add("iccd", cmd_iccd, "photon-counting camera frame of a field (PGM)")
    s.add_argument("--input", required=True)
    s.add_argument("--n-photons", type=int, default=20000)
    s.add_argument("--dark-rate", type=float, default=0.0, help="mean dark counts per pixel")

    add("run", cmd_run, "run a scenario and write a manifest")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"oamchip: config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"oamchip {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
