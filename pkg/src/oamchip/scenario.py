"""Scenario files and the end-to-end runner behind ``oamchip run``.

A scenario is an INI file (``[section]``, ``key = value``, ``#`` comments,
comma-separated lists, case-sensitive keys). Every section is optional; each
present step section adds its artifacts to the run directory and the
manifest is written last.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import io as fio
from .analysis import interfere, net_topological_charge, oam_spectrum, ring_power_ratio
from .holography import matched_smf_waist, projection_spectrum
from .optics import (
    DEFAULT_INPUT_WAIST_MM,
    OBJECTIVES,
    SIX_BLOCH_STATES,
    BeamSpec,
    ComplexField,
    Grid,
    ObjectiveSpec,
    focused_waist,
    lg_mode,
    superpose,
)
from .propagation import (
    COUPLING_OFFSET,
    BpmParams,
    PropagationResult,
    coupling_sweep,
    propagate,
    transmission,
)
from .quantum import SpdcSource, g2_zero, iccd_image
from .waveguide import DoughnutGeometry, doughnut_profile, solve_modes

log = logging.getLogger(__name__)

BUNDLED = ("fig2", "fig3", "suppE", "fig4")


class ConfigError(ValueError):
    def __init__(self, message: str, section: str | None = None, key: str | None = None):
        super().__init__(message)
        self.section = section
        self.key = key


def _line_of(text: str, section: str | None, key: str | None) -> int | None:
    """1-based line of ``key`` inside ``[section]`` (or of the header)."""
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
            if current == section and key is None:
                return no
        elif current == section and key is not None and "=" in s:
            if s.split("=", 1)[0].strip() == key:
                return no
    return None


@dataclass
class ChipConfig:
    ring_diameter: float = 8.0
    n_cores: int = 12
    core_diameter: float = 2.5
    include_center: bool = False
    delta_n: float = 2e-3
    n0: float = 1.51
    core_shape: str = "gaussian"


@dataclass
class CouplingConfig:
    objective: str = "16X"
    input_waist_mm: float = DEFAULT_INPUT_WAIST_MM
    offset: tuple = COUPLING_OFFSET


@dataclass
class TransportConfig:
    ells: tuple = ()
    bloch: tuple = ()
    bloch_ell: int = 1
    superpositions: tuple = ()
    l_max: int = 12
    aperture: float = 10.0
    ref_waist: float = 20.0
    ref_curvature_mm: float = 1.0
    ref_phase: float = 0.0
    ring_radii: tuple = (2.0, 6.0, 6.0, 12.0)
    project: bool = True


@dataclass
class SweepConfig:
    ells: tuple = ()
    objectives: tuple = ()
    spectra: bool = True


@dataclass
class ModesConfig:
    k_modes: int = 4


@dataclass
class QuantumConfig:
    lambdas: tuple = ()
    eta: float = 1.0


@dataclass
class IccdConfig:
    ells: tuple = ()
    n_photons: int = 20000
    dark_rate_gated: float = 0.0005
    dark_rate_free: float = 0.02


@dataclass
class Scenario:
    name: str = "scenario"
    seed: int = 0
    grid: Grid = field(default_factory=Grid)
    chip: ChipConfig = field(default_factory=ChipConfig)
    bpm: BpmParams = field(default_factory=BpmParams)
    coupling: CouplingConfig = field(default_factory=CouplingConfig)
    objectives: dict = field(default_factory=lambda: dict(OBJECTIVES))
    transport: TransportConfig | None = None
    sweep: SweepConfig | None = None
    modes: ModesConfig | None = None
    quantum: QuantumConfig | None = None
    iccd: IccdConfig | None = None

    def config_hash(self) -> str:
        blob = json.dumps(_canonical(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _canonical(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _canonical(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, float):
        return repr(obj)
    return obj


# --- parsing -----------------------------------------------------------------

def _as_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _as_list(conv):
    def parse(text: str):
        return tuple(conv(v.strip()) for v in text.split(",") if v.strip())
    return parse


_TYPES = {bool: _as_bool, int: int, float: float, str: str}


def _convert(section: str, key: str, text: str, default):
    try:
        if isinstance(default, bool):
            return _as_bool(text)
        if isinstance(default, tuple):
            conv = float if (default and isinstance(default[0], float)) else str
            if key in ("ells", "lambdas"):
                conv = int if key == "ells" else float
            if key in ("offset", "ring_radii"):
                conv = float
            return _as_list(conv)(text)
        for t, conv in _TYPES.items():
            if isinstance(default, t):
                return conv(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {text!r}: {exc}", section, key) from None


def _fill(cls, section: str, items: dict):
    base = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    kw = {}
    for key, text in items.items():
        if key not in known:
            raise ConfigError(f"[{section}] unknown key {key!r}", section, key)
        kw[key] = _convert(section, key, text, getattr(base, key))
    try:
        return dataclasses.replace(base, **kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}", section) from None


def parse_scenario(text: str, source: str = "<config>") -> Scenario:
    """Parse scenario text; errors name the source line and key."""
    try:
        return _parse(text, source)
    except ConfigError as exc:
        if exc.section is None:
            raise
        line = _line_of(text, exc.section, exc.key)
        where = f"{source}:{line}: " if line else f"{source}: "
        raise ConfigError(where + str(exc), exc.section, exc.key) from None


def _parse(text: str, source: str) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",), strict=True,
                                   default_section="\x00defaults")
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    sc = Scenario()
    sections = {s: dict(cp[s]) for s in cp.sections()}
    unknown = set(sections) - {"scenario", "grid", "chip", "bpm", "coupling", "objectives",
                               "transport", "sweep", "modes", "quantum", "iccd"}
    if unknown:
        first = sorted(unknown)[0]
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}", first)

    if "scenario" in sections:
        meta = dict(sections["scenario"])
        for key in meta:
            if key not in ("name", "seed"):
                raise ConfigError(f"[scenario] unknown key {key!r}", "scenario", key)
        sc.name = meta.get("name", sc.name).strip()
        if "seed" in meta:
            sc.seed = _convert("scenario", "seed", meta["seed"], 0)
    if "grid" in sections:
        g = dict(sections["grid"])
        if "dx" in g and "dy" not in g:
            g["dy"] = g["dx"]
        sc.grid = _fill(Grid, "grid", g)
    if "chip" in sections:
        sc.chip = _fill(ChipConfig, "chip", sections["chip"])
    if "bpm" in sections:
        sc.bpm = _fill(BpmParams, "bpm", {k: v for k, v in sections["bpm"].items()})
    if "coupling" in sections:
        sc.coupling = _fill(CouplingConfig, "coupling", sections["coupling"])
    if "objectives" in sections:
        objs = dict(OBJECTIVES)
        for label, text in sections["objectives"].items():
            vals = _convert("objectives", label, text, (0.0,))
            if len(vals) != 2:
                raise ConfigError(f"[objectives] {label}: expected 'focal_mm, NA'", "objectives", label)
            try:
                objs[label] = ObjectiveSpec(label, vals[0], vals[1])
            except ValueError as exc:
                raise ConfigError(f"[objectives] {label}: {exc}", "objectives", label) from None
        sc.objectives = objs
    for name, cls in (("transport", TransportConfig), ("sweep", SweepConfig),
                      ("modes", ModesConfig), ("quantum", QuantumConfig), ("iccd", IccdConfig)):
        if name in sections:
            setattr(sc, name, _fill(cls, name, sections[name]))
    if sc.transport is not None:
        for label in sc.transport.bloch:
            if label not in SIX_BLOCH_STATES:
                raise ConfigError(f"[transport] unknown Bloch state {label!r}", "transport", "bloch")
        for combo in sc.transport.superpositions:
            try:
                [int(v) for v in combo.split()]
            except ValueError:
                raise ConfigError(f"[transport] superposition {combo!r} must list integer charges",
                                  "transport", "superpositions") from None
    if sc.sweep is not None:
        for label in sc.sweep.objectives:
            if label not in sc.objectives:
                raise ConfigError(f"[sweep] objective {label!r} is not defined", "sweep", "objectives")
    if sc.coupling.objective not in sc.objectives:
        raise ConfigError(f"[coupling] objective {sc.coupling.objective!r} is not defined",
                          "coupling", "objective")
    if len(sc.coupling.offset) != 2:
        raise ConfigError("[coupling] offset must be 'x, y'")
    return sc


def bundled_text(name: str) -> str:
    return resources.files("oamchip.scenarios").joinpath(f"{name}.ini").read_text()


def load_scenario(ref: str) -> Scenario:
    """Parse a scenario from a file path or a bundled scenario name."""
    p = Path(ref)
    if p.exists() and not p.is_dir():
        return parse_scenario(p.read_text(encoding="utf-8"), str(p))
    if ref in BUNDLED:
        return parse_scenario(bundled_text(ref), f"bundled:{ref}")
    raise ConfigError(f"no such scenario file or bundled scenario: {ref}")


def apply_overrides(sc: Scenario, seed=None, dz=None, grid: Grid | None = None) -> Scenario:
    sc = dataclasses.replace(sc)
    if seed is not None:
        sc.seed = int(seed)
    if dz is not None:
        sc.bpm = dataclasses.replace(sc.bpm, dz=float(dz))
    if grid is not None:
        sc.grid = dataclasses.replace(grid, wavelength=sc.grid.wavelength)
    return sc


# --- running -----------------------------------------------------------------

class _Run:
    def __init__(self, sc: Scenario, out: Path, threads: int):
        self.sc = sc
        self.out = out
        self.threads = threads
        self.artifacts: list[Path] = []
        self._profile = None
        self.outputs: dict[str, tuple[ComplexField, ComplexField]] = {}

    @property
    def profile(self):
        if self._profile is None:
            c = self.sc.chip
            geom = DoughnutGeometry(c.ring_diameter, c.n_cores, c.core_diameter, c.include_center,
                                    c.delta_n, c.core_shape)
            self._profile = doughnut_profile(self.sc.grid, geom, c.n0)
        return self._profile

    def waist(self, label=None) -> float:
        obj = self.sc.objectives[label or self.sc.coupling.objective]
        return focused_waist(obj, self.sc.coupling.input_waist_mm, self.sc.grid.wavelength)

    def add(self, *paths):
        for p in paths:
            self.artifacts.append(Path(p))
            if Path(p).suffix == ".pgm" and Path(p).with_suffix(".txt").exists():
                self.artifacts.append(Path(p).with_suffix(".txt"))

    # steps

    def step_modes(self):
        modes = solve_modes(self.profile, self.sc.modes.k_modes, seed=self.sc.seed)
        d = self.out / "modes"
        self.add(*fio.write_modes(d, modes))
        for i, m in enumerate(modes):
            self.add(fio.write_intensity_pgm(d / f"mode_{i:02d}.pgm", m.field.intensity))
            self.add(fio.write_spectrum_csv(d / f"mode_{i:02d}_spectrum.csv",
                                            oam_spectrum(m.field, 12)))

    def _launch(self, ell: int) -> ComplexField:
        spec = BeamSpec("lg", ell, 0, self.waist(), tuple(self.sc.coupling.offset))
        return lg_mode(self.sc.grid, spec)

    def _emit_state(self, tag: str, src: ComplexField, out: ComplexField, res: PropagationResult):
        t = self.sc.transport
        d = self.out / "transport"
        self.outputs[tag] = (src, out)
        self.add(fio.write_intensity_pgm(d / f"{tag}_in.pgm", src.intensity))
        self.add(fio.write_intensity_pgm(d / f"{tag}_out.pgm", out.intensity))
        pattern = interfere(out, t.ref_waist, t.ref_curvature_mm, t.ref_phase)
        self.add(fio.write_intensity_pgm(d / f"{tag}_interference.pgm", pattern))
        self.add(fio.write_spectrum_csv(d / f"{tag}_spectrum_in.csv", oam_spectrum(src, t.l_max)))
        self.add(fio.write_spectrum_csv(d / f"{tag}_spectrum_out.csv", oam_spectrum(out, t.l_max)))
        if t.project:
            w = matched_smf_waist(self.sc.grid, self.waist())
            proj = projection_spectrum(out, range(-t.l_max, t.l_max + 1), w)
            self.add(fio.write_csv(d / f"{tag}_projection.csv", ["l", "power_fraction"],
                                   [(l, float(v)) for l, v in proj.items()]))
        if res.power_trace:
            self.add(fio.write_trace_csv(d / f"{tag}_trace.csv", res.power_trace))
        return transmission(res, src, t.aperture)

    def step_transport(self):
        t = self.sc.transport
        rows = []
        basis: dict[int, tuple[ComplexField, ComplexField]] = {}

        def run_ell(ell):
            if ell not in basis:
                src = self._launch(ell)
                basis[ell] = (src, propagate(src, self.profile, self.sc.bpm))
            return basis[ell]

        for ell in t.ells:
            src, res = run_ell(ell)
            eff = self._emit_state(f"l{ell:+d}", src, res.output, res)
            rows.append((f"l{ell:+d}", eff))
        # superposed inputs reuse the propagated basis: the equation is linear
        combos = []
        for label in t.bloch:
            if label not in SIX_BLOCH_STATES:
                raise ConfigError(f"[transport] unknown Bloch state {label!r}", "transport", "bloch")
            theta, phi = SIX_BLOCH_STATES[label]
            l = t.bloch_ell
            combos.append((f"bloch_{label}", [(math.cos(theta / 2), l),
                                              (np.exp(1j * phi) * math.sin(theta / 2), -l)]))
        for text in t.superpositions:
            ells = [int(v) for v in text.split()]
            combos.append(("sup_" + "_".join(f"{e:+d}" for e in ells),
                           [(1 / math.sqrt(len(ells)), e) for e in ells]))
        for tag, terms in combos:
            src = superpose([(c, run_ell(e)[0]) for c, e in terms], normalize=False)
            out = superpose([(c, run_ell(e)[1].output) for c, e in terms], normalize=False)
            scale = 1 / math.sqrt(max(float(np.sum(src.intensity) * src.grid.cell_area), 1e-300))
            src, out = src.scaled(scale), out.scaled(scale)
            eff = self._emit_state(tag, src, out, PropagationResult(out, []))
            rows.append((tag, eff))
        d = self.out / "transport"
        self.add(fio.write_csv(d / "efficiency.csv", ["state", "efficiency"], rows))
        charge_rows = []
        for tag, (_, out) in self.outputs.items():
            try:
                q = net_topological_charge(out, self.sc.chip.ring_diameter / 2)
            except ValueError:
                q = "nan"
            charge_rows.append((tag, q))
        self.add(fio.write_csv(d / "charge.csv", ["state", "net_charge"], charge_rows))
        if "l+1" in self.outputs:
            reps = ring_power_ratio(self.outputs["l+1"][1], t.ring_radii)
            self.add(fio.write_csv(d / "rings_l+1.csv",
                                   ["method", "inner_power", "outer_power", "ratio"],
                                   [(r.method, r.inner_power, r.outer_power, r.ratio)
                                    for r in reps.values()]))

    def step_sweep(self):
        s = self.sc.sweep
        beams = [BeamSpec("lg", e, 0, 1.0, tuple(self.sc.coupling.offset)) for e in s.ells]
        objs = [self.sc.objectives[o] for o in s.objectives]
        rows = coupling_sweep(beams, objs, self.profile, self.sc.bpm,
                              self.sc.coupling.input_waist_mm, threads=self.threads)
        d = self.out / "sweep"
        self.add(fio.write_csv(d / "sweep.csv", ["ell", "objective", "waist_um", "efficiency", "error"],
                               [(r.beam.ell, r.objective.label, self.waist(r.objective.label),
                                 float(r.efficiency), r.error or "") for r in rows]))
        bad = [r for r in rows if r.error]
        if bad:
            raise RuntimeError(f"{len(bad)} sweep row(s) failed: {bad[0].error}")
        if s.spectra:
            for r in rows:
                self.add(fio.write_spectrum_csv(
                    d / f"l{r.beam.ell:+d}_{r.objective.label}_spectrum_out.csv",
                    oam_spectrum(r.output, 12)))

    def step_quantum(self):
        q = self.sc.quantum
        rows = [(lam, g2_zero("thermal", SpdcSource(lam)), g2_zero("heralded", SpdcSource(lam), q.eta))
                for lam in q.lambdas]
        self.add(fio.write_csv(self.out / "quantum" / "g2.csv",
                               ["lambda", "g2_thermal", "g2_heralded"], rows))

    def step_iccd(self):
        c = self.sc.iccd
        d = self.out / "iccd"
        for k, ell in enumerate(c.ells):
            tag = f"l{ell:+d}"
            if tag in self.outputs:
                src, out = self.outputs[tag]
            else:
                src = self._launch(ell)
                out = propagate(src, self.profile, self.sc.bpm).output
            for stage, fld in (("before", src), ("after", out)):
                for j, (light, dark) in enumerate((("heralded", c.dark_rate_gated),
                                                   ("thermal", c.dark_rate_free))):
                    seed = self.sc.seed * 1000 + 100 * k + 10 * j + (stage == "after")
                    img = iccd_image(fld, c.n_photons, dark, seed)
                    self.add(fio.write_count_pgm(d / f"{tag}_{stage}_{light}.pgm", img))


def run_scenario(sc: Scenario, out, threads: int = 1) -> dict:
    """Execute every configured step and write ``manifest.json`` last."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(sc, out, threads)
    steps = []
    for name in ("modes", "transport", "sweep", "quantum", "iccd"):
        if getattr(sc, name) is None:
            continue
        log.info("scenario %s: step %s", sc.name, name)
        try:
            getattr(run, f"step_{name}")()
            steps.append({"step": name, "status": "ok"})
        except Exception as exc:
            log.error("step %s failed: %s", name, exc)
            steps.append({"step": name, "status": "error", "error": f"{type(exc).__name__}: {exc}"})
    arts = []
    for p in sorted(set(run.artifacts)):
        data = p.read_bytes()
        arts.append({"path": p.relative_to(out).as_posix(), "bytes": len(data),
                     "sha256": hashlib.sha256(data).hexdigest()})
    manifest = {"scenario": sc.name, "seed": sc.seed, "config_hash": sc.config_hash(),
                "steps": steps, "artifacts": arts,
                "ok": all(s["status"] == "ok" for s in steps)}
    fio.atomic_write(out / "manifest.json", (json.dumps(manifest, indent=2) + "\n").encode())
    return manifest
