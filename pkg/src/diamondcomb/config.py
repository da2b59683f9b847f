"""Run configuration: one YAML document per run, unit suffixes in key names."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .atom import AtomDataError, AtomSystem, load_atom_system
from .comb import C_LIGHT, SpectralEnvelope, make_comb
from .excitation import ExcitationConfig, StandingWave
from .shaper import PhaseMask, band_mask, zero_mask
from .yamlio import parse_yaml

__all__ = ["ConfigError", "RunConfig", "load_run_config", "EXPERIMENTS"]

EXPERIMENTS = ("fringe", "enhance", "paths", "scan-mask")

SCHEMA: dict[str, Any] = {
    "experiment": None,
    "atom_data_path": None,
    "ground": None,
    "final": None,
    "output_path": None,
    "comb": {"f_r_Hz", "f_o_Hz", "center_nm", "fwhm_nm", "fwhm_kind", "peak_field", "truncation",
             "n_min", "n_max"},
    "excitation": {"intermediate_window_Hz", "polarization", "mode_policy", "k_window"},
    "geometry": {"kind", "cloud_length_m", "samples", "theta_rad", "signed"},
    "mask": {"bands", "pixel_width_GHz", "offset_GHz"},
    "fringe": {"points", "span_rad", "window_nm"},
    "enhance": {"offsets_THz", "edge_a_THz", "edge_b_THz", "width_a_THz", "width_b_THz", "phase_rad"},
    "scan_mask": {"parameter", "values", "base"},
    "validate": {"other_ground_min_detuning_MHz", "resolution_MHz"},
}

SCAN_PARAMETERS = ("offset_THz", "phase_rad", "width_a_THz", "width_b_THz", "edge_a_THz",
                   "edge_b_THz", "pixel_width_GHz")


class ConfigError(ValueError):
    """Malformed, incomplete or unloadable run configuration."""


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    unknown = set(sec) - SCHEMA[name]
    if unknown:
        raise ConfigError(f"unknown key(s) in '{name}': {', '.join(sorted(unknown))}")
    return sec


def _num(sec: dict, key: str, default=None, where: str = ""):
    v = sec.get(key, default)
    if v is None:
        return None
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}{key} must be a number, got {v!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{where}{key} must be finite")
    return x


def _values(spec, key: str) -> list[float]:
    """Either an explicit list or ``{start, stop, num}`` (inclusive linspace)."""
    if isinstance(spec, dict):
        if set(spec) != {"start", "stop", "num"}:
            raise ConfigError(f"{key} range needs exactly start, stop, num")
        num = int(spec["num"])
        if num < 1:
            raise ConfigError(f"{key}: num must be >= 1")
        return [float(x) for x in np.linspace(float(spec["start"]), float(spec["stop"]), num)]
    if isinstance(spec, (list, tuple)) and spec:
        return [float(x) for x in spec]
    raise ConfigError(f"{key} must be a non-empty list or a start/stop/num mapping")


def _band_hz(band: dict) -> tuple[float, float, float]:
    keys = set(band)
    if "phase_rad" not in keys:
        raise ConfigError("mask band needs phase_rad")
    if {"from_nm", "to_nm"} <= keys:
        a, b = C_LIGHT / (float(band["from_nm"]) * 1e-9), C_LIGHT / (float(band["to_nm"]) * 1e-9)
    elif {"from_THz", "to_THz"} <= keys:
        a, b = float(band["from_THz"]) * 1e12, float(band["to_THz"]) * 1e12
    else:
        raise ConfigError("mask band needs from_nm/to_nm or from_THz/to_THz")
    extra = keys - {"from_nm", "to_nm", "from_THz", "to_THz", "phase_rad"}
    if extra:
        raise ConfigError(f"unknown mask band key(s): {', '.join(sorted(extra))}")
    return min(a, b), max(a, b), float(band["phase_rad"])


@dataclass
class RunConfig:
    experiment: str
    excitation: ExcitationConfig
    base_mask: PhaseMask
    atom_data_path: str | None = None
    output_path: str | None = None
    fringe: dict = field(default_factory=dict)
    enhance: dict = field(default_factory=dict)
    scan_mask: dict = field(default_factory=dict)
    validate: dict = field(default_factory=dict)
    document: dict = field(default_factory=dict)
    source: str | None = None

    # -- experiment parameters with defaults --------------------------------
    def phi_values(self) -> list[float]:
        n = int(self.fringe.get("points", 32))
        span = _num(self.fringe, "span_rad", 2 * math.pi, "fringe.")
        if n < 8:
            raise ConfigError("fringe.points must be >= 8")
        return [float(x) for x in np.arange(n) * (span / n)]

    def fringe_window_nm(self) -> tuple[float, float]:
        w = self.fringe.get("window_nm", [772.0, 784.0])
        if not isinstance(w, (list, tuple)) or len(w) != 2:
            raise ConfigError("fringe.window_nm must be [lo, hi]")
        lo, hi = sorted(float(x) for x in w)
        return lo, hi

    def offsets_Hz(self) -> list[float]:
        spec = self.enhance.get("offsets_THz", {"start": -2.0, "stop": 2.0, "num": 41})
        return [x * 1e12 for x in _values(spec, "enhance.offsets_THz")]

    def scan_values(self) -> tuple[str, list[float]]:
        p = self.scan_mask.get("parameter")
        if p not in SCAN_PARAMETERS:
            raise ConfigError(f"scan_mask.parameter must be one of {', '.join(SCAN_PARAMETERS)}")
        if "values" not in self.scan_mask:
            raise ConfigError("scan_mask.values is required")
        return p, _values(self.scan_mask["values"], "scan_mask.values")


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def build_run_config(doc: dict, base_dir: Path | None = None, source: str | None = None) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("run configuration must be a mapping")
    unknown = set(doc) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    exp = doc.get("experiment")
    _require(exp in EXPERIMENTS, f"experiment must be one of {', '.join(EXPERIMENTS)}, got {exp!r}")

    atom_path = doc.get("atom_data_path")
    try:
        if atom_path is None:
            atom: AtomSystem = load_atom_system(None)
        else:
            p = Path(atom_path)
            if not p.is_absolute() and base_dir is not None:
                p = base_dir / p
            if not p.is_file():
                raise ConfigError(f"atom data file not found: {p}")
            atom = load_atom_system(p)
            atom_path = str(p)
    except AtomDataError as e:
        raise ConfigError(f"atom data {atom_path or '(bundled)'}: {e}") from None

    c = _section(doc, "comb")
    _require("f_r_Hz" in c and "f_o_Hz" in c, "comb.f_r_Hz and comb.f_o_Hz are required")
    f_r, f_o = _num(c, "f_r_Hz", where="comb."), _num(c, "f_o_Hz", where="comb.")
    _require(f_r > 0, f"comb.f_r_Hz must be positive, got {f_r}")
    try:
        env = SpectralEnvelope(center=_num(c, "center_nm", 778.0, "comb.") * 1e-9,
                               fwhm=_num(c, "fwhm_nm", 55.0, "comb.") * 1e-9,
                               peak_field=_num(c, "peak_field", 1.0, "comb."),
                               fwhm_kind=str(c.get("fwhm_kind", "intensity")))
        n_range = None
        if "n_min" in c or "n_max" in c:
            _require("n_min" in c and "n_max" in c, "comb.n_min and comb.n_max go together")
            n_range = (int(c["n_min"]), int(c["n_max"]))
        comb = make_comb(f_r, f_o, env, truncation=_num(c, "truncation", 1e-4, "comb."), n_range=n_range)
    except ValueError as e:
        raise ConfigError(f"comb: {e}") from None

    m = _section(doc, "mask")
    pw = _num(m, "pixel_width_GHz", 0.0, "mask.") * 1e9
    po = _num(m, "offset_GHz", 0.0, "mask.") * 1e9
    bands = m.get("bands") or []
    _require(isinstance(bands, list), "mask.bands must be a list")
    try:
        base_mask = band_mask([_band_hz(b) for b in bands], pw, po) if bands else zero_mask(pw, po)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"mask: {e}") from None

    x = _section(doc, "excitation")
    g = _section(doc, "geometry")
    try:
        standing = StandingWave(cloud_length=_num(g, "cloud_length_m", 1e-3, "geometry."),
                                samples=int(g.get("samples", 20000)),
                                theta=_num(g, "theta_rad", 0.0, "geometry."),
                                signed=bool(g.get("signed", True)))
        exc = ExcitationConfig(
            comb=comb, atom=atom,
            ground=str(doc.get("ground", "5S1/2 F=2")),
            final=str(doc.get("final", "5D3/2 F=1")),
            mask=base_mask,
            intermediate_window=_num(x, "intermediate_window_Hz", 20e6, "excitation."),
            polarization=int(x.get("polarization", 0)),
            geometry=str(g.get("kind", "traveling")),
            standing=standing,
            mode_policy=str(x.get("mode_policy", "full" if exp in ("enhance", "scan-mask") else "resonant")),
            k_window=_num(x, "k_window", 1e3, "excitation."),
        )
    except (ValueError, KeyError) as e:
        raise ConfigError(str(e).strip("'\"")) from None

    return RunConfig(
        experiment=exp, excitation=exc, base_mask=base_mask,
        atom_data_path=atom_path, output_path=doc.get("output_path"),
        fringe=_section(doc, "fringe"), enhance=_section(doc, "enhance"),
        scan_mask=_section(doc, "scan_mask"), validate=_section(doc, "validate"),
        document=doc, source=source,
    )


def load_run_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = parse_yaml(p.read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"{p}: YAML parse error: {e}") from None
    return build_run_config(doc, base_dir=p.parent, source=str(p))
