"""Command-line driver: ``diamondcomb <experiment> --config run.yaml``.

Exit codes: 0 success, 2 configuration error, 3 physics or validation
failure, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import platform
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (FitError, enhancement_scan, experiment2_edges, fit_fringe, fringe_scan,
                       period_power_ratio, write_table)
from .comb import nearest_mode, nearest_pair_sum
from .config import EXPERIMENTS, ConfigError, RunConfig, load_run_config
from .excitation import ExcitationConfig, ExcitationError, diamond_levels, path_table, population
from .shaper import PhaseMask, experiment1_mask, experiment2_mask, translate_mask, zero_mask

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_NUMERIC = 0, 2, 3, 4


class ValidationFailure(RuntimeError):
    """Configuration parses but fails a physics check."""


class NumericalFailure(RuntimeError):
    """Computation produced non-finite or otherwise unusable numbers."""


# ---------------------------------------------------------------------------
# validation

@dataclass
class Transition:
    label: str
    mode: int | None
    detuning: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return abs(self.detuning) <= self.tolerance


@dataclass
class ValidationReport:
    diamond: list[Transition] = field(default_factory=list)
    other_ground: list[tuple[str, float]] = field(default_factory=list)
    min_other_MHz: float | None = None
    resolution_MHz: float = 1.0
    messages: list[str] = field(default_factory=list)

    def _rounded(self, d: float) -> float:
        r = self.resolution_MHz
        return round(abs(d) / 1e6 / r) * r

    def _isolated(self, d: float) -> bool:
        return self.min_other_MHz is None or self._rounded(d) >= self.min_other_MHz

    @property
    def other_ok(self) -> bool:
        return all(self._isolated(d) for _, d in self.other_ground)

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.diamond) and self.other_ok and not self.messages

    def lines(self) -> list[str]:
        out = ["diamond transitions (nearest comb mode, detuning, tolerance):"]
        for t in self.diamond:
            mode = "-" if t.mode is None else str(t.mode)
            out.append(f"  {t.label:35s} N={mode:>9s}  {t.detuning / 1e6:+9.4f} MHz"
                       f"  |d| <= {t.tolerance / 1e6:.2f} MHz  {'ok' if t.ok else 'FAIL'}")
        if self.other_ground:
            if self.min_other_MHz is None:
                out.append("other ground state (reported only):")
            else:
                out.append(f"other ground state (need >= {self.min_other_MHz:g} MHz at "
                           f"{self.resolution_MHz:g} MHz resolution):")
            for label, d in self.other_ground:
                tag = "" if self.min_other_MHz is None else ("ok" if self._isolated(d) else "FAIL")
                out.append(f"  {label:35s} {d / 1e6:+9.4f} MHz  ~{self._rounded(d):g} MHz  {tag}".rstrip())
        out.extend(self.messages)
        out.append("VALID" if self.ok else "INVALID")
        return out


def validate_run(run: RunConfig) -> ValidationReport:
    cfg = run.excitation
    comb, atom = cfg.comb, cfg.atom
    g, f = cfg.ground_level, cfg.final_level
    gate = run.validate.get("other_ground_min_detuning_MHz")
    rep = ValidationReport(min_other_MHz=None if gate is None else float(gate),
                           resolution_MHz=float(run.validate.get("resolution_MHz", 1.0)))
    half = comb.f_r / 2
    # report mode minus transition: positive means the comb sits above resonance
    K0, d2 = nearest_pair_sum(comb, f.energy - g.energy)
    d2 = 0.0 - d2
    for lv in diamond_levels(cfg):
        n, d_lo = nearest_mode(comb, lv.energy - g.energy)
        d_lo = 0.0 - d_lo
        m = K0 - n
        if not comb.n_min <= m <= comb.n_max:
            rep.messages.append(f"partner mode {m} of {lv.label} lies outside the comb")
            continue
        d_hi = (comb.f_o + m * comb.f_r) - (f.energy - lv.energy)
        for label, mode, d, tol in ((f"{g.label} -> {lv.label}", n, d_lo, lv.linewidth),
                                    (f"{lv.label} -> {f.label}", m, d_hi, lv.linewidth + f.linewidth)):
            if abs(d) > half:
                rep.messages.append(f"{label}: no comb mode within f_r/2")
            rep.diamond.append(Transition(label, mode, d, tol))
    rep.diamond.append(Transition(f"{g.label} -> {f.label} (two-photon)", None, d2, f.linewidth))

    for og in atom.term_levels(g.term):
        if og.label == g.label:
            continue
        for lv in diamond_levels(cfg):
            _, d = nearest_mode(comb, lv.energy - og.energy)
            rep.other_ground.append((f"{og.label} -> {lv.label}", 0.0 - d))
        _, d = nearest_pair_sum(comb, f.energy - og.energy)
        rep.other_ground.append((f"{og.label} -> {f.label} (two-photon)", 0.0 - d))
    return rep


# ---------------------------------------------------------------------------
# experiments

def _finite(values, what: str):
    if not np.all(np.isfinite(np.asarray(values, dtype=float))):
        raise NumericalFailure(f"non-finite {what}")


def _pixels(run: RunConfig) -> dict:
    return dict(pixel_width=run.base_mask.pixel_width, pixel_offset=run.base_mask.pixel_offset)


def _exp2_mask(run: RunConfig, cfg: ExcitationConfig, **over) -> PhaseMask:
    e = {**run.enhance, **over}

    def hz(key, default):
        return default if e.get(key) is None else float(e[key]) * 1e12

    ea, eb = experiment2_edges(cfg)
    ea, eb = hz("edge_a_THz", ea), hz("edge_b_THz", eb)
    half = (eb - ea) / 2
    try:
        return experiment2_mask(ea, eb, hz("width_a_THz", half), hz("width_b_THz", half),
                                float(e.get("phase_rad", math.pi)), **_pixels(run))
    except ValueError as err:
        raise ConfigError(f"experiment-2 mask: {err}") from None


def run_fringe(run: RunConfig, out: Path, workers: int, figures: bool) -> list[Path]:
    cfg = run.excitation
    lo, hi = run.fringe_window_nm()
    pix = _pixels(run)
    samples = fringe_scan(cfg, run.phi_values(), workers,
                          lambda p: experiment1_mask(p, lo, hi, **pix))
    _finite([s[1] for s in samples], "population")
    fit = fit_fringe(samples)
    files = [write_table(out, ["phi_rad", "population"], samples)]
    files.append(write_table(_sibling(out, "_summary.csv"),
                             ["c1", "c2", "c3_rad", "visibility", "residual_rms"],
                             [[fit.c1, fit.c2, fit.c3, fit.visibility, fit.residual_rms]]))
    if figures:
        from .plotting import plot_fringe
        files.append(plot_fringe(samples, fit, out.with_suffix(".png"),
                                 f"{cfg.ground} -> {cfg.final}, {cfg.geometry}"))
    print(f"visibility {fit.visibility:.4f}  c3 {math.degrees(fit.c3):.2f} deg  "
          f"period-pi power ratio {period_power_ratio([s[1] for s in samples]):.3g}")
    return files


def run_enhance(run: RunConfig, out: Path, workers: int, figures: bool) -> list[Path]:
    cfg = run.excitation.replace(workers=workers)
    scan = enhancement_scan(cfg, run.offsets_Hz(), _exp2_mask(run, cfg), workers=1)
    _finite(scan.ratios, "enhancement ratio")
    rows = zip(scan.offsets, scan.ratios, scan.raw_offsets)
    files = [write_table(out, ["offset_Hz", "ratio", "mask_shift_Hz"], rows)]
    files.append(write_table(_sibling(out, "_summary.csv"),
                             ["peak_ratio", "peak_mask_shift_Hz", "reference_population"],
                             [[scan.peak_ratio, scan.peak_offset, scan.reference_population]]))
    if figures:
        from .plotting import plot_enhancement
        files.append(plot_enhancement(scan, out.with_suffix(".png")))
    print(f"peak ratio {scan.peak_ratio:.4f} at mask shift {scan.peak_offset / 1e9:.1f} GHz")
    return files


def run_paths(run: RunConfig, out: Path, workers: int, figures: bool) -> list[Path]:
    rows = path_table(run.excitation)
    header = ["intermediate", "mode_n", "mode_m", "detuning_Hz", "mu_gi", "mu_if",
              "sign_mu_gi", "sign_mu_if", "rel_amplitude", "phase_deg"]
    table = [[r["intermediate"], r["mode_n"], r["mode_m"], r["detuning_Hz"], r["mu_gi"], r["mu_if"],
              int(np.sign(r["mu_gi"])), int(np.sign(r["mu_if"])), r["rel_amplitude"], r["phase_deg"]]
             for r in rows]
    files = [write_table(out, header, table)]
    if figures:
        from .plotting import plot_paths
        files.append(plot_paths(rows, out.with_suffix(".png"), run.excitation.ground))
    for r in rows:
        print(f"{r['intermediate']:12s} {r['detuning_Hz'] / 1e6:+9.3f} MHz  "
              f"|A| {r['rel_amplitude']:.3f}  phase {r['phase_deg']:+8.2f} deg")
    return files


def _sweep_mask(run: RunConfig, cfg: ExcitationConfig, parameter: str, value: float) -> PhaseMask:
    base = run.scan_mask.get("base", "experiment2")
    if base == "bands":
        mask = run.base_mask
        if parameter == "offset_THz":
            return translate_mask(mask, value * 1e12)
        if parameter == "phase_rad":
            phases = tuple(value if p != 0.0 else 0.0 for p in mask.phases)
            return PhaseMask(mask.breakpoints, phases, mask.pixel_width, mask.pixel_offset)
        if parameter == "pixel_width_GHz":
            return PhaseMask(mask.breakpoints, mask.phases, value * 1e9, mask.pixel_offset)
        raise ConfigError(f"parameter {parameter} does not apply to a band mask")
    if base != "experiment2":
        raise ConfigError("scan_mask.base must be 'experiment2' or 'bands'")
    if parameter == "offset_THz":
        return translate_mask(_exp2_mask(run, cfg), value * 1e12)
    if parameter == "pixel_width_GHz":
        m = _exp2_mask(run, cfg)
        return PhaseMask(m.breakpoints, m.phases, value * 1e9, m.pixel_offset)
    return _exp2_mask(run, cfg, **{parameter: value})


def run_scan_mask(run: RunConfig, out: Path, workers: int, figures: bool) -> list[Path]:
    cfg = run.excitation.replace(workers=workers)
    parameter, values = run.scan_values()
    ref = population(cfg.replace(mask=zero_mask()))
    pops = [population(cfg.replace(mask=_sweep_mask(run, cfg, parameter, v))) for v in values]
    _finite(pops, "population")
    if ref <= 0:
        raise NumericalFailure("zero-mask population vanishes; ratio undefined")
    rows = [(v, p, p / ref) for v, p in zip(values, pops)]
    files = [write_table(out, [parameter, "population", "ratio"], rows)]
    if figures:
        from .plotting import plot_sweep
        files.append(plot_sweep(values, [r[2] for r in rows], out.with_suffix(".png"), parameter))
    best = max(rows, key=lambda r: r[2])
    print(f"best {parameter} = {best[0]:.6g}  ratio {best[2]:.4f}")
    return files


RUNNERS = {"fringe": run_fringe, "enhance": run_enhance, "paths": run_paths, "scan-mask": run_scan_mask}


# ---------------------------------------------------------------------------
# manifest and plumbing

def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _versions() -> dict:
    import matplotlib
    import yaml
    return {"diamondcomb": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "matplotlib": matplotlib.__version__, "pyyaml": yaml.__version__}


def write_manifest(run: RunConfig, out: Path, files: list[Path], args) -> Path:
    cfg = run.excitation
    if run.atom_data_path:
        atom_sum = _sha256(Path(run.atom_data_path))
    else:
        atom_sum = hashlib.sha256(
            resources.files("diamondcomb.data").joinpath("rb87.yaml").read_bytes()).hexdigest()
    manifest = {
        "experiment": run.experiment,
        "config": run.document,
        "config_sha256": _sha256(Path(run.source)) if run.source else None,
        "atom_data": run.atom_data_path or "bundled:rb87.yaml",
        "atom_data_sha256": atom_sum,
        "resolved": {
            "f_r_Hz": cfg.comb.f_r, "f_o_Hz": cfg.comb.f_o,
            "n_min": cfg.comb.n_min, "n_max": cfg.comb.n_max,
            "ground": cfg.ground, "final": cfg.final,
            "mode_policy": cfg.mode_policy, "geometry": cfg.geometry,
            "intermediates": [lv.label for lv in cfg._plan.levels],
        },
        "threads": args.threads,
        "seed": args.seed,
        "versions": _versions(),
        "outputs": {p.name: _sha256(p) for p in files},
    }
    path = _sibling(out, ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="diamondcomb",
                                 description="Shaped-comb two-photon excitation of a diamond atom.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("validate",):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration (YAML)")
        if name != "validate":
            p.add_argument("--output", help="CSV path (default: config output_path or <experiment>.csv)")
            p.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
            p.add_argument("--seed", type=int, default=None, help="reserved; nothing is stochastic")
            p.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    return ap


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = load_run_config(args.config)
        if args.command == "validate":
            rep = validate_run(run)
            print("\n".join(rep.lines()))
            return EXIT_OK if rep.ok else EXIT_PHYSICS
        if run.experiment != args.command:
            raise ConfigError(f"config declares experiment '{run.experiment}', not '{args.command}'")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = Path(args.output or run.output_path or f"{run.experiment}.csv")
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            files = RUNNERS[run.experiment](run, out, args.threads, not args.no_figures)
        write_manifest(run, out, files, args)
        return EXIT_OK
    except ConfigError as e:
        return _fail(EXIT_CONFIG, str(e))
    except (ExcitationError, ValidationFailure) as e:
        return _fail(EXIT_PHYSICS, str(e))
    except (FitError, NumericalFailure, FloatingPointError, np.linalg.LinAlgError) as e:
        return _fail(EXIT_NUMERIC, f"numerical failure: {e}")


if __name__ == "__main__":
    sys.exit(main())
