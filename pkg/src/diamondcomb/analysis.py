"""Fringe fitting, visibility, fringe shifts, enhancement scans and table output."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .excitation import ExcitationConfig, diamond_levels, population
from .shaper import PhaseMask, experiment1_mask, experiment2_mask, translate_mask, zero_mask

__all__ = [
    "FitError",
    "FringeFit",
    "EnhancementScan",
    "fringe_scan",
    "fit_fringe",
    "visibility",
    "fringe_shift_difference",
    "period_power_ratio",
    "experiment2_edges",
    "default_experiment2_mask",
    "enhancement_scan",
    "format_value",
    "write_table",
]


class FitError(ValueError):
    """Fringe data cannot determine the model parameters."""


@dataclass(frozen=True)
class FringeFit:
    """``y = c1 + c2 * cos^2(h (phi + c3) / 2)``; ``h = 2`` is the usual period-pi fringe."""
    c1: float
    c2: float
    c3: float
    residual_rms: float
    harmonic: int = 2

    def model(self, phi):
        phi = np.asarray(phi, dtype=float)
        return self.c1 + self.c2 * np.cos(self.harmonic * (phi + self.c3) / 2) ** 2

    @property
    def visibility(self) -> float:
        return visibility(self)


@dataclass(frozen=True)
class EnhancementScan:
    """Ratios vs mask translation. ``offsets`` are re-zeroed at the maximum ratio."""
    raw_offsets: np.ndarray
    ratios: np.ndarray
    reference_population: float

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.ratios))

    @property
    def peak_ratio(self) -> float:
        return float(self.ratios[self.peak_index])

    @property
    def peak_offset(self) -> float:
        return float(self.raw_offsets[self.peak_index])

    @property
    def offsets(self) -> np.ndarray:
        return self.raw_offsets - self.peak_offset


def _map(fn, items, workers: int):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def fringe_scan(cfg: ExcitationConfig, phis: Sequence[float], workers: int = 1,
                mask_builder=experiment1_mask) -> list[tuple[float, float]]:
    """Population under ``mask_builder(phi)`` for each phi, in input order."""
    phis = [float(p) for p in phis]
    if len(set(phis)) < 8:
        raise ValueError("a fringe scan needs at least 8 distinct phase values")
    if max(phis) - min(phis) < math.pi:
        raise ValueError("a fringe scan must span at least pi")
    pops = _map(lambda p: population(cfg.replace(mask=mask_builder(p))), phis, workers)
    return list(zip(phis, pops))


def fit_fringe(samples: Iterable[tuple[float, float]], harmonic: int = 2) -> FringeFit:
    """Linear least squares on ``a + b cos(h phi) + c sin(h phi)``.

    Folding back: ``c2 = 2 sqrt(b^2 + c^2)``, ``c1 = a - c2/2``,
    ``c3 = atan2(-c, b) / h`` taken in ``[0, 2 pi / h)``.
    """
    data = np.asarray(list(samples), dtype=float)
    if data.ndim != 2 or data.shape[0] < 4 or data.shape[1] != 2:
        raise FitError("need at least 4 (phi, value) samples")
    if harmonic < 1:
        raise FitError("harmonic must be a positive integer")
    phi, y = data[:, 0], data[:, 1]
    X = np.column_stack([np.ones_like(phi), np.cos(harmonic * phi), np.sin(harmonic * phi)])
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < 3:
        raise FitError("rank-deficient fringe design: phases do not resolve the fringe period")
    a, b, c = coef
    c2 = 2.0 * math.hypot(b, c)
    c1 = a - c2 / 2
    period = 2 * math.pi / harmonic
    c3 = (math.atan2(-c, b) / harmonic) % period if c2 > 0 else 0.0
    if c3 >= period:  # modulo can round up onto the period itself
        c3 = 0.0
    resid = y - X @ coef
    return FringeFit(float(c1), float(c2), float(c3), float(np.sqrt(np.mean(resid ** 2))), harmonic)


def visibility(fit: FringeFit) -> float:
    """``c2 / (2 c1 + c2)``."""
    den = 2 * fit.c1 + fit.c2
    if fit.c1 == 0 and fit.c2 == 0:
        raise FitError("visibility undefined for a zero fringe")
    if den <= 0:
        raise FitError("visibility needs a non-negative fringe (2 c1 + c2 > 0)")
    return fit.c2 / den


def fringe_shift_difference(a: FringeFit, b: FringeFit) -> float:
    """``a.c3 - b.c3`` wrapped to ``(-pi/2, pi/2]``."""
    # IEEE remainder is exact and odd, so swapping a and b flips the sign exactly
    d = math.remainder(a.c3 - b.c3, math.pi)
    return math.pi / 2 if d == -math.pi / 2 else d


def period_power_ratio(values: Sequence[float]) -> float:
    """Spectral power at period pi over power at period 2 pi.

    ``values`` must be a uniform Phi-scan covering exactly one 2 pi period
    (endpoint excluded), so that FFT bins 2 and 1 are those two periods.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 5:
        raise ValueError("need at least 5 uniform samples over 2 pi")
    spec = np.abs(np.fft.rfft(v - v.mean())) ** 2
    return float(spec[2] / spec[1]) if spec[1] > 0 else math.inf


def experiment2_edges(cfg: ExcitationConfig) -> tuple[float, float]:
    """Upper-leg (``i -> f``) frequencies of the two intermediate terms, ascending.

    Each term is represented by its most nearly resonant included level.
    """
    lv = diamond_levels(cfg)
    if len(lv) != 2:
        raise ValueError(f"experiment-2 mask needs two intermediate terms, found {[x.term for x in lv]}")
    f = cfg.final_level
    edge_a, edge_b = sorted(f.energy - x.energy for x in lv)
    return edge_a, edge_b


def default_experiment2_mask(cfg: ExcitationConfig, width_a: float | None = None,
                             width_b: float | None = None, phase: float = math.pi,
                             pixel_width: float = 0.0, pixel_offset: float = 0.0) -> PhaseMask:
    """Experiment-2 mask with edges on the upper-leg resonances.

    Widths default to half the gap between the two edges, so neither band
    reaches the other edge.
    """
    edge_a, edge_b = experiment2_edges(cfg)
    half_gap = (edge_b - edge_a) / 2
    return experiment2_mask(edge_a, edge_b,
                            half_gap if width_a is None else width_a,
                            half_gap if width_b is None else width_b, phase,
                            pixel_width, pixel_offset)


def enhancement_scan(cfg: ExcitationConfig, offsets: Sequence[float], mask: PhaseMask | None = None,
                     workers: int = 1) -> EnhancementScan:
    """Population ratio with the (translated) mask over the zero-mask population."""
    if cfg.mode_policy != "full":
        raise ValueError("enhancement scans need mode_policy='full'; "
                         "the resonant-only sum ignores the off-resonant pairs the mask acts on")
    if not len(offsets):
        raise ValueError("no offsets to scan")
    mask = default_experiment2_mask(cfg) if mask is None else mask
    ref = population(cfg.replace(mask=zero_mask()))
    if ref <= 0:
        raise ValueError("zero-mask population vanishes; ratio undefined")
    offs = [float(o) for o in offsets]
    pops = _map(lambda o: population(cfg.replace(mask=translate_mask(mask, o))), offs, workers)
    return EnhancementScan(np.array(offs), np.array(pops) / ref, ref)


def format_value(x) -> str:
    """Numbers with 12 significant digits; everything else via ``str``."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0.0:
            x = 0.0  # drop the sign of negative zero
        return f"{x:.11e}"
    return str(x)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Comma-separated table with a header row and LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])
    return path
