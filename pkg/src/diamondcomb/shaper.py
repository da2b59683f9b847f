"""Pixelated, translatable piecewise-constant spectral phase (the pulse shaper)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .comb import C_LIGHT

__all__ = [
    "PhaseMask",
    "mask_phase_at",
    "zero_mask",
    "constant_mask",
    "band_mask",
    "experiment1_mask",
    "experiment2_mask",
    "translate_mask",
]


@dataclass(frozen=True)
class PhaseMask:
    """Piecewise-constant phase in optical frequency.

    ``phases[k]`` applies on ``[breakpoints[k-1], breakpoints[k])`` with the
    outer segments running to -inf/+inf. Phases are kept unwrapped; only
    ``exp(i*phase)`` is ever consumed. ``pixel_width`` > 0 samples the mask
    at pixel centres, pixels anchored at ``pixel_offset``. ``shift`` is the
    accumulated translation applied to breakpoints and pixel grid alike; it is
    kept separate so translations compose exactly.
    """
    breakpoints: tuple[float, ...] = ()
    phases: tuple[float, ...] = (0.0,)
    pixel_width: float = 0.0
    pixel_offset: float = 0.0
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if len(self.phases) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one more phase than breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not all(math.isfinite(p) for p in self.phases):
            raise ValueError("phases must be finite")
        if self.pixel_width < 0:
            raise ValueError("pixel_width must be >= 0")

    @property
    def edges(self) -> tuple[float, ...]:
        """Breakpoints after translation."""
        return tuple(b + self.shift for b in self.breakpoints)

    @property
    def is_constant(self) -> bool:
        return len(set(self.phases)) == 1


def mask_phase_at(mask: PhaseMask, nu):
    """Phase applied at optical frequency ``nu`` (scalar or array), right-continuous."""
    x = np.asarray(nu, dtype=float) - mask.shift
    if mask.pixel_width > 0:
        w = mask.pixel_width
        x = mask.pixel_offset + (np.floor((x - mask.pixel_offset) / w) + 0.5) * w
    idx = np.searchsorted(np.asarray(mask.breakpoints), x, side="right")
    out = np.asarray(mask.phases)[idx]
    return float(out) if out.ndim == 0 else out


def zero_mask(pixel_width: float = 0.0, pixel_offset: float = 0.0) -> PhaseMask:
    return PhaseMask((), (0.0,), pixel_width, pixel_offset)


def constant_mask(phase: float) -> PhaseMask:
    return PhaseMask((), (phase,))


def band_mask(bands, pixel_width: float = 0.0, pixel_offset: float = 0.0) -> PhaseMask:
    """Mask from ``(lo_Hz, hi_Hz, phase)`` bands; zero outside, bands must not overlap.

    Zero-width bands are dropped.
    """
    bands = sorted((float(lo), float(hi), float(ph)) for lo, hi, ph in bands if hi > lo)
    for (lo1, hi1, _), (lo2, _, _) in zip(bands, bands[1:]):
        if lo2 < hi1:
            raise ValueError("mask bands overlap")
    bps: list[float] = []
    phs: list[float] = [0.0]
    for lo, hi, ph in bands:
        if bps and bps[-1] == lo:
            phs[-1] = ph
        else:
            bps.append(lo)
            phs.append(ph)
        bps.append(hi)
        phs.append(0.0)
    return PhaseMask(tuple(bps), tuple(phs), pixel_width, pixel_offset)


def experiment1_mask(phi: float, lo_nm: float = 772.0, hi_nm: float = 784.0,
                     pixel_width: float = 0.0, pixel_offset: float = 0.0) -> PhaseMask:
    """Phase ``phi`` on the 772-784 nm window, zero elsewhere."""
    lo, hi = C_LIGHT / (hi_nm * 1e-9), C_LIGHT / (lo_nm * 1e-9)
    return PhaseMask((lo, hi), (0.0, phi, 0.0), pixel_width, pixel_offset)


def experiment2_mask(edge_a: float, edge_b: float, width_a: float, width_b: float,
                     phase: float = math.pi, pixel_width: float = 0.0,
                     pixel_offset: float = 0.0) -> PhaseMask:
    """Two pi-bands ``[edge, edge + width)`` in frequency.

    With each edge on an upper-leg resonance (5P -> 5D), a band holds the
    blue partners of exactly those mode pairs whose red photon sits below
    the corresponding intermediate resonance, flipping their sign relative
    to pairs detuned above it.
    """
    if width_a < 0 or width_b < 0:
        raise ValueError("band widths must be >= 0")
    return band_mask([(edge_a, edge_a + width_a, phase), (edge_b, edge_b + width_b, phase)],
                     pixel_width, pixel_offset)


def translate_mask(mask: PhaseMask, dnu: float) -> PhaseMask:
    """Shift every breakpoint and the pixel grid by ``dnu``."""
    return PhaseMask(mask.breakpoints, mask.phases, mask.pixel_width, mask.pixel_offset,
                     mask.shift + dnu)
