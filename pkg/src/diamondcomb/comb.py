"""Optical frequency comb: mode frequencies, Gaussian envelope, two-photon pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

__all__ = [
    "C_LIGHT",
    "SpectralEnvelope",
    "CombSpec",
    "mode_frequency",
    "mode_index_near",
    "nearest_mode",
    "nearest_pair_sum",
    "envelope_field",
    "two_photon_pairs",
    "pair_count",
    "make_comb",
    "F2_COMB",
    "F1_COMB",
]

C_LIGHT = 299792458.0

# (f_r, f_o) settings that tune the comb onto the diamond from each ground state
F2_COMB = (100.59660605e6, 16.94e6)
F1_COMB = (100.59660525e6, 16.94e6)


@dataclass(frozen=True)
class SpectralEnvelope:
    """Gaussian spectral envelope.

    ``center`` and ``fwhm`` are wavelengths in metres. ``fwhm_kind`` says
    whether ``fwhm`` is the intensity (default) or field FWHM. The
    wavelength FWHM maps onto the frequency interval
    ``c/(center - fwhm/2) - c/(center + fwhm/2)``.
    """
    center: float = 778e-9
    fwhm: float = 55e-9
    peak_field: float = 1.0
    fwhm_kind: str = "intensity"

    def __post_init__(self):
        if not (self.center > 0 and self.fwhm > 0 and self.peak_field >= 0):
            raise ValueError("envelope needs center > 0, fwhm > 0, peak_field >= 0")
        if self.fwhm_kind not in ("intensity", "field"):
            raise ValueError(f"fwhm_kind must be 'intensity' or 'field', got {self.fwhm_kind!r}")
        if self.fwhm >= 2 * self.center:
            raise ValueError("fwhm must be smaller than twice the center wavelength")

    @property
    def center_frequency(self) -> float:
        return C_LIGHT / self.center

    @property
    def intensity_fwhm_frequency(self) -> float:
        dnu = C_LIGHT / (self.center - self.fwhm / 2) - C_LIGHT / (self.center + self.fwhm / 2)
        return dnu if self.fwhm_kind == "intensity" else dnu / math.sqrt(2)

    def field(self, nu):
        """Field amplitude at optical frequency ``nu`` (scalar or array)."""
        x = (np.asarray(nu, dtype=float) - self.center_frequency) / self.intensity_fwhm_frequency
        return self.peak_field * np.exp(-2.0 * math.log(2.0) * x * x)


@dataclass(frozen=True)
class CombSpec:
    f_r: float
    f_o: float
    n_min: int
    n_max: int
    envelope: SpectralEnvelope = SpectralEnvelope()

    def __post_init__(self):
        if not self.f_r > 0:
            raise ValueError(f"repetition frequency must be positive, got {self.f_r}")
        if not 0 <= self.f_o < self.f_r:
            raise ValueError(f"offset frequency must lie in [0, f_r), got {self.f_o}")
        if not self.n_min < self.n_max:
            raise ValueError("n_min must be below n_max")
        if self.f_o + self.n_min * self.f_r <= 0:
            raise ValueError("lowest mode frequency must be positive")

    @property
    def n_modes(self) -> int:
        return self.n_max - self.n_min + 1

    def with_envelope(self, **changes) -> "CombSpec":
        return replace(self, envelope=replace(self.envelope, **changes))


def _check_range(comb: CombSpec, N) -> None:
    N = np.asarray(N)
    if N.size and (N.min() < comb.n_min or N.max() > comb.n_max):
        raise IndexError(f"mode index outside [{comb.n_min}, {comb.n_max}]")


def mode_frequency(comb: CombSpec, N, exact: bool = False):
    """``f_o + N*f_r``.

    Floats are the correctly rounded exact value. ``exact=True`` returns a
    :class:`~fractions.Fraction` built from the binary values of f_o and f_r,
    for bookkeeping that needs sub-Hz closure on ~400 THz carriers.
    """
    _check_range(comb, N)
    if exact:
        return Fraction(comb.f_o) + int(N) * Fraction(comb.f_r)
    if np.ndim(N) == 0:
        return float(Fraction(comb.f_o) + int(N) * Fraction(comb.f_r))
    N = np.asarray(N, dtype=np.int64)
    n0 = int(N.flat[0]) if N.size else comb.n_min
    # anchor exactly, then add small integer multiples of f_r
    base = Fraction(comb.f_o) + n0 * Fraction(comb.f_r)
    hi = float(base)
    lo = float(base - Fraction(hi))
    return hi + ((N - n0) * comb.f_r + lo)


def mode_index_near(comb: CombSpec, nu: float) -> int:
    """Index of the mode closest to ``nu``; exact ties go to the lower index."""
    x = (Fraction(nu) - Fraction(comb.f_o)) / Fraction(comb.f_r)
    N = math.ceil(x - Fraction(1, 2))
    if not comb.n_min <= N <= comb.n_max:
        raise IndexError(f"frequency {nu:.6e} Hz lies outside the comb")
    return N


def nearest_mode(comb: CombSpec, nu: float) -> tuple[int, float]:
    """``(N, nu - nu_N)`` for the mode closest to ``nu``; detuning exact to the float."""
    N = mode_index_near(comb, nu)
    return N, float(Fraction(nu) - mode_frequency(comb, N, exact=True))


def nearest_pair_sum(comb: CombSpec, nu: float) -> tuple[int, float]:
    """``(K, nu - (K f_r + 2 f_o))`` for the two-photon pair sum closest to ``nu``.

    No range check: ``K`` may have no in-range pair.
    """
    x = (Fraction(nu) - 2 * Fraction(comb.f_o)) / Fraction(comb.f_r)
    K = math.ceil(x - Fraction(1, 2))
    return K, float(Fraction(nu) - K * Fraction(comb.f_r) - 2 * Fraction(comb.f_o))


def envelope_field(comb: CombSpec, nu):
    """Envelope field amplitude (arbitrary units) at ``nu``."""
    return comb.envelope.field(nu)


def pair_count(comb: CombSpec, K: int) -> int:
    lo = max(comb.n_min, K - comb.n_max)
    hi = min(comb.n_max, K - comb.n_min)
    if lo > hi:
        return 0
    return (hi - lo) // 2 + 1


def two_photon_pairs(comb: CombSpec, K: int) -> np.ndarray:
    """All ``(n, K-n)`` with ``n <= K-n`` and both indices in range, ascending n.

    Returns an ``(count, 2)`` integer array (possibly empty).
    """
    lo = max(comb.n_min, K - comb.n_max)
    hi = min(comb.n_max, K - comb.n_min)
    if lo > hi:
        return np.empty((0, 2), dtype=np.int64)
    n = np.arange(lo, min(hi, K // 2) + 1, dtype=np.int64)
    return np.stack([n, K - n], axis=1)


def make_comb(f_r: float, f_o: float, envelope: SpectralEnvelope | None = None,
              truncation: float = 1e-4, n_range: tuple[int, int] | None = None) -> CombSpec:
    """Comb whose mode range covers the envelope down to ``truncation`` of peak field."""
    envelope = envelope or SpectralEnvelope()
    if n_range is None:
        if not 0 < truncation < 1:
            raise ValueError("truncation must lie in (0, 1)")
        half = envelope.intensity_fwhm_frequency * math.sqrt(math.log(1 / truncation) / (2 * math.log(2)))
        nu_c = envelope.center_frequency
        n_lo = math.ceil((max(nu_c - half, f_r) - f_o) / f_r)
        n_hi = math.floor((nu_c + half - f_o) / f_r)
        n_range = (n_lo, n_hi)
    return CombSpec(f_r, f_o, int(n_range[0]), int(n_range[1]), envelope)
