"""Hyperfine level structure and signed dipole angular factors.

Phase convention
----------------
States are coupled as ``|((L S) J, I) F mF>`` with Condon-Shortley phases.
The angular factor of a transition ``from -> to`` with spherical component
``q`` is the matrix element ``<to| C^1_q |from>`` of the rank-1 tensor
``C^1_q = sqrt(4 pi / 3) Y_1q(r_hat)``, reduced via

* Wigner-Eckart: ``(-1)^(F-mF) (F 1 F'; -mF q mF') <F||C||F'>``
* hyperfine:     ``(-1)^(J+I+F'+1) sqrt((2F+1)(2F'+1)) {J F I; F' J' 1}``
* fine structure:``(-1)^(L+S+J'+1) sqrt((2J+1)(2J'+1)) {L J S; J' L' 1}``
* orbital:       ``(-1)^L sqrt((2L+1)(2L'+1)) (L 1 L'; 0 0 0)``

where unprimed labels belong to ``to`` and primed to ``from``. The radial
integrals in the data file are taken positive, so every relative sign
between diamond paths comes from this angular algebra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable

import yaml

from .yamlio import parse_yaml
from .wigner import triangle, twice, wigner_3j, wigner_6j

__all__ = [
    "AtomDataError",
    "HyperfineLevel",
    "Sublevel",
    "Dipole",
    "AtomSystem",
    "angular_dipole_factor",
    "reduced_angular_factor",
    "hyperfine_shift",
    "load_atom_system",
    "default_atom",
    "transition_frequency",
]


class AtomDataError(ValueError):
    """Raised when an atomic-data document is malformed or unphysical."""


def _sign(n2: int) -> int:
    """(-1)**(n2/2) for a doubled, even exponent."""
    if n2 % 2:
        raise ValueError("phase exponent is not an integer")
    return -1 if (n2 // 2) % 2 else 1


@dataclass(frozen=True)
class HyperfineLevel:
    label: str
    term: str
    n: int
    L: int
    J: Fraction
    F: Fraction
    I: Fraction
    energy: float
    linewidth: float
    S: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if not triangle(twice(self.J), twice(self.I), twice(self.F)):
            raise AtomDataError(f"{self.label}: F={self.F} not reachable from J={self.J}, I={self.I}")
        if not triangle(twice(self.L), twice(self.S), twice(self.J)):
            raise AtomDataError(f"{self.label}: J={self.J} not reachable from L={self.L}")
        if self.linewidth < 0 or not math.isfinite(self.energy):
            raise AtomDataError(f"{self.label}: bad energy or linewidth")

    def sublevels(self) -> list["Sublevel"]:
        f2 = twice(self.F)
        return [Sublevel(self, Fraction(m2, 2)) for m2 in range(-f2, f2 + 1, 2)]


@dataclass(frozen=True)
class Sublevel:
    level: HyperfineLevel
    mF: Fraction

    def __post_init__(self):
        if abs(twice(self.mF)) > twice(self.level.F) or (twice(self.level.F) - twice(self.mF)) % 2:
            raise ValueError(f"invalid mF={self.mF} for {self.level.label}")


@dataclass(frozen=True)
class Dipole:
    lower: str
    upper: str
    reduced_moment: float
    sign: int = 1

    @property
    def value(self) -> float:
        return self.sign * self.reduced_moment


def reduced_angular_factor(src: HyperfineLevel, dst: HyperfineLevel) -> float:
    """F-reduced element ``<dst||C^1||src>`` (mF-independent, signed)."""
    a, b = dst, src
    if a.I != b.I or a.S != b.S:
        return 0.0
    F, Fp, J, Jp, L, Lp, I, S = a.F, b.F, a.J, b.J, a.L, b.L, a.I, a.S
    hf = wigner_6j(J, F, I, Fp, Jp, 1)
    fs = wigner_6j(L, J, S, Jp, Lp, 1)
    orb = wigner_3j(L, 1, Lp, 0, 0, 0)
    if hf == 0.0 or fs == 0.0 or orb == 0.0:
        return 0.0
    phase = (_sign(twice(J) + twice(I) + twice(Fp) + 2)
             * _sign(2 * L + twice(S) + twice(Jp) + 2)
             * _sign(2 * L))
    mag = math.sqrt((twice(F) + 1) * (twice(Fp) + 1) * (twice(J) + 1) * (twice(Jp) + 1)
                    * (2 * L + 1) * (2 * Lp + 1))
    return phase * mag * hf * fs * orb


def angular_dipole_factor(src: Sublevel, dst: Sublevel, q: int) -> float:
    """Signed angular factor ``<dst| C^1_q |src>``; zero if forbidden.

    See the module docstring for the phase convention.
    """
    if q not in (-1, 0, 1):
        raise ValueError(f"polarization index must be -1, 0 or +1, got {q}")
    if twice(dst.mF) != twice(src.mF) + 2 * q:
        return 0.0
    F, mF = dst.level.F, dst.mF
    three_j = wigner_3j(F, 1, src.level.F, -mF, q, src.mF)
    if three_j == 0.0:
        return 0.0
    return _sign(twice(F) - twice(mF)) * three_j * reduced_angular_factor(src.level, dst.level)


def hyperfine_shift(F, J, I, A: float, B: float) -> float:
    """Hyperfine energy of level F relative to the term centroid (Hz)."""
    F, J, I = Fraction(F), Fraction(J), Fraction(I)
    K = F * (F + 1) - I * (I + 1) - J * (J + 1)
    shift = float(A) * float(K) / 2
    if B and I > Fraction(1, 2) and J > Fraction(1, 2):
        num = Fraction(3, 2) * K * (K + 1) - 2 * I * (I + 1) * J * (J + 1)
        den = 4 * I * (2 * I - 1) * J * (2 * J - 1)
        shift += float(B) * float(num / den)
    return shift


@dataclass(frozen=True)
class AtomSystem:
    """Immutable set of hyperfine levels plus radial dipole integrals.

    ``levels`` keeps data-file order; downstream sums iterate in that order.
    """
    levels: tuple[HyperfineLevel, ...]
    dipoles: tuple[Dipole, ...]
    species: str = ""
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {lv.label: lv for lv in self.levels})

    def level(self, label: str) -> HyperfineLevel:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown level {label!r}") from None

    def term_levels(self, term: str) -> list[HyperfineLevel]:
        return [lv for lv in self.levels if lv.term == term]

    def radial(self, a: HyperfineLevel, b: HyperfineLevel) -> float:
        """Signed radial integral between the terms of ``a`` and ``b`` (0 if none)."""
        for d in self.dipoles:
            if {d.lower, d.upper} == {a.term, b.term}:
                return d.value
        return 0.0

    def dipole(self, src: Sublevel, dst: Sublevel, q: int) -> float:
        """Full signed dipole element: radial integral times angular factor."""
        r = self.radial(src.level, dst.level)
        if r == 0.0:
            return 0.0
        return r * angular_dipole_factor(src, dst, q)

    def replace_dipole(self, lower: str, upper: str, reduced_moment: float) -> "AtomSystem":
        """Copy with one radial integral changed (used to switch off a branch)."""
        dips = tuple(Dipole(d.lower, d.upper, reduced_moment, d.sign)
                     if (d.lower, d.upper) == (lower, upper) else d for d in self.dipoles)
        return AtomSystem(self.levels, dips, self.species)

    def with_linewidth(self, term: str, linewidth: float) -> "AtomSystem":
        levels = tuple(
            HyperfineLevel(lv.label, lv.term, lv.n, lv.L, lv.J, lv.F, lv.I, lv.energy, linewidth, lv.S)
            if lv.term == term else lv for lv in self.levels)
        return AtomSystem(levels, self.dipoles, self.species)


def transition_frequency(system: AtomSystem, a: HyperfineLevel, b: HyperfineLevel) -> float:
    """Optical frequency ``energy(b) - energy(a)`` in Hz."""
    system.level(a.label), system.level(b.label)
    return b.energy - a.energy


def _half(x, what: str) -> Fraction:
    try:
        return Fraction(twice(x), 2)
    except (ValueError, TypeError) as exc:
        raise AtomDataError(f"{what}: {exc}") from None


def _require(entry: dict, keys: Iterable[str], where: str) -> None:
    missing = [k for k in keys if k not in entry]
    if missing:
        raise AtomDataError(f"{where}: missing field(s) {', '.join(missing)}")


def load_atom_system(source=None) -> AtomSystem:
    """Build a validated :class:`AtomSystem` from a YAML document.

    ``source`` may be a path, a YAML string, an already-parsed mapping, or
    ``None`` for the bundled 87Rb file.
    """
    try:
        if source is None:
            doc = parse_yaml(resources.files("diamondcomb.data").joinpath("rb87.yaml").read_text())
        elif isinstance(source, dict):
            doc = source
        elif isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            path = Path(source)
            if not path.is_file():
                raise FileNotFoundError(f"atomic data file not found: {path}")
            doc = parse_yaml(path.read_text())
        else:
            doc = parse_yaml(source)
    except yaml.YAMLError as e:
        raise AtomDataError(f"atomic data is not valid YAML: {e}") from None
    if not isinstance(doc, dict):
        raise AtomDataError("atomic data document must be a mapping")
    _require(doc, ("nuclear_spin", "terms", "levels", "dipoles"), "document")

    I = _half(doc["nuclear_spin"], "nuclear_spin")
    S = _half(doc.get("electron_spin", 0.5), "electron_spin")
    terms = {}
    for t in doc["terms"]:
        _require(t, ("name", "L", "J", "centroid_Hz", "linewidth_Hz"), f"term {t.get('name', '?')}")
        terms[t["name"]] = t

    levels = []
    for entry in doc["levels"]:
        _require(entry, ("term", "F"), "level")
        name = entry["term"]
        if name not in terms:
            raise AtomDataError(f"level refers to missing term {name!r}")
        t = terms[name]
        J = _half(t["J"], f"{name} J")
        F = _half(entry["F"], f"{name} F")
        energy = float(t["centroid_Hz"]) + hyperfine_shift(
            F, J, I, t.get("hyperfine_A_Hz", 0.0), t.get("hyperfine_B_Hz", 0.0))
        label = entry.get("label", f"{name} F={F}")
        levels.append(HyperfineLevel(label, name, int(t.get("n", 0)), int(t["L"]), J, F, I,
                                     energy, float(t["linewidth_Hz"]), S))

    lowest = min(levels, key=lambda lv: lv.energy) if levels else None
    for lv in levels:
        if lv.term == lowest.term and lv.linewidth != 0.0:
            raise AtomDataError(f"ground level {lv.label} must have zero linewidth")

    dipoles = []
    for d in doc["dipoles"]:
        _require(d, ("lower", "upper", "reduced_moment_au"), "dipole")
        for end in ("lower", "upper"):
            if d[end] not in terms:
                raise AtomDataError(f"dipole refers to missing term {d[end]!r}")
        lo, up = terms[d["lower"]], terms[d["upper"]]
        if abs(int(lo["L"]) - int(up["L"])) != 1:
            raise AtomDataError(f"dipole {d['lower']} -> {d['upper']} violates Delta L = +-1")
        jl, ju = twice(lo["J"]), twice(up["J"])
        if abs(jl - ju) > 2 or jl == ju == 0:
            raise AtomDataError(f"dipole {d['lower']} -> {d['upper']} violates Delta J selection rule")
        sign = int(d.get("sign", 1))
        if sign not in (-1, 1):
            raise AtomDataError(f"dipole sign must be +1 or -1, got {sign}")
        dipoles.append(Dipole(d["lower"], d["upper"], float(d["reduced_moment_au"]), sign))

    for ref in doc.get("reference_splittings", []):
        hi = [lv for lv in levels if lv.term == ref["term"] and lv.F == _half(ref["upper_F"], "F")]
        lo = [lv for lv in levels if lv.term == ref["term"] and lv.F == _half(ref["lower_F"], "F")]
        if not hi or not lo:
            raise AtomDataError(f"reference splitting names a missing level in {ref['term']}")
        if abs((hi[0].energy - lo[0].energy) - float(ref["splitting_Hz"])) > 1e3:
            raise AtomDataError(f"{ref['term']} F={ref['upper_F']}-{ref['lower_F']} splitting "
                                f"differs from reference by more than 1 kHz")

    return AtomSystem(tuple(levels), tuple(dipoles), str(doc.get("species", "")))


def default_atom() -> AtomSystem:
    """The bundled 87Rb system."""
    return load_atom_system(None)
