"""Second-order two-photon amplitude summed over comb mode pairs.

For mode pair ``(n, m)`` through intermediate ``i`` the amplitude is::

    E_n E_m mu_gi mu_if / (i*2pi*D_f + pi*gamma_f)
        * [1/(i*2pi*d_i(n) + pi*gamma_i) + 1/(i*2pi*d_i(m) + pi*gamma_i)]

with ``D_f = nu_gf - nu_n - nu_m`` and ``d_i(k) = nu_gi - nu_k``. Fields carry
the shaper phase, ``E_k -> E_k exp(i*phi(nu_k))``. A degenerate pair
``n == m`` has only one time ordering and enters with weight 1/2, so the
sum over unordered pairs equals the sum over ordered photon sequences.

The angular algebra factorises from the mode sums: the detunings depend on
the hyperfine level only, so ``A(g, f) = sum_i M_i[g, f] * S_i`` where
``M_i`` sums the dipole products over the sublevels of ``i`` and ``S_i`` is
the comb sum for that level.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property

import numpy as np

from .atom import AtomSystem, HyperfineLevel, Sublevel, default_atom, reduced_angular_factor
from .comb import C_LIGHT, CombSpec, make_comb, mode_frequency, mode_index_near, F2_COMB
from .shaper import PhaseMask, mask_phase_at, zero_mask

__all__ = [
    "ExcitationError",
    "StandingWave",
    "ExcitationConfig",
    "PathAmplitude",
    "intermediate_factor",
    "pair_amplitude",
    "path_amplitudes",
    "total_amplitude",
    "population",
    "traveling_wave_population",
    "standing_wave_population",
    "path_table",
    "diamond_levels",
    "standard_config",
]

TWO_PI = 2.0 * math.pi


class ExcitationError(ValueError):
    """Configuration cannot be evaluated (no paths, singular denominators, ...)."""


@dataclass(frozen=True)
class StandingWave:
    """Counter-propagating geometry, averaged over a cloud of atoms.

    Each mode's field at ``z`` is ``2 E cos(2 pi nu z / c + theta/2)``. With
    ``signed=False`` only the magnitude of that cosine is used.
    """
    cloud_length: float = 1e-3
    samples: int = 20000
    theta: float = 0.0
    signed: bool = True

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("standing-wave average needs at least one sample")
        if self.cloud_length < 0:
            raise ValueError("cloud_length must be >= 0")

    def positions(self) -> np.ndarray:
        k = np.arange(self.samples)
        return (k + 0.5) * (self.cloud_length / self.samples)

    def factor(self, nu: float, z: np.ndarray) -> np.ndarray:
        c = np.cos(TWO_PI * nu * z / C_LIGHT + self.theta / 2)
        return 2.0 * (c if self.signed else np.abs(c))


@dataclass(frozen=True)
class ExcitationConfig:
    comb: CombSpec
    atom: AtomSystem
    ground: str = "5S1/2 F=2"
    final: str = "5D3/2 F=1"
    mask: PhaseMask = field(default_factory=zero_mask)
    intermediate_window: float = 20e6
    polarization: int = 0
    geometry: str = "traveling"
    standing: StandingWave = field(default_factory=StandingWave)
    mode_policy: str = "resonant"
    k_window: float = 1e3
    workers: int = 1

    def __post_init__(self):
        if not self.intermediate_window > 0:
            raise ValueError("intermediate_window must be positive")
        if self.geometry not in ("traveling", "standing"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.mode_policy not in ("resonant", "full"):
            raise ValueError(f"unknown mode policy {self.mode_policy!r}")
        if self.polarization not in (-1, 0, 1):
            raise ValueError("polarization must be -1, 0 or +1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        self.atom.level(self.ground)
        self.atom.level(self.final)

    def replace(self, **changes) -> "ExcitationConfig":
        return replace(self, **changes)

    @property
    def ground_level(self) -> HyperfineLevel:
        return self.atom.level(self.ground)

    @property
    def final_level(self) -> HyperfineLevel:
        return self.atom.level(self.final)

    @cached_property
    def _plan(self) -> "_Plan":
        return _Plan(self)


@dataclass(frozen=True)
class PathAmplitude:
    """One (mode pair, intermediate sublevel) term; detuning is mode minus resonance of the lower mode."""
    pair: tuple[int, int]
    ground: Sublevel
    intermediate: Sublevel
    final_state: Sublevel
    value: complex
    intermediate_detuning: float


def _exact_detuning(nu: float, comb: CombSpec, n: int) -> float:
    return float(Fraction(nu) - mode_frequency(comb, n, exact=True))


def intermediate_factor(detuning, gamma: float):
    """``1 / (i 2 pi detuning + pi gamma)``; rejects an exact zero denominator."""
    d = np.asarray(detuning, dtype=float)
    if gamma == 0 and np.any(d == 0):
        raise ExcitationError("comb mode sits exactly on a resonance with zero linewidth; "
                              "a positive decay rate is required")
    out = 1.0 / (1j * TWO_PI * d + math.pi * gamma)
    return complex(out) if out.ndim == 0 else out


def _field(cfg: ExcitationConfig, n, z: float | None = None):
    nu = mode_frequency(cfg.comb, n)
    e = cfg.comb.envelope.field(nu) * np.exp(1j * mask_phase_at(cfg.mask, nu))
    if z is not None:
        e = e * cfg.standing.factor(nu, np.asarray(z, dtype=float))
    return e


def pair_amplitude(cfg: ExcitationConfig, n: int, m: int, ground: Sublevel,
                   intermediate: Sublevel, final_state: Sublevel, z: float | None = None) -> complex:
    """One term of the mode-pair sum, for specific sublevels (scalar reference path)."""
    q = cfg.polarization
    mu = cfg.atom.dipole(ground, intermediate, q) * cfg.atom.dipole(intermediate, final_state, q)
    if mu == 0.0:
        return 0j
    g, i, f = ground.level, intermediate.level, final_state.level
    nu_gf, nu_gi = f.energy - g.energy, i.energy - g.energy
    two_photon = float(Fraction(nu_gf) - mode_frequency(cfg.comb, n, exact=True)
                       - mode_frequency(cfg.comb, m, exact=True))
    outer = intermediate_factor(two_photon, f.linewidth)
    bracket = (intermediate_factor(_exact_detuning(nu_gi, cfg.comb, n), i.linewidth)
               + intermediate_factor(_exact_detuning(nu_gi, cfg.comb, m), i.linewidth))
    if n == m:
        bracket *= 0.5
    en, em = _field(cfg, n, z), _field(cfg, m, z)
    return complex(en * em * mu * outer * bracket)


class _Plan:
    """Config-derived bookkeeping shared by all amplitude evaluations."""

    def __init__(self, cfg: ExcitationConfig):
        self.cfg = cfg
        atom, comb = cfg.atom, cfg.comb
        g, f = cfg.ground_level, cfg.final_level
        self.nu_gf = f.energy - g.energy
        self.g_sub = g.sublevels()
        self.f_sub = f.sublevels()
        q = cfg.polarization

        self.levels: list[HyperfineLevel] = []
        self.matrices: list[np.ndarray] = []
        self.nearest: list[int] = []
        for lv in atom.levels:
            if atom.radial(g, lv) == 0.0 or atom.radial(lv, f) == 0.0:
                continue
            if not (g.energy < lv.energy < f.energy):
                continue
            nu_gi = lv.energy - g.energy
            try:
                n_i = mode_index_near(comb, nu_gi)
            except IndexError:
                continue
            if abs(_exact_detuning(nu_gi, comb, n_i)) >= cfg.intermediate_window:
                continue
            M = np.zeros((len(self.g_sub), len(self.f_sub)))
            for a, gs in enumerate(self.g_sub):
                for b, fs in enumerate(self.f_sub):
                    M[a, b] = sum(atom.dipole(gs, s, q) * atom.dipole(s, fs, q) for s in lv.sublevels())
            if not M.any():
                continue
            self.levels.append(lv)
            self.matrices.append(M)
            self.nearest.append(n_i)
        if not self.levels:
            raise ExcitationError(f"no dipole-connected intermediate level within "
                                  f"{cfg.intermediate_window:.3g} Hz of a comb mode")

        K0 = round((Fraction(self.nu_gf) - 2 * Fraction(comb.f_o)) / Fraction(comb.f_r))
        if cfg.mode_policy == "resonant":
            self.Ks = [K0]
        else:
            span = cfg.k_window * f.linewidth
            Ks = []
            for K in range(K0 - int(span / comb.f_r) - 2, K0 + int(span / comb.f_r) + 3):
                if abs(self.two_photon_detuning(K)) <= span:
                    Ks.append(K)
            self.Ks = Ks or [K0]
        self.K0 = K0
        # reference offsets for the intermediate detunings, exact at one mode
        self.ref = []
        for lv, n_i in zip(self.levels, self.nearest):
            self.ref.append((n_i, _exact_detuning(lv.energy - g.energy, comb, n_i)))

    def two_photon_detuning(self, K: int) -> float:
        comb = self.cfg.comb
        return float(Fraction(self.nu_gf) - K * Fraction(comb.f_r) - 2 * Fraction(comb.f_o))

    def detuning(self, idx: int, n: np.ndarray) -> np.ndarray:
        n_ref, d_ref = self.ref[idx]
        return d_ref - (n - n_ref) * self.cfg.comb.f_r

    # -- comb sums ---------------------------------------------------------
    def resonant_pairs(self) -> list[tuple[int, int]]:
        comb = self.cfg.comb
        pairs = []
        for lv, n_i in zip(self.levels, self.nearest):
            m_i = self.K0 - n_i
            if not comb.n_min <= m_i <= comb.n_max:
                raise ExcitationError(f"partner mode of the {lv.label} resonance lies outside the comb")
            pairs.append((min(n_i, m_i), max(n_i, m_i)))
        return pairs

    def resonant_sums(self, z: np.ndarray | None = None) -> np.ndarray:
        """``(n_levels, n_z)`` comb sums using only each level's nearest pair."""
        cfg = self.cfg
        outer = intermediate_factor(self.two_photon_detuning(self.K0), cfg.final_level.linewidth)
        zz = np.zeros(1) if z is None else np.asarray(z, dtype=float)
        out = np.empty((len(self.levels), zz.size), dtype=complex)
        for idx, ((n, m), lv) in enumerate(zip(self.resonant_pairs(), self.levels)):
            br = (intermediate_factor(self.detuning(idx, np.array([n]))[0], lv.linewidth)
                  + intermediate_factor(self.detuning(idx, np.array([m]))[0], lv.linewidth))
            if n == m:
                br *= 0.5
            en = _field(cfg, n, None if z is None else zz)
            em = _field(cfg, m, None if z is None else zz)
            out[idx] = en * em * outer * br
        return out

    def _k_partial(self, K: int, fields: np.ndarray) -> np.ndarray:
        cfg, comb = self.cfg, self.cfg.comb
        lo = max(comb.n_min, K - comb.n_max)
        hi = min(K // 2, K - comb.n_min, comb.n_max)
        res = np.zeros(len(self.levels), dtype=complex)
        if lo > hi:
            return res
        n = np.arange(lo, hi + 1, dtype=np.int64)
        m = K - n
        w = fields[n - comb.n_min] * fields[m - comb.n_min]
        if 2 * hi == K:
            w[-1] *= 0.5
        outer = intermediate_factor(self.two_photon_detuning(K), cfg.final_level.linewidth)
        for idx, lv in enumerate(self.levels):
            br = (intermediate_factor(self.detuning(idx, n), lv.linewidth)
                  + intermediate_factor(self.detuning(idx, m), lv.linewidth))
            res[idx] = outer * np.dot(w, br)
        return res

    def full_sums(self, z: float | None = None) -> np.ndarray:
        """``(n_levels,)`` comb sums over every pair of every K in the window."""
        cfg, comb = self.cfg, self.cfg.comb
        fields = _field(cfg, np.arange(comb.n_min, comb.n_max + 1), z)
        if cfg.workers > 1 and len(self.Ks) > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
                parts = list(ex.map(lambda K: self._k_partial(K, fields), self.Ks))
        else:
            parts = [self._k_partial(K, fields) for K in self.Ks]
        total = np.zeros(len(self.levels), dtype=complex)
        for p in parts:  # fixed ascending-K reduction order
            total = total + p
        return total

    def amplitudes(self, sums: np.ndarray) -> np.ndarray:
        """Sublevel amplitude matrix ``A[g, f]`` (or ``A[..., z]`` for 2-D sums)."""
        A = 0
        for M, s in zip(self.matrices, sums):
            A = A + (M[..., None] * s if np.ndim(s) else M * s)
        return np.asarray(A)

    def population(self, sums: np.ndarray) -> np.ndarray:
        A = self.amplitudes(sums)
        p = np.abs(A) ** 2
        return p.sum(axis=(0, 1)) / len(self.g_sub)


def _sublevel_index(sub: Sublevel, subs: list[Sublevel]) -> int:
    for k, s in enumerate(subs):
        if s.level.label == sub.level.label and s.mF == sub.mF:
            return k
    raise KeyError(f"{sub.level.label} mF={sub.mF} is not part of this configuration")


def _sums(cfg: ExcitationConfig, z: float | None = None) -> np.ndarray:
    plan = cfg._plan
    if cfg.mode_policy == "resonant":
        s = plan.resonant_sums(None if z is None else np.array([z]))
        return s[:, 0]
    return plan.full_sums(z)


def total_amplitude(cfg: ExcitationConfig, ground: Sublevel, final_state: Sublevel,
                    z: float | None = None) -> complex:
    """Amplitude summed over intermediates, their sublevels and mode pairs."""
    plan = cfg._plan
    a = _sublevel_index(ground, plan.g_sub)
    b = _sublevel_index(final_state, plan.f_sub)
    sums = _sums(cfg, z)
    return complex(sum(M[a, b] * s for M, s in zip(plan.matrices, sums)))


def path_amplitudes(cfg: ExcitationConfig, ground: Sublevel, final_state: Sublevel,
                    pairs=None) -> list[PathAmplitude]:
    """Individual terms through every included intermediate sublevel.

    ``pairs`` defaults to each intermediate level's resonant pair; any other
    ``(n, m)`` sequence is evaluated for every intermediate.
    """
    plan = cfg._plan
    out = []
    for idx, lv in enumerate(plan.levels):
        todo = [plan.resonant_pairs()[idx]] if pairs is None else pairs
        for n, m in todo:
            det = -_exact_detuning(lv.energy - ground.level.energy, cfg.comb, n)
            for s in lv.sublevels():
                v = pair_amplitude(cfg, n, m, ground, s, final_state)
                if v != 0:
                    out.append(PathAmplitude((n, m), ground, s, final_state, v, det))
    return out


def traveling_wave_population(cfg: ExcitationConfig) -> float:
    """Final-state population, averaged over ground mF and summed over final mF."""
    plan = cfg._plan
    return float(plan.population(_sums(cfg)))


def standing_wave_population(cfg: ExcitationConfig) -> float:
    """Population averaged over the standing-wave pattern across the cloud."""
    plan = cfg._plan
    z = cfg.standing.positions()
    if cfg.mode_policy == "resonant":
        sums = plan.resonant_sums(z)
        return float(np.mean(plan.population(sums)))
    return float(np.mean([plan.population(plan.full_sums(zk)) for zk in z]))


def population(cfg: ExcitationConfig) -> float:
    if cfg.geometry == "standing":
        return standing_wave_population(cfg)
    return traveling_wave_population(cfg)


def diamond_levels(cfg: ExcitationConfig) -> list[HyperfineLevel]:
    """Most nearly resonant included level of each intermediate term, by energy."""
    plan = cfg._plan
    best: dict[str, tuple[float, HyperfineLevel]] = {}
    for idx, lv in enumerate(plan.levels):
        det = abs(plan.ref[idx][1])
        if lv.term not in best or det < best[lv.term][0]:
            best[lv.term] = (det, lv)
    return sorted((lv for _, lv in best.values()), key=lambda lv: lv.energy)


def path_table(cfg: ExcitationConfig) -> list[dict]:
    """Per-intermediate summary of the resonant-mode paths.

    ``detuning_Hz`` is the lower mode minus the ``g -> i`` resonance.
    ``mu_gi`` and ``mu_if`` are F-reduced dipole elements (signed);
    ``rel_amplitude`` is the sublevel-summed magnitude normalised to the
    strongest path and ``phase_deg`` the phase of ``mu_gi*mu_if*S_i``.
    """
    plan = cfg._plan
    sums = plan.resonant_sums()[:, 0]
    g, f = cfg.ground_level, cfg.final_level
    rows = []
    for idx, (lv, M, s, (n, m)) in enumerate(zip(plan.levels, plan.matrices, sums, plan.resonant_pairs())):
        mu_gi = reduced_angular_factor(g, lv)
        mu_if = reduced_angular_factor(lv, f)
        rows.append(dict(
            intermediate=lv.label,
            mode_n=n, mode_m=m,
            detuning_Hz=-float(plan.ref[idx][1]),
            mu_gi=mu_gi, mu_if=mu_if,
            magnitude=float(np.sqrt(np.sum(np.abs(M * s) ** 2))),
            phase_deg=math.degrees(np.angle(np.sign(mu_gi * mu_if) * s)),
        ))
    top = max(r["magnitude"] for r in rows) or 1.0
    for r in rows:
        r["rel_amplitude"] = r.pop("magnitude") / top
    return rows


def standard_config(ground: str = "F2", **changes) -> ExcitationConfig:
    """Bundled 87Rb with the comb tuned for the F=2 (``"F2"``) or F=1 (``"F1"``) diamond."""
    from .comb import F1_COMB
    f_r, f_o = F2_COMB if ground == "F2" else F1_COMB
    label = "5S1/2 F=2" if ground == "F2" else "5S1/2 F=1"
    base = dict(comb=make_comb(f_r, f_o), atom=default_atom(), ground=label)
    base.update(changes)
    return ExcitationConfig(**base)
