"""Numerical angular-momentum oracle, independent of the Racah formulas.

Coupled states are built from ladder operators in the uncoupled product
basis: the highest-weight state of each J is the null vector of J+ in the
M = J subspace (Condon-Shortley sign: the coefficient with m1 = j1 is
positive), and the other states follow by repeated J-. Orbital C^1_q
elements come from quadrature over spherical harmonics.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.linalg import null_space
from scipy.special import sph_harm_y


def m_values(j: float) -> list[float]:
    """j, j-1, ..., -j."""
    n = int(round(2 * j)) + 1
    return [j - k for k in range(n)]


def ladder(j: float):
    """(Jz, J+, J-) in the basis ordered by ``m_values(j)``."""
    ms = m_values(j)
    n = len(ms)
    jz = np.diag(ms)
    jp = np.zeros((n, n))
    for k in range(1, n):
        m = ms[k]
        jp[k - 1, k] = math.sqrt(j * (j + 1) - m * (m + 1))
    return jz, jp, jp.T.copy()


@lru_cache(maxsize=None)
def coupling(j1: float, j2: float) -> dict:
    """``{(J, M): vector}`` in the product basis ``|j1 m1> x |j2 m2>`` (m1 major)."""
    z1, p1, m1 = ladder(j1)
    z2, p2, m2 = ladder(j2)
    i1, i2 = np.eye(len(z1)), np.eye(len(z2))
    jz = np.kron(z1, i2) + np.kron(i1, z2)
    jp = np.kron(p1, i2) + np.kron(i1, p2)
    jm = np.kron(m1, i2) + np.kron(i1, m2)
    mz = np.diag(jz)
    out = {}
    J = j1 + j2
    while J >= abs(j1 - j2) - 1e-9:
        sub = np.where(np.abs(mz - J) < 1e-9)[0]
        basis = np.eye(len(mz))[:, sub]
        ns = null_space(jp @ basis)
        assert ns.shape[1] == 1
        v = basis @ ns[:, 0]
        # Condon-Shortley: <j1 j1; j2 J-j1 | J J> > 0
        lead = sub[0]  # m1 = j1 comes first in m1-major order within the subspace
        v = v if v[lead] > 0 else -v
        M = J
        for _ in range(int(round(2 * J)) + 1):
            out[(J, M)] = v
            w = jm @ v
            nrm = np.linalg.norm(w)
            if nrm < 1e-12:
                break
            v, M = w / nrm, M - 1
        J -= 1
    return out


def cg(j1, m1, j2, m2, J, M) -> float:
    """Clebsch-Gordan coefficient from the numerical coupled basis."""
    table = coupling(float(j1), float(j2))
    key = (float(J), float(M))
    if key not in table:
        return 0.0
    i = m_values(float(j1)).index(float(m1))
    k = m_values(float(j2)).index(float(m2))
    return float(table[key][i * len(m_values(float(j2))) + k])


@lru_cache(maxsize=None)
def _quadrature(n_theta: int = 24, n_phi: int = 24):
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = (np.arange(n_phi) + 0.5) * (2 * np.pi / n_phi)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    W = np.outer(w, np.full(n_phi, 2 * np.pi / n_phi))
    return T, P, W


def orbital_c1(Lp: int, mLp: int, L: int, mL: int, q: int) -> float:
    """``<Lp mLp| C^1_q |L mL>`` with ``C^1_q = sqrt(4 pi / 3) Y_1q``."""
    T, P, W = _quadrature()
    c = math.sqrt(4 * math.pi / 3) * sph_harm_y(1, q, T, P)
    integrand = np.conj(sph_harm_y(Lp, mLp, T, P)) * c * sph_harm_y(L, mL, T, P)
    val = np.sum(W * integrand)
    assert abs(val.imag) < 1e-12
    return float(val.real)


def hyperfine_state(L: int, S: float, J: float, I: float, F: float, mF: float) -> dict:
    """``|((L S) J, I) F mF>`` as ``{(mL, mS, mI): amplitude}``."""
    state = {}
    for mJ in m_values(J):
        mI = mF - mJ
        if abs(mI) > I + 1e-9:
            continue
        a = cg(J, mJ, I, mI, F, mF)
        if a == 0.0:
            continue
        for mL in m_values(L):
            mS = mJ - mL
            if abs(mS) > S + 1e-9:
                continue
            b = cg(L, mL, S, mS, J, mJ)
            if b:
                key = (mL, mS, mI)
                state[key] = state.get(key, 0.0) + a * b
    return state


def dipole_angular(src, dst, q: int) -> float:
    """``<dst| C^1_q |src>`` for hyperfine sublevels given as (L, S, J, I, F, mF) tuples."""
    a = hyperfine_state(*src)
    b = hyperfine_state(*dst)
    Ls, Ld = src[0], dst[0]
    total = 0.0
    for (mL, mS, mI), ca in a.items():
        for (mLp, mSp, mIp), cb in b.items():
            if mS != mSp or mI != mIp:
                continue
            total += cb * ca * orbital_c1(Ld, int(round(mLp)), Ls, int(round(mL)), q)
    return total
