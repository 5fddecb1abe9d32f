"""Closed-form predictions of the effective (collective-decay) master equation.

All functions accept scalar or array ``t`` and broadcast over it. States may
carry only the system block or the full system + bath block; only the
system block enters.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import MomentState, SystemSpec, collective, collective_moments


class Radiance(str, enum.Enum):
    SUPER = "Super"
    NORMAL = "Normal"
    SUB = "Sub"


@dataclass(frozen=True)
class RadianceClass:
    kind: Radiance
    correlated_part: float


@dataclass(frozen=True)
class ThermalBathSpec:
    nbar: float = 0.0

    def __post_init__(self):
        if not self.nbar >= 0:
            raise ValueError(f"nbar must be >= 0, got {self.nbar}")


def _time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be >= 0")
    return t


def _out(x):
    if np.iscomplexobj(x):
        if not np.any(np.imag(x)):
            x = np.real(x)
        elif np.ndim(x) == 0:
            return complex(x)
    return float(x) if np.ndim(x) == 0 else x


def total_quanta_t(state: MomentState, spec: SystemSpec, t):
    """``<M(t)> = <L(0)> + <R(0)> exp(-N Gamma t)``."""
    t = _time(t)
    _, r, l = collective_moments(state, spec)
    rate = collective(spec).collective_rate
    return _out(l + r * np.exp(-rate * t))


def intensity_t(state: MomentState, spec: SystemSpec, t):
    """Emission rate into the bath, ``-d<M>/dt = N Gamma <R(0)> exp(-N Gamma t)``."""
    t = _time(t)
    _, r, _ = collective_moments(state, spec)
    rate = collective(spec).collective_rate
    return _out(rate * r * np.exp(-rate * t))


def intensity_parts(state: MomentState, spec: SystemSpec, t):
    """Split the intensity into uncorrelated (diagonal) and correlated (off-diagonal) parts.

    Returns
    -------
    (I_U, I_C) : tuple
        ``I_U`` weights the populations by ``g_j**2``; ``I_C`` collects the
        ``g_i g_j <a_i^dag a_j>`` terms with ``i != j``. They sum to
        :func:`intensity_t`.
    """
    t = _time(t)
    n = spec.n_system
    corr = state.corr[:n, :n]
    q = collective(spec)
    if q.g_total == 0:
        zero = np.zeros_like(t)
        return _out(zero), _out(zero)
    weights = np.outer(spec.g, spec.g) * corr
    diag = np.trace(weights)
    cross = weights.sum() - diag
    if abs(cross.imag) > 1e-12 * max(1.0, abs(weights).sum()):
        raise ValueError("correlated intensity is not real; corr is not Hermitian")
    prefactor = q.collective_rate / q.g_total ** 2 * np.exp(-q.collective_rate * t)
    return _out(prefactor * diag.real), _out(prefactor * cross.real)


def classify_radiance(state: MomentState, spec: SystemSpec) -> RadianceClass:
    """Super, normal or sub-radiant according to the sign of ``I_C(0)``."""
    i_u, i_c = intensity_parts(state, spec, 0.0)
    tol = 1e-12 * abs(i_u) + 1e-15
    if i_c > tol:
        kind = Radiance.SUPER
    elif i_c < -tol:
        kind = Radiance.SUB
    else:
        kind = Radiance.NORMAL
    return RadianceClass(kind, float(i_c))


def correlation_t(state: MomentState, spec: SystemSpec, i: int, j: int, t):
    """Two-time correlation ``<a_i^dag(t) a_j(0)> - <a_i^dag(t)><a_j(0)>`` by quantum regression.

    Under collective decay the creation operators evolve as
    ``a_i^dag(t) = a_i^dag - c_i (1 - exp(-N Gamma t / 2)) C^dag``, so the
    correlation relaxes at the amplitude rate ``N Gamma / 2``. First moments
    are kept, so coherent inputs are handled.
    """
    n = spec.n_system
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"system mode indices ({i}, {j}) out of range for N = {n}")
    t = _time(t)
    q = collective(spec)
    conn = state.connected[:n, :n]
    bright_j = q.c_vector @ conn[:, j]
    value = conn[i, j] - q.c_vector[i] * (1 - np.exp(-0.5 * q.collective_rate * t)) * bright_j
    return _out(value)


def bright_correlation(spec: SystemSpec, r: int, i: int, j: int, t):
    """Closed form for ``R`` collective-mode quanta: ``R c_i c_j exp(-N Gamma t / 2)``."""
    t = _time(t)
    q = collective(spec)
    c = q.c_vector
    return _out(r * c[i] * c[j] * np.exp(-0.5 * q.collective_rate * t))


def fock_correlation(spec: SystemSpec, ns, i: int, j: int, t):
    """Closed form for ``|n_1 .. n_N>``; only ``n_j`` enters, so it is not symmetric in ``(i, j)``."""
    t = _time(t)
    q = collective(spec)
    c = q.c_vector
    nj = float(np.asarray(ns)[j])
    value = -c[i] * c[j] * (1 - np.exp(-0.5 * q.collective_rate * t)) * nj + (i == j) * nj
    return _out(value)


def dark_correlation(spec: SystemSpec, r: int, i: int, j: int, t, pair=(0, 2)):
    """Constant correlation of the dark state built on ``pair``."""
    t = _time(t)
    p, q = pair
    gp, gq = spec.g[p], spec.g[q]

    def weight(k):
        return gq * (k == p) - gp * (k == q)

    value = r * weight(i) * weight(j) / (gp ** 2 + gq ** 2)
    return _out(value + np.zeros_like(t))


def thermal_total_quanta_t(state: MomentState, spec: SystemSpec, nbar, t):
    """``<M(t)> = <L(0)> + nbar + (<R(0)> - nbar) exp(-N Gamma t)`` for a thermal bath."""
    nbar = ThermalBathSpec(nbar).nbar
    t = _time(t)
    _, r, l = collective_moments(state, spec)
    rate = collective(spec).collective_rate
    return _out(l + nbar + (r - nbar) * np.exp(-rate * t))


def thermal_intensity_t(state: MomentState, spec: SystemSpec, nbar, t):
    """Emission rate ``N Gamma <R(t)>``; tends to the steady value ``N Gamma nbar``."""
    nbar = ThermalBathSpec(nbar).nbar
    t = _time(t)
    _, r, _ = collective_moments(state, spec)
    rate = collective(spec).collective_rate
    return _out(rate * (r - nbar) * np.exp(-rate * t) + rate * nbar)


def steady_state_intensity(spec: SystemSpec, nbar) -> float:
    return collective(spec).collective_rate * ThermalBathSpec(nbar).nbar
