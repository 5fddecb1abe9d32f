"""Exact propagation of the coupled-mode Hamiltonian on a truncated bath.

The Hamiltonian is quadratic, ``H = sum_kl h_kl a_k^dag a_l``, so the
Heisenberg equations close on the mode operators: ``a(t) = U(t) a(0)`` with
``U(t) = exp(-i h t)``. First and second moments are therefore propagated
exactly from a single eigendecomposition of ``h``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .model import MomentState, StateError, SystemSpec, collective, validate

log = logging.getLogger(__name__)

# Tight-binding group velocity is at most 2 delta.
MAX_GROUP_VELOCITY = 2.0
HORIZON_SAFETY = 0.8
MAX_BATH = 4096


class NumericalError(RuntimeError):
    pass


class ConvergenceError(NumericalError):
    pass


def build_hamiltonian(spec: SystemSpec) -> np.ndarray:
    """Real symmetric coupling matrix, system modes first then bath guides 1..M."""
    spec = validate(spec).spec
    n, m = spec.n_system, spec.n_bath
    h = np.zeros((n + m, n + m))
    h[:n, n] = spec.g
    h[:n, n + 1:] = spec.j_coupling
    h[:n, :n] = spec.omega
    idx = np.arange(n, n + m - 1)
    h[idx, idx + 1] = spec.delta
    h[n:, :n] = h[:n, n:].T
    h[idx + 1, idx] = spec.delta
    return h


@dataclass(frozen=True, eq=False)
class Propagator:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def evaluate(self, t) -> np.ndarray:
        """``U(t) = V exp(-i lambda t) V^T``; stacked along axis 0 for array ``t``."""
        v = self.eigenvectors
        phases = np.exp(-1j * np.multiply.outer(np.asarray(t, dtype=float), self.eigenvalues))
        return (v * phases[..., None, :]) @ v.T


def diagonalize(h: np.ndarray) -> Propagator:
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or not np.array_equal(h, h.T):
        raise NumericalError("coupling matrix must be real, square and symmetric")
    try:
        lam, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return Propagator(lam, v)


def evolve(prop: Propagator, state: MomentState, t: float) -> MomentState:
    """Moments at time ``t``: ``mean(t) = U mean``, ``corr(t) = U* corr U^T``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if state.n_modes != prop.dim:
        raise StateError(f"state has {state.n_modes} modes, propagator {prop.dim}")
    u = prop.evaluate(t)
    return MomentState(u @ state.mean, u.conj() @ state.corr @ u.T)


def boundary_flux(state: MomentState, spec: SystemSpec) -> float:
    """Exact ``-d<M>/dt`` of the system guides.

    From the Heisenberg equations, ``-d<M>/dt = -2 sum_{j, k} h_jk Im <a_j^dag b_k>``
    over system ``j`` and bath ``k``; system-system terms cancel.
    """
    if state.n_modes != spec.n_modes:
        raise StateError(f"state has {state.n_modes} modes, spec {spec.n_modes}")
    n = spec.n_system
    h_sb = np.zeros((n, spec.n_bath))
    h_sb[:, 0] = spec.g
    h_sb[:, 1:] = spec.j_coupling
    return float(-2.0 * np.sum(h_sb * state.corr[:n, n:].imag))


def reflection_horizon(spec: SystemSpec) -> float:
    """Time after which the far end of the truncated bath can be felt."""
    return HORIZON_SAFETY * spec.n_bath / (MAX_GROUP_VELOCITY * spec.delta)


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    """Observables sampled on a time grid (times in ``1/delta``).

    ``per_guide[k, m]`` is the population of mode ``m`` (system first) at
    ``times[k]``; ``correlations`` maps 0-based system pairs ``(i, j)`` to
    complex samples of ``c_ij(t, 0)``.
    """

    times: np.ndarray
    m_total: np.ndarray
    r_total: np.ndarray
    per_guide: np.ndarray
    intensity: np.ndarray
    total_quanta: np.ndarray
    correlations: dict = field(default_factory=dict)
    warnings: tuple = ()

    def __post_init__(self):
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        k = self.times.size
        for name in ("m_total", "r_total", "intensity", "total_quanta"):
            if getattr(self, name).shape != (k,):
                raise ValueError(f"{name} length does not match times")
        if self.per_guide.shape[0] != k:
            raise ValueError("per_guide length does not match times")
        if np.any(self.m_total < -1e-10):
            raise NumericalError("negative system population")


def run_series(spec: SystemSpec, state: MomentState, times, correlation_pairs=(),
               prop: Propagator | None = None, check_horizon: bool = True) -> ObservableSeries:
    """Propagate ``state`` under the full Hamiltonian of ``spec`` and sample observables.

    Works in the eigenbasis: with ``K = V^T corr V`` the evolved moments are
    ``corr(t) = V P(t) V^T`` where ``P_ab = K_ab exp(i (lambda_a - lambda_b) t)``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be >= 0")
    if state.n_modes != spec.n_modes:
        raise StateError(f"state has {state.n_modes} modes, spec {spec.n_modes}")
    if prop is None:
        prop = diagonalize(build_hamiltonian(spec))
    n = spec.n_system
    for i, j in correlation_pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"correlation pair ({i}, {j}) outside the system modes")

    warnings = []
    horizon = reflection_horizon(spec)
    if check_horizon and times[-1] > horizon:
        msg = (f"grid reaches t = {times[-1]:.4g} beyond the reflection horizon "
               f"{horizon:.4g} of a {spec.n_bath}-guide bath")
        log.warning(msg)
        warnings.append(msg)

    lam, v = prop.eigenvalues, prop.eigenvectors
    k_mat = v.T @ state.corr @ v
    conn0 = state.connected
    c = collective(spec).c_vector
    h_sb = np.zeros((n, spec.n_bath))
    h_sb[:, 0] = spec.g
    h_sb[:, 1:] = spec.j_coupling
    v_sys = v[:n]
    # Two-time correlations need conj(U)[i, :] @ conn0[:, j] = V_i e^{+i lam t} (V^T conn0)[:, j]
    pairs = list(correlation_pairs)
    cols = sorted({j for _, j in pairs})
    w_cols = v.T @ conn0[:, cols] if cols else None

    n_t = times.size
    m_total = np.empty(n_t)
    r_total = np.empty(n_t)
    flux = np.empty(n_t)
    total = np.empty(n_t)
    per_guide = np.empty((n_t, spec.n_modes))
    corr_out = {p: np.empty(n_t, dtype=complex) for p in pairs}

    for step, t in enumerate(times):
        ph = np.exp(1j * lam * t)
        p_mat = (ph[:, None] * k_mat) * ph.conj()[None, :]
        left = v @ p_mat
        per_guide[step] = np.einsum("ma,ma->m", left, v).real
        sys_rows = left[:n] @ v.T
        corr_ss = sys_rows[:, :n]
        m_total[step] = np.trace(corr_ss).real
        r_total[step] = (c @ corr_ss @ c).real
        flux[step] = -2.0 * np.sum(h_sb * sys_rows[:, n:].imag)
        total[step] = np.trace(p_mat).real
        if cols:
            two_time = (v_sys * ph) @ w_cols
            for i, j in pairs:
                corr_out[(i, j)][step] = two_time[i, cols.index(j)]

    return ObservableSeries(times, m_total, r_total, per_guide, flux, total,
                            corr_out, tuple(warnings))


@dataclass(frozen=True)
class DecayFit:
    rate: float
    floor: float
    amplitude: float
    decaying: bool
    message: str = ""


def fit_decay_rate(series, window=(0.5, 2.0), rate_guess: float | None = None) -> DecayFit:
    """Fit ``<M(t)> = floor + amplitude exp(-rate t)``.

    The window is ``[window[0], window[1]] / rate_guess``. Without a guess,
    the rate is first estimated from the 1/e crossing of ``<M> - floor``.
    A log-linear fit with ``floor`` set to the tail mean seeds a
    three-parameter least-squares refinement. Series that do not decay are
    reported with ``decaying=False`` instead of raising.
    """
    if isinstance(series, ObservableSeries):
        times, m = series.times, series.m_total
    else:
        times, m = (np.asarray(a, dtype=float) for a in series)
    tail = m[-max(3, m.size // 10):]
    floor = float(tail.mean())
    excess = m - floor
    span = float(m.max() - m.min())
    if span <= 1e-9 * max(1.0, abs(float(m[0]))) or excess[0] <= 0:
        return DecayFit(0.0, floor, 0.0, False, "series does not decay")

    if rate_guess is None:
        below = np.nonzero(excess <= excess[0] / math.e)[0]
        if below.size == 0 or times[below[0]] <= times[0]:
            return DecayFit(0.0, floor, 0.0, False, "no 1/e crossing in the series")
        rate_guess = 1.0 / (times[below[0]] - times[0])
    lo, hi = window[0] / rate_guess, window[1] / rate_guess
    sel = (times >= lo) & (times <= hi)
    if sel.sum() < 3:
        sel = times <= hi
    tw, mw = times[sel], m[sel]
    if tw.size < 3:
        return DecayFit(float(rate_guess), floor, float(m[0] - floor), False,
                        "too few samples in the fit window")
    ex = mw - floor
    if np.any(ex <= 0):
        rate0, amp0 = rate_guess, float(m[0] - floor)
    else:
        slope, intercept = np.polyfit(tw, np.log(ex), 1)
        rate0, amp0 = -slope, math.exp(intercept)
    if rate0 <= 0:
        return DecayFit(float(rate0), floor, amp0, False, "non-positive log-linear rate")

    scale = max(abs(amp0), 1e-300)

    def residual(p):
        a, b, k = p
        return (a + b * np.exp(-k * tw) - mw) / scale

    sol = optimize.least_squares(residual, [floor, amp0, rate0], method="lm",
                                 xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10000)
    a, b, k = sol.x
    if not sol.success or k <= 0 or b <= 0:
        return DecayFit(float(rate0), floor, amp0, rate0 > 0, "refinement failed; log-linear estimate")
    return DecayFit(float(k), float(a), float(b), True)


def converge_bath_size(spec: SystemSpec, state: MomentState, times, tol: float = 1e-6,
                       max_bath: int = MAX_BATH) -> int:
    """Smallest bath size ``M`` with ``max_t |<M(t)>_M - <M(t)>_2M| < tol``.

    Doubles ``M`` from 1 until the criterion holds, then bisects the last
    interval. Only the system block of ``state`` is used; bath guides start
    in vacuum.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    n = spec.n_system
    cache = {}

    def m_series(size):
        if size not in cache:
            sub = spec.with_bath_size(size)
            st = state.with_bath(n, size)
            cache[size] = run_series(sub, st, times, check_horizon=False).m_total
        return cache[size]

    def converged(size):
        return np.max(np.abs(m_series(size) - m_series(2 * size))) < tol

    size = 1
    while not converged(size):
        size *= 2
        if size > max_bath:
            raise ConvergenceError(f"no bath-size convergence up to M = {max_bath}")
    lo, hi = size // 2, size
    if lo < 1:
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if converged(mid):
            hi = mid
        else:
            lo = mid
    return hi
