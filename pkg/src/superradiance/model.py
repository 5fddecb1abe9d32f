"""Core types: system couplings, moment states and collective quantities.

Rates are dimensionless multiples of the bath-bath coupling (``delta``),
and times are measured in ``1/delta``. Second moments follow the
normal-ordered convention ``corr[i, j] = <a_i^dagger a_j>``; the row index
carries the dagger.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

ATOL = 1e-10


class SpecError(ValueError):
    """Structurally invalid system specification."""


class StateError(ValueError):
    """Moment state that violates a physical invariant or has wrong shape."""


class Fidelity(str, enum.Enum):
    FULL = "full"
    IDEAL = "ideal"


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Coupling rates of N system guides attached to an M-guide bath array.

    Parameters
    ----------
    g : array_like, shape (N,)
        System to first-bath-guide rates.
    n_bath : int
        Number of bath guides kept in the truncated array.
    omega : array_like, shape (N, N), optional
        System-system rates (symmetric, zero diagonal).
    j_coupling : array_like, shape (N, n_bath - 1), optional
        ``j_coupling[j, k - 2]`` couples system guide ``j`` to bath guide
        ``k`` for ``k = 2 .. n_bath``.
    delta : float
        Bath nearest-neighbour rate, the unit of rate.
    fidelity : Fidelity
        ``IDEAL`` drops ``omega`` and ``j_coupling``.

    Shapes are checked here; value invariants are checked by :func:`validate`.
    """

    g: np.ndarray
    n_bath: int
    omega: Optional[np.ndarray] = None
    j_coupling: Optional[np.ndarray] = None
    delta: float = 1.0
    fidelity: Fidelity = Fidelity.FULL

    def __post_init__(self):
        g = np.atleast_1d(np.array(self.g, dtype=float))
        if g.ndim != 1 or g.size < 1:
            raise SpecError("g must be a non-empty vector")
        n = g.size
        n_bath = int(self.n_bath)
        if n_bath != self.n_bath or n_bath < 1:
            raise SpecError(f"n_bath must be an integer >= 1, got {self.n_bath!r}")
        fidelity = Fidelity(self.fidelity)

        omega = np.zeros((n, n)) if self.omega is None else np.array(self.omega, dtype=float)
        if omega.shape != (n, n):
            raise SpecError(f"omega must have shape {(n, n)}, got {omega.shape}")

        jc = np.zeros((n, n_bath - 1))
        if self.j_coupling is not None:
            given = np.array(self.j_coupling, dtype=float)
            if given.ndim != 2 or given.shape[0] != n:
                raise SpecError(f"j_coupling must have {n} rows, got shape {given.shape}")
            # Columns past the bath size are dropped, missing ones are zero.
            k = min(given.shape[1], n_bath - 1)
            jc[:, :k] = given[:, :k]
            if np.any(given[:, k:] != 0):
                raise SpecError("j_coupling addresses bath guides beyond n_bath")

        if fidelity is Fidelity.IDEAL:
            omega = np.zeros_like(omega)
            jc = np.zeros_like(jc)

        object.__setattr__(self, "g", _frozen(g))
        object.__setattr__(self, "n_bath", n_bath)
        object.__setattr__(self, "omega", _frozen(omega))
        object.__setattr__(self, "j_coupling", _frozen(jc))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "fidelity", fidelity)

    @property
    def n_system(self) -> int:
        return self.g.size

    @property
    def n_modes(self) -> int:
        return self.n_system + self.n_bath

    def with_fidelity(self, fidelity) -> "SystemSpec":
        return SystemSpec(self.g, self.n_bath, self.omega, self.j_coupling, self.delta, fidelity)

    def with_bath_size(self, n_bath: int) -> "SystemSpec":
        """Same couplings on a bath truncated (or extended with zeros) to ``n_bath``."""
        jc = np.zeros((self.n_system, max(n_bath - 1, 0)))
        k = min(n_bath - 1, self.n_bath - 1)
        jc[:, :k] = self.j_coupling[:, :k]
        return SystemSpec(self.g, n_bath, self.omega, jc, self.delta, self.fidelity)

    def scaled(self, factor: float) -> "SystemSpec":
        """Scale every system-bath rate ``g`` by ``factor``."""
        return SystemSpec(self.g * factor, self.n_bath, self.omega, self.j_coupling,
                          self.delta, self.fidelity)

    def __eq__(self, other):
        if not isinstance(other, SystemSpec):
            return NotImplemented
        return (
            self.n_bath == other.n_bath
            and self.delta == other.delta
            and self.fidelity == other.fidelity
            and np.array_equal(self.g, other.g)
            and np.array_equal(self.omega, other.omega)
            and np.array_equal(self.j_coupling, other.j_coupling)
        )

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "g": self.g.tolist(),
            "n_bath": self.n_bath,
            "omega": self.omega.tolist(),
            "j_coupling": self.j_coupling.tolist(),
            "delta": self.delta,
            "fidelity": self.fidelity.value,
        }


@dataclass(frozen=True)
class ValidatedSpec:
    spec: SystemSpec
    diagnostics: dict = field(default_factory=dict)
    warnings: tuple = ()


def validate(spec) -> ValidatedSpec:
    """Check value invariants of a spec and attach weak-coupling diagnostics.

    Accepts a :class:`ValidatedSpec` too, so that validation is idempotent.
    Raises :class:`SpecError` on negative or non-finite rates, an asymmetric
    ``omega`` or a nonzero ``omega`` diagonal.
    """
    if isinstance(spec, ValidatedSpec):
        spec = spec.spec
    if not isinstance(spec, SystemSpec):
        raise SpecError(f"expected SystemSpec, got {type(spec).__name__}")

    for name in ("g", "omega", "j_coupling"):
        arr = getattr(spec, name)
        if not np.all(np.isfinite(arr)):
            raise SpecError(f"{name} contains non-finite rates")
        if np.any(arr < 0):
            raise SpecError(f"{name} contains negative rates")
    if not (math.isfinite(spec.delta) and spec.delta > 0):
        raise SpecError(f"delta must be positive and finite, got {spec.delta}")
    if not np.array_equal(spec.omega, spec.omega.T):
        raise SpecError("omega must be symmetric (omega[i, j] == omega[j, i])")
    if np.any(np.diag(spec.omega) != 0):
        raise SpecError("omega must have zero diagonal")

    g_total = collective_coupling(spec)
    nonzero = spec.g[spec.g > 0]
    g_min = nonzero.min() if nonzero.size else 0.0
    max_omega = float(np.max(spec.omega)) if spec.omega.size else 0.0
    max_j = float(np.max(spec.j_coupling)) if spec.j_coupling.size else 0.0
    diagnostics = {
        "weak_coupling_ratio": g_total / spec.delta,
        "omega_ratio": max_omega / g_min if g_min > 0 else math.inf,
        "j_ratio": max_j / g_min if g_min > 0 else math.inf,
    }
    warnings = []
    if g_total == 0:
        warnings.append("no system-bath coupling")
    elif diagnostics["weak_coupling_ratio"] >= 1:
        warnings.append("weak-coupling assumption violated (G_N >= delta)")
    return ValidatedSpec(spec, diagnostics, tuple(warnings))


def collective_coupling(spec: SystemSpec) -> float:
    """Effective system-bath rate ``sqrt(sum g_j**2)``."""
    return float(np.sqrt(np.sum(spec.g ** 2)))


def effective_decay_rate(spec: SystemSpec) -> float:
    """Single-oscillator decay scale ``2 G_N**2 / (N delta)``."""
    return 2.0 * collective_coupling(spec) ** 2 / (spec.n_system * spec.delta)


@dataclass(frozen=True)
class CollectiveQuantities:
    g_total: float
    gamma: float
    c_vector: np.ndarray

    @property
    def collective_rate(self) -> float:
        """Decay rate ``N * gamma`` of the collective-mode population."""
        return self.gamma * self.c_vector.size


def collective(spec: SystemSpec) -> CollectiveQuantities:
    """G_N, Gamma and the unit weight vector ``g / G_N`` of the collective mode.

    With no system-bath coupling the weight vector is all zeros.
    """
    g_total = collective_coupling(spec)
    c = spec.g / g_total if g_total > 0 else np.zeros_like(spec.g)
    return CollectiveQuantities(g_total, effective_decay_rate(spec), _frozen(c))


@dataclass(frozen=True, eq=False)
class MomentState:
    """First moments ``<a_i>`` and normal-ordered second moments ``<a_i^dag a_j>``.

    Mode order is system guides first, then bath guides. Construction checks
    shapes and Hermiticity; :meth:`check` also verifies positivity.
    """

    mean: np.ndarray
    corr: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.array(self.mean, dtype=complex))
        corr = np.array(self.corr, dtype=complex)
        n = mean.size
        if mean.ndim != 1 or corr.shape != (n, n):
            raise StateError(f"corr must be {n}x{n} to match mean, got {corr.shape}")
        scale = max(1.0, float(np.max(np.abs(corr))) if n else 1.0)
        if not np.allclose(corr, corr.conj().T, rtol=0, atol=ATOL * scale):
            raise StateError("corr must be Hermitian")
        corr = 0.5 * (corr + corr.conj().T)
        object.__setattr__(self, "mean", _frozen(mean, complex))
        object.__setattr__(self, "corr", _frozen(corr, complex))

    @classmethod
    def vacuum(cls, n_modes: int) -> "MomentState":
        return cls(np.zeros(n_modes), np.zeros((n_modes, n_modes)))

    @classmethod
    def from_system(cls, corr_sys, n_bath: int = 0, mean_sys=None, nbar: float = 0.0) -> "MomentState":
        """Embed a system block into ``N + n_bath`` modes; bath modes thermal at ``nbar``."""
        corr_sys = np.asarray(corr_sys, dtype=complex)
        n = corr_sys.shape[0]
        corr = np.zeros((n + n_bath, n + n_bath), dtype=complex)
        corr[:n, :n] = corr_sys
        corr[n:, n:] = nbar * np.eye(n_bath)
        mean = np.zeros(n + n_bath, dtype=complex)
        if mean_sys is not None:
            mean[:n] = mean_sys
        return cls(mean, corr)

    @property
    def n_modes(self) -> int:
        return self.mean.size

    @property
    def connected(self) -> np.ndarray:
        """``<a_i^dag a_j> - <a_i^dag><a_j>``."""
        return self.corr - np.outer(self.mean.conj(), self.mean)

    def system_block(self, n_system: int) -> "MomentState":
        return MomentState(self.mean[:n_system], self.corr[:n_system, :n_system])

    def with_bath(self, n_system: int, n_bath: int, nbar: float = 0.0) -> "MomentState":
        """Keep the system block and replace the bath by ``n_bath`` thermal guides."""
        return MomentState.from_system(
            self.corr[:n_system, :n_system], n_bath, self.mean[:n_system], nbar
        )

    def total_quanta(self) -> float:
        return float(np.trace(self.corr).real)

    def check(self, atol: float = ATOL) -> "MomentState":
        """Raise :class:`StateError` unless diagonal >= 0 and the connected part is PSD."""
        diag = np.diag(self.corr)
        if np.any(diag.real < -atol):
            raise StateError("negative mode population")
        if self.n_modes and np.linalg.eigvalsh(self.connected).min() < -atol:
            raise StateError("connected second moments are not positive semidefinite")
        return self

    def allclose(self, other: "MomentState", atol: float = 1e-12) -> bool:
        return (
            self.n_modes == other.n_modes
            and np.allclose(self.mean, other.mean, rtol=0, atol=atol)
            and np.allclose(self.corr, other.corr, rtol=0, atol=atol)
        )


def _system_corr(state: MomentState, spec: SystemSpec) -> np.ndarray:
    n = spec.n_system
    if state.n_modes not in (n, spec.n_modes):
        raise StateError(
            f"state has {state.n_modes} modes, expected {n} or {spec.n_modes}"
        )
    return state.corr[:n, :n]


def collective_moments(state: MomentState, spec: SystemSpec) -> tuple[float, float, float]:
    """Total, bright and dark quanta ``(<M>, <R>, <L>)`` of the system guides.

    ``<R> = <C^dag C>`` is the population of the collective mode and
    ``<L> = <M> - <R>``. Round-off negativity below 1e-10 is clamped to zero.
    """
    corr = _system_corr(state, spec)
    c = collective(spec).c_vector
    m = float(np.trace(corr).real)
    r_c = complex(c @ corr @ c)
    if abs(r_c.imag) > ATOL * max(1.0, abs(m)):
        raise StateError("bright population has an imaginary part; corr not Hermitian")
    r = r_c.real
    if r < 0:
        if r < -ATOL:
            raise StateError(f"bright population {r} is negative")
        r = 0.0
    l = m - r
    if l < 0:
        if l < -ATOL:
            raise StateError(f"dark population {l} is negative")
        r, l = m, 0.0
    return m, r, l
