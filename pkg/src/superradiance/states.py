"""Bright, normal (Fock) and dark initial states, and beam-splitter preparation.

Mode indices are 0-based: the dark pair ``(0, 2)`` is waveguides 1 and 3.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MomentState, StateError, SystemSpec, collective


@dataclass(frozen=True, eq=False)
class ModeMap:
    """Unitary single-particle map ``a' = B a`` on the mode operators."""

    matrix: np.ndarray

    def __post_init__(self):
        b = np.array(self.matrix, dtype=complex)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("mode map must be square")
        if np.max(np.abs(b.conj().T @ b - np.eye(len(b))), initial=0.0) >= 1e-10:
            raise ValueError("mode map is not unitary")
        b.setflags(write=False)
        object.__setattr__(self, "matrix", b)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "ModeMap") -> "ModeMap":
        return ModeMap(self.matrix @ other.matrix)


def _pad(state: MomentState, n_modes: int) -> MomentState:
    if state.n_modes == n_modes:
        return state
    return MomentState.from_system(state.corr, n_modes - state.n_modes, state.mean)


def fock_state(ns, n_bath: int = 0) -> MomentState:
    """Product of single-mode Fock states ``|n_1, ..., n_N>`` with a vacuum bath."""
    ns = np.asarray(ns)
    if ns.ndim != 1 or np.any(ns < 0) or np.any(ns != np.round(ns)):
        raise StateError("occupations must be a vector of nonnegative integers")
    return MomentState.from_system(np.diag(ns.astype(float)), n_bath)


def bright_state(spec: SystemSpec, r: int) -> MomentState:
    """``R`` quanta in the collective mode ``C_N``: system block ``R c c^T``."""
    if r < 0:
        raise StateError("quanta count must be >= 0")
    c = collective(spec).c_vector
    if r > 0 and not np.any(c):
        raise StateError("bright state undefined without system-bath coupling")
    return MomentState.from_system(r * np.outer(c, c), spec.n_bath)


def dark_vector(spec: SystemSpec, pair=(0, 2)) -> np.ndarray:
    """Unit vector ``(g_j e_i - g_i e_j) / sqrt(g_i^2 + g_j^2)``, orthogonal to ``g``."""
    i, j = pair
    n = spec.n_system
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise StateError(f"invalid dark pair {pair} for {n} system modes")
    gi, gj = spec.g[i], spec.g[j]
    norm = np.hypot(gi, gj)
    if norm == 0:
        raise StateError("dark pair has no coupling to the bath")
    v = np.zeros(n)
    v[i], v[j] = gj / norm, -gi / norm
    return v


def dark_state(spec: SystemSpec, r: int, pair=(0, 2)) -> MomentState:
    """``R`` quanta in the dark mode built from system guides ``pair``."""
    if r < 0:
        raise StateError("quanta count must be >= 0")
    v = dark_vector(spec, pair)
    return MomentState.from_system(r * np.outer(v, v), spec.n_bath)


def beamsplitter(i: int, j: int, theta: float, dim: int) -> ModeMap:
    """Two-mode rotation ``[[cos, sin], [-sin, cos]]`` on modes ``(i, j)``.

    ``theta = pi/2`` on ``(0, 1)`` gives ``a'_0 = a_1`` and ``a'_1 = -a_0``.
    """
    if i == j or not (0 <= i < dim and 0 <= j < dim):
        raise ValueError(f"beam splitter indices ({i}, {j}) invalid for dim {dim}")
    b = np.eye(dim)
    c, s = np.cos(theta), np.sin(theta)
    b[i, i], b[i, j], b[j, i], b[j, j] = c, s, -s, c
    return ModeMap(b)


@dataclass(frozen=True)
class PreparationNetwork:
    """Ordered beam splitters ``(i, j, theta)`` fed with a product Fock state.

    Each splitter's matrix acts on the creation operators of the injected
    light: a photon entering mode ``i`` of ``B_{i,j}(theta)`` leaves in
    ``cos(theta) a_i^dag + sin(theta) a_j^dag``. The Heisenberg map of the
    whole network is therefore the transposed product, see :meth:`mode_map`.
    """

    stages: tuple

    def __post_init__(self):
        stages = tuple((int(i), int(j), float(t)) for i, j, t in self.stages)
        for i, j, t in stages:
            if i == j or i < 0 or j < 0:
                raise ValueError(f"invalid stage modes ({i}, {j})")
            if not -np.pi <= t <= np.pi:
                raise ValueError(f"stage angle {t} outside [-pi, pi]")
        object.__setattr__(self, "stages", stages)

    def mode_map(self, dim: int) -> ModeMap:
        product = np.eye(dim)
        for i, j, theta in self.stages:
            product = product @ beamsplitter(i, j, theta, dim).matrix.real
        return ModeMap(product.T)

    def prepare(self, occupations, n_bath: int = 0) -> MomentState:
        """Inject the product state ``|n_1, ..., n_N>`` and return the output moments."""
        state = fock_state(occupations, n_bath)
        return apply_map(self.mode_map(state.n_modes), state)


def apply_map(mode_map: ModeMap, state: MomentState) -> MomentState:
    """Transport moments through ``a' = B a``: ``mean' = B mean``, ``corr' = B* corr B^T``.

    A map smaller than the state acts on the leading modes only.
    """
    b = mode_map.matrix
    n = state.n_modes
    if b.shape[0] > n:
        raise StateError(f"map of dim {b.shape[0]} does not fit a {n}-mode state")
    if b.shape[0] < n:
        full = np.eye(n, dtype=complex)
        full[: b.shape[0], : b.shape[0]] = b
        b = full
    return MomentState(b @ state.mean, b.conj() @ state.corr @ b.T)


def dark_prep_network(spec: SystemSpec, pair=(0, 2)) -> PreparationNetwork:
    """Single splitter ``B_{j,i}(theta_D)``, ``theta_D = arcsin(g_i / sqrt(g_i^2 + g_j^2))``.

    Light is injected into mode ``i``; the default pair gives the splitter on
    waveguides 3 and 1.
    """
    i, j = pair
    dark_vector(spec, pair)  # validates the pair
    gi, gj = spec.g[i], spec.g[j]
    theta = float(np.arcsin(gi / np.hypot(gi, gj)))
    return PreparationNetwork(((j, i, theta),))


def generalize_bright(spec: SystemSpec) -> PreparationNetwork:
    """Chain of ``N - 1`` splitters on neighbouring modes sending mode 0 to ``C_N``.

    Stage ``k`` keeps the fraction ``c_k`` of the remaining amplitude in mode
    ``k`` and passes the rest to mode ``k + 1``.
    """
    n = spec.n_system
    if n < 2:
        raise StateError("a preparation network needs at least two system modes")
    c = collective(spec).c_vector
    if not np.any(c):
        raise StateError("collective mode undefined without system-bath coupling")
    # remaining[k] = |c[k:]|
    remaining = np.sqrt(np.cumsum((c ** 2)[::-1])[::-1])
    stages = []
    for k in range(n - 1):
        if remaining[k] == 0:
            theta = 0.0
        else:
            theta = float(np.arccos(np.clip(c[k] / remaining[k], -1.0, 1.0)))
        stages.append((k, k + 1, theta))
    return PreparationNetwork(tuple(stages))


def bright_prep_network(spec: SystemSpec) -> PreparationNetwork:
    """Three-mode network ``B_{1,2}(theta_B)`` then ``B_{2,3}(phi_B)``.

    ``theta_B = arccos(g_1 / G_3)``, ``phi_B = arcsin(g_3 / sqrt(g_2^2 + g_3^2))``.
    """
    if spec.n_system != 3:
        raise StateError("the two-splitter construction is for three system modes; "
                         "use generalize_bright")
    g1, g2, g3 = spec.g
    g_total = collective(spec).g_total
    if g_total == 0:
        raise StateError("collective mode undefined without system-bath coupling")
    theta_b = float(np.arccos(g1 / g_total))
    tail = np.hypot(g2, g3)
    phi_b = float(np.arcsin(g3 / tail)) if tail > 0 else 0.0
    return PreparationNetwork(((0, 1, theta_b), (1, 2, phi_b)))
