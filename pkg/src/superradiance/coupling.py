"""Coupling-rate presets and a distance-to-rate model for custom geometries."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Fidelity, SpecError, SystemSpec, validate

PRESET_G = (0.123126, 0.107251, 0.123126)
# (Omega_12, Omega_13, Omega_23)
PRESET_OMEGA = (4.12065e-3, 7.2793e-5, 4.12065e-3)
# J_2, J_3, J_4 for system guides 1 and 3; guide 2 lies in the bath plane.
PRESET_J = (2.42439e-2, 5.06164e-4, 4.89101e-6)
PRESET_N_BATH = 150

# Rates below this fraction of delta are stored as exact zeros.
J_CUTOFF = 1e-12


def paper_preset(fidelity=Fidelity.FULL, n_bath: int = PRESET_N_BATH) -> SystemSpec:
    """Three-guide geometry with rates normalized to the bath-bath coupling."""
    o12, o13, o23 = PRESET_OMEGA
    omega = np.array([[0.0, o12, o13],
                      [o12, 0.0, o23],
                      [o13, o23, 0.0]])
    jc = np.zeros((3, n_bath - 1))
    k = min(len(PRESET_J), n_bath - 1)
    for row in (0, 2):
        jc[row, :k] = PRESET_J[:k]
    return SystemSpec(np.array(PRESET_G), n_bath, omega, jc, 1.0, fidelity)


@dataclass(frozen=True)
class CouplingModel:
    """Exponential evanescent-overlap surrogate ``amplitude * exp(-(d - d_ref) / L)``.

    Distances are in waveguide radii.
    """

    amplitude: float
    decay_length: float
    reference_distance: float = 0.0

    def __post_init__(self):
        if not (self.amplitude >= 0 and math.isfinite(self.amplitude)):
            raise ValueError(f"amplitude must be finite and >= 0, got {self.amplitude}")
        if not (self.decay_length > 0 and math.isfinite(self.decay_length)):
            raise ValueError(f"decay_length must be finite and > 0, got {self.decay_length}")


def coupling_rate(model: CouplingModel, d):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("coupling distance must be positive")
    rate = model.amplitude * np.exp(-(d - model.reference_distance) / model.decay_length)
    return float(rate) if rate.ndim == 0 else rate


def calibrate(d1: float, r1: float, d2: float, r2: float) -> CouplingModel:
    """The exponential model passing through ``(d1, r1)`` and ``(d2, r2)``.

    The reference distance is the nearer of the two points, so swapping the
    arguments gives the same model.
    """
    if d1 == d2:
        raise ValueError("calibration distances must differ")
    if not (r1 > 0 and r2 > 0):
        raise ValueError("calibration rates must be positive")
    if r1 == r2:
        raise ValueError("equal calibration rates imply an infinite decay length")
    if d1 > d2:
        d1, r1, d2, r2 = d2, r2, d1, r1
    decay_length = (d2 - d1) / math.log(r1 / r2)
    if decay_length <= 0:
        raise ValueError("coupling must decrease with distance")
    return CouplingModel(r1, decay_length, d1)


@dataclass(frozen=True, eq=False)
class GeometrySpec:
    """Transverse guide positions; system guides first, then the bath guides in order."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must be an (n, 2) array")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def check(self, n_system: int) -> None:
        pos = self.positions
        n_bath = len(pos) - n_system
        if n_system < 1 or n_bath < 1:
            raise ValueError("need at least one system guide and one bath guide")
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(dist, np.inf)
        if np.any(dist == 0):
            raise ValueError("two guides share a position")
        bath = pos[n_system:]
        if n_bath >= 2:
            steps = np.diff(bath, axis=0)
            spacing = np.hypot(steps[:, 0], steps[:, 1])
            if np.ptp(spacing) > 1e-9:
                raise ValueError("bath guides must be equally spaced")
            # collinear: every step parallel to the first
            cross = steps[:, 0] * steps[0, 1] - steps[:, 1] * steps[0, 0]
            if np.any(np.abs(cross) > 1e-9 * spacing[0] ** 2) or np.any(steps @ steps[0] <= 0):
                raise ValueError("bath guides must lie on a line, in order")


def geometry_to_spec(geom: GeometrySpec, model: CouplingModel, n_system: int,
                     fidelity=Fidelity.FULL) -> SystemSpec:
    """Rates for every guide pair in ``geom``, normalized so that delta = 1.

    Only nearest-neighbour bath-bath coupling is kept, as in the coupled-mode
    Hamiltonian; system guides couple to every bath guide.
    """
    geom.check(n_system)
    pos = geom.positions
    sys_pos, bath_pos = pos[:n_system], pos[n_system:]
    n_bath = len(bath_pos)
    if n_bath < 2:
        raise SpecError("a single bath guide has no bath-bath coupling to normalize by")
    spacing = float(np.hypot(*(bath_pos[1] - bath_pos[0])))
    delta = coupling_rate(model, spacing)
    if delta <= 0:
        raise SpecError("bath-bath coupling vanishes")

    def rates(a, b):
        d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
        return np.asarray(coupling_rate(model, np.where(d > 0, d, np.inf))) / delta

    sb = rates(sys_pos, bath_pos)
    g = sb[:, 0]
    jc = sb[:, 1:]
    jc[jc < J_CUTOFF] = 0.0
    omega = np.zeros((n_system, n_system))
    if n_system > 1:
        ss = rates(sys_pos, sys_pos)
        iu = np.triu_indices(n_system, 1)
        omega[iu] = ss[iu]
        omega = omega + omega.T
    spec = SystemSpec(g, n_bath, omega, jc, 1.0, fidelity)
    validate(spec)
    return spec
