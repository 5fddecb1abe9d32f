"""Brute-force Fock-space solver for a few modes and at most a few photons.

Independent of the moment-transport code: it builds the many-body
Hamiltonian from ladder matrices in an occupation basis, evolves a state
vector with a dense matrix exponential and reads moments off the wave
function. Used to check the moment-propagation convention.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.linalg import expm


def occupation_basis(n_modes: int, max_photons: int) -> list[tuple[int, ...]]:
    basis = [
        occ
        for occ in itertools.product(range(max_photons + 1), repeat=n_modes)
        if sum(occ) <= max_photons
    ]
    basis.sort(key=lambda occ: (sum(occ), tuple(-x for x in occ)))
    return basis


def annihilators(basis) -> list[np.ndarray]:
    index = {occ: k for k, occ in enumerate(basis)}
    n_modes = len(basis[0])
    ops = []
    for mode in range(n_modes):
        a = np.zeros((len(basis), len(basis)))
        for col, occ in enumerate(basis):
            n = occ[mode]
            if n == 0:
                continue
            lowered = occ[:mode] + (n - 1,) + occ[mode + 1:]
            a[index[lowered], col] = np.sqrt(n)
        ops.append(a)
    return ops


class FockSolver:
    """Quadratic Hamiltonian ``sum_kl h_kl a_k^dag a_l`` on the truncated Fock space.

    Number conservation keeps ``a_k^dag a_l`` inside the truncation, so the
    truncated dynamics are exact.
    """

    def __init__(self, h, max_photons: int = 2):
        h = np.asarray(h)
        self.n_modes = h.shape[0]
        self.basis = occupation_basis(self.n_modes, max_photons)
        self.a = annihilators(self.basis)
        dim = len(self.basis)
        self.hamiltonian = np.zeros((dim, dim), dtype=complex)
        for k in range(self.n_modes):
            for l in range(self.n_modes):
                if h[k, l] != 0:
                    self.hamiltonian += h[k, l] * self.a[k].T @ self.a[l]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def evolve(self, psi, t: float) -> np.ndarray:
        return expm(-1j * t * self.hamiltonian) @ psi

    def moments(self, psi) -> tuple[np.ndarray, np.ndarray]:
        """``(<a_i>, <a_i^dag a_j>)`` of a normalized state vector."""
        mean = np.array([psi.conj() @ a @ psi for a in self.a])
        corr = np.array([[psi.conj() @ ai.T @ aj @ psi for aj in self.a] for ai in self.a])
        return mean, corr
