import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from superradiance import MomentState, SystemSpec, collective
from superradiance.analytic import (
    Radiance,
    ThermalBathSpec,
    bright_correlation,
    classify_radiance,
    correlation_t,
    dark_correlation,
    fock_correlation,
    intensity_parts,
    intensity_t,
    steady_state_intensity,
    thermal_intensity_t,
    thermal_total_quanta_t,
    total_quanta_t,
)
from superradiance.fockspace import annihilators, occupation_basis
from superradiance.states import bright_state, dark_state, fock_state

from conftest import G

GAMMA = 2 * float(G @ G) / 3
RATE = 3 * GAMMA


class EffectiveMasterEquation:
    """Collective decay ``L[rho] = k (C rho C^+ - {C^+ C, rho} / 2)`` in a truncated Fock space."""

    def __init__(self, g, max_photons=2):
        g = np.asarray(g, dtype=float)
        self.basis = occupation_basis(len(g), max_photons)
        self.a = annihilators(self.basis)
        c = sum(gj * aj for gj, aj in zip(g, self.a)) / np.linalg.norm(g)
        kappa = 2 * float(g @ g)
        dim = len(self.basis)
        eye = np.eye(dim)
        cdc = c.T @ c
        # row-major vec: vec(A X B) = (A kron B^T) vec(X)
        self.liouvillian = kappa * (np.kron(c, c) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T))
        self.dim = dim

    def propagate(self, x, t):
        return (expm(self.liouvillian * t) @ x.reshape(-1)).reshape(self.dim, self.dim)

    def state(self, psi):
        return np.outer(psi, psi.conj())

    def two_time(self, rho, i, j, t):
        """``<a_i^+(t) a_j(0)>`` by quantum regression."""
        return np.trace(self.a[i].T @ self.propagate(self.a[j] @ rho, t))

    def population(self, rho, t):
        r = self.propagate(rho, t)
        return sum(np.trace(a.T @ a @ r) for a in self.a).real


def fock_vector(basis, occ, amplitudes=None):
    psi = np.zeros(len(basis), dtype=complex)
    psi[basis.index(tuple(occ))] = 1
    return psi


def two_photon_in_mode(basis, u):
    """``(sum_k u_k a_k^+)^2 / sqrt(2) |0>`` expanded in the occupation basis."""
    psi = np.zeros(len(basis), dtype=complex)
    n = len(u)
    for k in range(n):
        for l in range(n):
            occ = [0] * n
            occ[k] += 1
            occ[l] += 1
            amp = u[k] * u[l] / math.sqrt(2)
            # a_k^+ a_l^+ |0> = sqrt(prod n!) |occ>
            amp *= math.sqrt(math.prod(math.factorial(x) for x in occ))
            psi[basis.index(tuple(occ))] += amp
    return psi


@pytest.fixture(scope="module")
def master():
    return EffectiveMasterEquation(G)


def test_total_quanta_examples(preset):
    assert total_quanta_t(bright_state(preset, 2), preset, 0.0) == pytest.approx(2)
    dark = dark_state(preset, 2)
    assert np.allclose(total_quanta_t(dark, preset, np.linspace(0, 500, 11)), 2, atol=1e-14)
    normal = fock_state([2, 0, 0], preset.n_bath)
    expected = 2 - 2 * G[0] ** 2 / (G @ G) * (1 - math.exp(-1))
    assert total_quanta_t(normal, preset, 1 / RATE) == pytest.approx(expected, rel=1e-13)
    assert total_quanta_t(normal, preset, 1 / RATE) == pytest.approx(1.5417354, abs=1e-7)


def test_total_quanta_matches_master_equation(preset, master):
    ts = [0.0, 5.0, 17.0, 40.0]
    cases = [
        (bright_state(preset, 2), two_photon_in_mode(master.basis, G / np.linalg.norm(G))),
        (fock_state([2, 0, 0]), fock_vector(master.basis, (2, 0, 0))),
        (dark_state(preset, 2), two_photon_in_mode(master.basis, np.array([1, 0, -1]) / math.sqrt(2))),
    ]
    for state, psi in cases:
        rho = master.state(psi)
        for t in ts:
            assert total_quanta_t(state, preset, t) == pytest.approx(master.population(rho, t), abs=1e-10)


def test_intensity_examples(preset):
    bright = bright_state(preset, 2)
    assert intensity_t(bright, preset, 0.0) == pytest.approx(6 * GAMMA, rel=1e-13)
    assert intensity_t(bright, preset, 0.0) == pytest.approx(0.167291, abs=1e-6)
    assert np.all(intensity_t(dark_state(preset, 2), preset, np.linspace(0, 100, 5)) == 0)
    ratio = intensity_t(bright, preset, 0.0) / intensity_t(fock_state([2, 0, 0]), preset, 0.0)
    assert ratio == pytest.approx(float(G @ G) / G[0] ** 2, rel=1e-13)
    assert ratio == pytest.approx(2.75876, abs=1e-4)


def test_two_photon_state_factors(preset):
    # I_k(t) = 6 Gamma f_k exp(-3 Gamma t)
    t = np.linspace(0, 60, 7)
    f = {"B": 1.0, "N": G[0] ** 2 / (G @ G), "D": 0.0}
    states = {"B": bright_state(preset, 2), "N": fock_state([2, 0, 0]), "D": dark_state(preset, 2)}
    for key, state in states.items():
        expected = 6 * GAMMA * f[key] * np.exp(-3 * GAMMA * t)
        assert np.allclose(intensity_t(state, preset, t), expected, rtol=1e-12, atol=1e-16)


def test_intensity_parts_brute_force(preset):
    corr = bright_state(preset, 2).corr[:3, :3].real
    g2 = float(G @ G)
    i_u = 3 * GAMMA / g2 * sum(G[j] ** 2 * corr[j, j] for j in range(3))
    i_c = 3 * GAMMA / g2 * sum(G[i] * G[j] * corr[i, j] for i in range(3) for j in range(3) if i != j)
    got_u, got_c = intensity_parts(bright_state(preset, 2), preset, 0.0)
    assert got_u == pytest.approx(i_u, rel=1e-13) and got_c == pytest.approx(i_c, rel=1e-13)
    assert got_u == pytest.approx(0.0566166, abs=1e-7)
    assert got_c == pytest.approx(0.1106746, abs=1e-7)


def test_intensity_parts_fock_and_dark(preset):
    t = np.linspace(0, 50, 6)
    _, i_c = intensity_parts(fock_state([2, 1, 0]), preset, t)
    assert np.all(i_c == 0)
    i_u, i_c = intensity_parts(dark_state(preset, 2), preset, 0.0)
    assert i_u > 0 and i_u + i_c == pytest.approx(0, abs=1e-15)


def test_classification_trio(preset):
    assert classify_radiance(bright_state(preset, 2), preset).kind is Radiance.SUPER
    assert classify_radiance(fock_state([2, 0, 0]), preset).kind is Radiance.NORMAL
    dark = classify_radiance(dark_state(preset, 2), preset)
    assert dark.kind is Radiance.SUB and dark.correlated_part < 0


def test_correlation_examples(preset):
    t = np.linspace(0, 80, 9)
    bright = bright_state(preset, 2)
    c0 = 2 * G[0] * G[2] / (G @ G)
    assert correlation_t(bright, preset, 0, 2, 0.0) == pytest.approx(0.724964, abs=1e-6)
    assert np.allclose(correlation_t(bright, preset, 0, 2, t), c0 * np.exp(-RATE * t / 2), atol=1e-14)
    normal = fock_state([2, 0, 0])
    c31 = correlation_t(normal, preset, 2, 0, t)
    assert np.allclose(c31, -c0 * (1 - np.exp(-RATE * t / 2)), atol=1e-14)
    assert correlation_t(normal, preset, 2, 0, 1e6) == pytest.approx(-0.724964, abs=1e-6)
    assert np.allclose(correlation_t(dark_state(preset, 2), preset, 0, 2, t), -1, atol=1e-14)
    with pytest.raises(IndexError):
        correlation_t(bright, preset, 0, 3, 1.0)


def test_correlation_matches_master_equation(preset, master):
    """Quantum regression on the effective master equation fixes the N Gamma / 2 rate."""
    cases = [
        (bright_state(preset, 2), two_photon_in_mode(master.basis, G / np.linalg.norm(G))),
        (fock_state([2, 0, 0]), fock_vector(master.basis, (2, 0, 0))),
        (dark_state(preset, 2), two_photon_in_mode(master.basis, np.array([1, 0, -1]) / math.sqrt(2))),
    ]
    for state, psi in cases:
        rho = master.state(psi)
        for t in (3.0, 12.0, 30.0):
            for i, j in ((0, 2), (2, 0), (1, 1), (0, 1)):
                want = master.two_time(rho, i, j, t)
                assert correlation_t(state, preset, i, j, t) == pytest.approx(want, abs=1e-10)


def test_correlation_coherent_input(preset, master):
    # superposition across photon-number sectors gives nonzero means
    psi = (fock_vector(master.basis, (0, 0, 0)) + 0.6 * fock_vector(master.basis, (1, 0, 0))
           + 0.3j * fock_vector(master.basis, (0, 1, 0)) - 0.4 * fock_vector(master.basis, (1, 0, 1)))
    psi /= np.linalg.norm(psi)
    mean = np.array([psi.conj() @ a @ psi for a in master.a])
    corr = np.array([[psi.conj() @ ai.T @ aj @ psi for aj in master.a] for ai in master.a])
    state = MomentState(mean, corr)
    rho = master.state(psi)
    for t in (0.0, 7.0, 25.0):
        for i, j in ((0, 1), (2, 0), (1, 1)):
            mean_i_t = np.trace(master.a[i].T @ master.propagate(rho, t))
            want = master.two_time(rho, i, j, t) - mean_i_t * mean[j]
            assert correlation_t(state, preset, i, j, t) == pytest.approx(want, abs=1e-10)


def test_closed_forms_agree_with_regression(preset):
    t = np.linspace(0, 120, 25)
    for r in (1, 2, 3):
        bright, dark = bright_state(preset, r), dark_state(preset, r)
        for i in range(3):
            for j in range(3):
                assert np.allclose(correlation_t(bright, preset, i, j, t),
                                   bright_correlation(preset, r, i, j, t), rtol=0, atol=1e-12)
                assert np.allclose(correlation_t(dark, preset, i, j, t),
                                   dark_correlation(preset, r, i, j, t), rtol=0, atol=1e-12)
    for ns in ([2, 0, 0], [1, 3, 0], [0, 1, 1]):
        state = fock_state(ns)
        for i in range(3):
            for j in range(3):
                assert np.allclose(correlation_t(state, preset, i, j, t),
                                   fock_correlation(preset, ns, i, j, t), rtol=0, atol=1e-12)


def test_thermal_examples(preset):
    bright = bright_state(preset, 2)
    t = np.linspace(0, 100, 11)
    assert np.allclose(thermal_total_quanta_t(bright, preset, 0.0, t), total_quanta_t(bright, preset, t))
    assert np.allclose(thermal_intensity_t(bright, preset, 0.0, t), intensity_t(bright, preset, t))
    vacuum = fock_state([0, 0, 0])
    assert thermal_total_quanta_t(vacuum, preset, 0.5, 1e5) == pytest.approx(0.5)
    assert thermal_intensity_t(vacuum, preset, 0.5, 1e5) == pytest.approx(RATE * 0.5)
    assert steady_state_intensity(preset, 0.2) == pytest.approx(RATE * 0.2, rel=1e-14)
    steady = bright_state(preset, 1)
    assert np.allclose(thermal_total_quanta_t(steady, preset, 1.0, t), 1.0)
    assert np.allclose(thermal_intensity_t(steady, preset, 1.0, t), RATE)
    with pytest.raises(ValueError):
        ThermalBathSpec(-0.1)


def test_negative_time_rejected(preset):
    with pytest.raises(ValueError):
        total_quanta_t(bright_state(preset, 1), preset, -1.0)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    mean = rng.normal(size=n) + 1j * rng.normal(size=n)
    corr = a.conj() @ a.T + np.outer(mean.conj(), mean)
    return MomentState(mean, corr)


specs = st.lists(st.floats(0.01, 0.4), min_size=2, max_size=5).map(lambda g: SystemSpec(g, 2))


@settings(max_examples=60, deadline=None)
@given(spec=specs, seed=st.integers(0, 2**32 - 1), tau=st.floats(0.0, 5.0))
def test_analytic_properties(spec, seed, tau):
    state = random_state(spec.n_system, seed)
    rate = collective(spec).collective_rate
    t = tau / rate
    i_u, i_c = intensity_parts(state, spec, t)
    total = intensity_t(state, spec, t)
    assert i_u + i_c == pytest.approx(total, rel=1e-12, abs=1e-15)
    assert total >= 0
    h = 1e-4 / rate
    t_c = max(t, h)
    fd = -(total_quanta_t(state, spec, t_c + h) - total_quanta_t(state, spec, t_c - h)) / (2 * h)
    assert fd == pytest.approx(intensity_t(state, spec, t_c), rel=1e-6)
    assert total_quanta_t(state, spec, t + 1.0) <= total_quanta_t(state, spec, t) + 1e-12
    n = spec.n_system
    conn = state.connected
    for i in range(n):
        for j in range(n):
            assert correlation_t(state, spec, i, j, 0.0) == pytest.approx(conn[i, j], abs=1e-12)
