"""Spectra, exact propagation, and the sparse Chebyshev evaluator."""

import numpy as np
import pytest

from qbattery.basis import build_dicke_basis, build_jch_sector
from qbattery.dynamics import (
    ChebyshevEngine,
    EigenEngine,
    Spectrum,
    diagonalize,
    expectation_diag,
    prepare,
)
from qbattery.hamiltonians import (
    Model,
    ModelParams,
    build_basis,
    build_csr,
    build_hamiltonian,
    initial_state,
    jz_diagonal,
)


def _system(params):
    basis = build_basis(params)
    h = build_hamiltonian(params, basis)
    return basis, h, jz_diagonal(params, basis), initial_state(params, basis)


def jch(**kw):
    return ModelParams(model=Model.JCH, **kw)


def dicke(**kw):
    return ModelParams(model=Model.DICKE, **kw)


# ---------------------------------------------------------------------------
# Diagonalization.


def test_two_by_two_eigenvalues():
    spec = diagonalize(np.array([[1.0, 0.05], [0.05, 1.0]]))
    assert np.allclose(spec.eigenvalues, [0.95, 1.05], atol=1e-12)


def test_diagonal_matrix_spectrum_is_sorted_diagonal():
    d = np.array([3.0, -1.0, 2.0, 0.5])
    spec = diagonalize(np.diag(d))
    assert np.allclose(spec.eigenvalues, np.sort(d), atol=1e-14)
    # Eigenvectors of a diagonal matrix are signed unit vectors.
    assert np.allclose(np.abs(spec.eigenvectors).sum(axis=0), 1.0, atol=1e-14)
    assert np.allclose(np.abs(spec.eigenvectors).max(axis=0), 1.0, atol=1e-14)


def test_random_symmetric_reconstruction_and_orthonormality():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((50, 50))
    h = (a + a.T) / 2.0
    spec = diagonalize(h)
    v, lam = spec.eigenvectors, spec.eigenvalues
    norm = np.max(np.abs(h))
    assert np.max(np.abs(v @ np.diag(lam) @ v.T - h)) <= 1e-9 * norm
    assert np.max(np.abs(v.T @ v - np.eye(50))) <= 1e-10
    assert np.all(np.diff(lam) >= 0)


def test_diagonalize_rejects_nonsquare():
    with pytest.raises(ValueError):
        diagonalize(np.zeros((3, 4)))


# ---------------------------------------------------------------------------
# State preparation.


def test_prepare_on_eigenvector_gives_indicator():
    spec = diagonalize(np.array([[1.0, 0.05], [0.05, 1.0]]))
    state = prepare(spec, spec.eigenvectors[:, 1])
    assert np.allclose(np.abs(state.coeffs), [0.0, 1.0], atol=1e-12)


def test_prepare_preserves_norm():
    rng = np.random.default_rng(3)
    h = rng.standard_normal((12, 12))
    h = (h + h.T) / 2.0
    psi0 = rng.standard_normal(12)
    psi0 /= np.linalg.norm(psi0)
    state = prepare(diagonalize(h), psi0)
    assert abs(np.sum(np.abs(state.coeffs) ** 2) - 1.0) <= 1e-10


def test_prepare_dimension_mismatch():
    spec = diagonalize(np.eye(3))
    with pytest.raises(ValueError):
        prepare(spec, np.array([1.0, 0.0]))


def test_prepare_matches_direct_projection():
    params = jch(n=2, m=1, beta=0.05, kappa=0.1)
    basis, h, _, psi0 = _system(params)
    spec = diagonalize(h)
    state = prepare(spec, psi0)
    direct = np.array([spec.eigenvectors[:, j] @ psi0 for j in range(basis.dim)])
    assert np.allclose(state.coeffs, direct, atol=1e-14)


# ---------------------------------------------------------------------------
# Expectations on the dense path.


def test_expectation_at_zero_matches_initial_value():
    params = jch(n=2, m=2, beta=0.3, kappa=0.2)
    _, h, jz, psi0 = _system(params)
    state = prepare(diagonalize(h), psi0)
    assert expectation_diag(state, jz, 0.0) == pytest.approx(float(jz @ psi0**2), abs=1e-12)


def test_identity_observable_is_one_for_all_times():
    params = jch(n=2, m=1, beta=0.4, kappa=0.3)
    _, h, _, psi0 = _system(params)
    state = prepare(diagonalize(h), psi0)
    ts = np.linspace(0.0, 40.0, 64)
    ones = expectation_diag(state, np.ones(h.basis.dim), ts)
    assert np.max(np.abs(ones - 1.0)) <= 1e-10


def test_single_cavity_oscillation_closed_form():
    params = jch(n=1, m=1, beta=0.05)
    _, h, jz, psi0 = _system(params)
    state = prepare(diagonalize(h), psi0)
    ts = np.linspace(0.0, 200.0, 400)
    got = expectation_diag(state, jz, ts)
    assert np.max(np.abs(got - np.sin(0.05 * ts) ** 2)) <= 1e-12


def test_expectation_rejects_nondiagonal_observable():
    params = jch(n=2, m=1, beta=0.05, kappa=0.1)
    _, h, _, psi0 = _system(params)
    state = prepare(diagonalize(h), psi0)
    with pytest.raises(ValueError):
        expectation_diag(state, h, 1.0)


@pytest.mark.parametrize(
    "params",
    [jch(n=2, m=2, beta=0.3, kappa=0.4), dicke(n=3, m=1, beta=0.6, beta_prime=0.2, n_max=9)],
)
def test_unitarity_energy_conservation_and_bounds(params):
    basis, h, jz, psi0 = _system(params)
    spec = diagonalize(h)
    state = prepare(spec, psi0)
    v, lam, c = spec.eigenvectors, spec.eigenvalues, state.coeffs
    h_norm = np.max(np.abs(h.entries))
    e0 = float(c @ (lam * c))
    for t in np.linspace(0.0, 60.0, 31):
        psi = v @ (c * np.exp(-1j * lam * t))
        assert abs(np.vdot(psi, psi).real - 1.0) <= 1e-10
        assert abs((np.vdot(psi, h.entries @ psi)).real - e0) <= 1e-9 * h_norm
        val = expectation_diag(state, jz, float(t))
        assert -1e-9 <= val <= params.n * params.omega_a + 1e-9


def test_engine_grid_matches_scalar_calls():
    params = jch(n=2, m=1, beta=0.11, kappa=0.23)
    _, h, jz, psi0 = _system(params)
    engine = EigenEngine(prepare(diagonalize(h), psi0), jz)
    ts = np.array([0.0, 0.7, 3.1, 17.0, 44.4])
    grid = engine.on_grid(ts)
    for t, val in zip(ts, grid):
        assert engine.at(float(t)) == pytest.approx(val, abs=1e-12)


# ---------------------------------------------------------------------------
# Chebyshev propagation vs the exact dense path.


@pytest.mark.parametrize(
    "params",
    [
        jch(n=2, m=1, beta=0.05, kappa=0.1),
        jch(n=3, m=1, beta=0.05, kappa=0.5),
        jch(n=2, m=2, beta=0.3, kappa=0.7),
        dicke(n=2, m=1, beta=2.0, beta_prime=0.3, n_max=10),
        dicke(n=4, m=1, beta=0.5, n_max=20),
    ],
)
def test_chebyshev_matches_eigenbasis(params):
    basis, h, jz, psi0 = _system(params)
    exact = EigenEngine(prepare(diagonalize(h), psi0), jz)
    cheb = ChebyshevEngine(build_csr(params, basis), psi0, [jz])
    ts = np.linspace(0.0, 150.0, 301)
    assert np.max(np.abs(cheb.on_grid(ts) - exact.on_grid(ts))) <= 1e-10
    for t in (0.0, 0.05, 1.7, 149.3):
        assert cheb.at(t) == pytest.approx(exact.at(t), abs=1e-10)


def test_chebyshev_unsorted_grid_and_revisits():
    params = jch(n=2, m=1, beta=0.2, kappa=0.3)
    basis, h, jz, psi0 = _system(params)
    cheb = ChebyshevEngine(build_csr(params, basis), psi0, [jz])
    ts = np.array([40.0, 1.0, 90.0, 1.0, 0.0])
    got = cheb.on_grid(ts)
    exact = EigenEngine(prepare(diagonalize(h), psi0), jz)
    assert np.max(np.abs(got - exact.on_grid(ts))) <= 1e-10
    # Asking for an earlier time after extension must not disturb anything.
    assert cheb.at(1.0) == pytest.approx(got[1], abs=1e-14)


def test_chebyshev_deterministic_across_instances():
    params = dicke(n=3, m=1, beta=0.7, beta_prime=0.4, n_max=12)
    basis = build_basis(params)
    psi0 = initial_state(params, basis)
    jz = jz_diagonal(params, basis)
    ts = np.linspace(0.1, 80.0, 257)
    runs = []
    for _ in range(2):
        engine = ChebyshevEngine(build_csr(params, basis), psi0, [jz])
        runs.append(engine.on_grid(ts))
    assert np.array_equal(runs[0], runs[1])


def test_chebyshev_tracks_multiple_observables():
    params = jch(n=2, m=1, beta=0.3, kappa=0.2)
    basis, h, jz, psi0 = _system(params)
    photons = np.array([float(sum(s.photons)) for s in basis.states])
    cheb = ChebyshevEngine(build_csr(params, basis), psi0, [jz, photons])
    state = prepare(diagonalize(h), psi0)
    ts = np.linspace(0.0, 30.0, 61)
    assert np.max(np.abs(cheb.values_on_grid(0, ts) - expectation_diag(state, jz, ts))) <= 1e-10
    assert (
        np.max(np.abs(cheb.values_on_grid(1, ts) - expectation_diag(state, photons, ts))) <= 1e-10
    )


def test_chebyshev_rejects_negative_times():
    params = jch(n=2, m=1, beta=0.3, kappa=0.2)
    basis = build_basis(params)
    engine = ChebyshevEngine(
        build_csr(params, basis), initial_state(params, basis), [jz_diagonal(params, basis)]
    )
    with pytest.raises(ValueError):
        engine.at(-1.0)
    with pytest.raises(ValueError):
        engine.on_grid(np.array([1.0, -2.0]))


def test_spectrum_is_plain_data():
    spec = diagonalize(np.eye(4))
    assert isinstance(spec, Spectrum)
    assert spec.eigenvalues.shape == (4,)
    assert spec.eigenvectors.shape == (4, 4)
