from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from spinscatter import engine
from spinscatter.engine import (
    ScatteringModel,
    build_effective_hamiltonian,
    retarded_gf,
    solve_scattering,
)
from spinscatter.exceptions import ClosedChannelError, FluxConservationError, IllConditionedError
from spinscatter.lead import LeadSpec, band_energy, self_energies
from spinscatter.models import kondo_contact_spread, molecular_block, MolecularParams
from spinscatter.oracles import wavefunction_matching_solve


def free_chain(N=3, t=1.0, d=1):
    return ScatteringModel(tuple(np.zeros((d, d)) for _ in range(N)), LeadSpec(t, (0.0,) * d), partner=0)


def test_model_validation():
    with pytest.raises(ValueError):
        ScatteringModel((np.array([[0, 1], [0, 0]]),), LeadSpec(1.0, (0.0, 0.0)))
    with pytest.raises(ValueError):
        ScatteringModel((np.zeros((3, 3)),), LeadSpec(1.0, (0.0, 0.0)))
    with pytest.raises(ValueError):
        ScatteringModel((), LeadSpec(1.0, (0.0,)))
    with pytest.raises(ValueError):
        ScatteringModel((np.zeros((2, 2)),), LeadSpec(1.0, (0.0, 0.0)), incoming=5)


def test_effective_hamiltonian_example():
    model = free_chain(N=1)
    h = build_effective_hamiltonian(model, 2.0)
    expected = np.array([[-1j, -1, 0], [-1, 0, -1], [0, -1, -1j]])
    np.testing.assert_allclose(h, expected, atol=1e-15)


def test_effective_hamiltonian_structure():
    model = molecular_block(MolecularParams.symmetric(1.5, -0.2, 0.3, 0.3), 2, 10.0)
    h = build_effective_hamiltonian(model, 0.5)
    assert h.shape == (12, 12)
    d = 3
    non_hermitian = [
        j for j in range(4)
        if np.max(np.abs(h[j * d:(j + 1) * d, j * d:(j + 1) * d] - h[j * d:(j + 1) * d, j * d:(j + 1) * d].conj().T)) > 0
    ]
    assert non_hermitian == [0, 3]
    sig = np.diag(self_energies(0.5, model.lead))
    bare = h.copy()
    bare[:d, :d] -= sig
    bare[-d:, -d:] -= sig
    np.testing.assert_allclose(bare, bare.conj().T, atol=1e-14)


@pytest.mark.parametrize("K", [0.01, 0.5, 2.0, 3.5])
def test_free_chain_is_transparent(K):
    model = free_chain(N=4)
    out = solve_scattering(model, K)
    assert out.T[0] == pytest.approx(1.0, abs=1e-12)
    assert out.R[0] == pytest.approx(0.0, abs=1e-12)
    G = retarded_gf(model, K)
    assert abs(G[-1, 0]) * out.channels.v[0] == pytest.approx(1.0, abs=1e-12)


def test_green_function_is_inverse(random_cases):
    for model, K in random_cases[:20]:
        work = model.zeroed(0)
        G = retarded_gf(work, K)
        a = band_energy(K, work.t) * np.eye(G.shape[0]) - build_effective_hamiltonian(work, K)
        np.testing.assert_allclose(G @ a, np.eye(G.shape[0]), atol=1e-10)


def test_kondo_matches_oracle_at_example_energy():
    model = kondo_contact_spread(0.5, -0.5, 2, 100.0)
    K = 0.004 * 100.0
    a, b = solve_scattering(model, K), wavefunction_matching_solve(model, K)
    np.testing.assert_allclose(a.T, b.T, atol=1e-10)
    np.testing.assert_allclose(a.R, b.R, atol=1e-10)


def test_zero_coupling_is_transparent():
    model = kondo_contact_spread(0.5, 0.0, 2, 100.0)
    out = solve_scattering(model, 0.3)
    np.testing.assert_allclose(out.T, [1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(out.R, 0, atol=1e-12)


def test_random_models_conserve_flux_and_match_oracle(random_cases):
    for model, K in random_cases[:50]:
        out = solve_scattering(model, K)
        ref = wavefunction_matching_solve(model, K)
        assert abs(out.flux - 1) < 1e-10
        np.testing.assert_allclose(out.T, ref.T, atol=1e-10)
        np.testing.assert_allclose(out.R, ref.R, atol=1e-10)
        assert np.all(out.T >= 0) and np.all(out.R >= 0)
        assert np.all(out.T[~out.channels.open] == 0)


@pytest.mark.parametrize("seed", range(10))
def test_reciprocity_single_channel(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 6))
    eps = tuple(np.array([[rng.normal()]]) for _ in range(N))
    model = ScatteringModel(eps, LeadSpec(1.0, (0.0,)), partner=0)
    K = rng.uniform(0.1, 3.9)
    assert solve_scattering(model, K).T[0] == pytest.approx(solve_scattering(model.mirrored(), K).T[0], abs=1e-12)


def test_threshold_law():
    rng = np.random.default_rng(7)
    eps = (np.array([[0.1, 0.3], [0.3, -0.2]]), np.array([[0.0, 0.2], [0.2, 0.1]]))
    gap = 0.05
    model = ScatteringModel(eps, LeadSpec(1.0, (0.0, gap)))
    for K in rng.uniform(1e-4, gap, 20):
        assert solve_scattering(model, K).T[1] == 0.0
    above = solve_scattering(model, gap * (1 + 1e-6))
    assert above.T[1] > 0


def test_closed_incoming_is_rejected():
    model = ScatteringModel((np.zeros((2, 2)),), LeadSpec(1.0, (0.0, 0.5)))
    with pytest.raises(ClosedChannelError):
        solve_scattering(model, -0.2, incoming=1)
    with pytest.raises(ClosedChannelError):
        solve_scattering(model, 4.5)


def test_singular_system_is_reported():
    # a channel that cannot hop, sitting exactly at the electron energy, decouples
    model = ScatteringModel((np.zeros((2, 2)),), LeadSpec(1.0, (0.0, 0.0), hopping_mask=(1, 0)))
    with pytest.raises(IllConditionedError) as info:
        solve_scattering(model, 2.0)
    assert info.value.condition > engine.MAX_CONDITION


def test_flux_violation_is_flagged(monkeypatch):
    monkeypatch.setattr(engine, "FLUX_TOL", -1.0)
    with pytest.raises(FluxConservationError) as info:
        solve_scattering(free_chain(), 1.0)
    assert info.value.outcome is not None


def test_shift_invariance():
    model = ScatteringModel((np.array([[0.2, 0.1], [0.1, 0.0]]),), LeadSpec(1.0, (0.3, 0.4)))
    a = solve_scattering(model, 0.7)
    b = solve_scattering(model.shifted(-1.3), 0.7)
    np.testing.assert_allclose(a.T, b.T, atol=1e-13)


def test_relative_phase_range_and_closed_partner():
    model = kondo_contact_spread(0.5, -0.5, 2, 100.0)
    for K in (1e-4, 0.1, 10.0):
        phase = solve_scattering(model, K).phi_plus
        assert 0 <= phase < 2 * np.pi
    gapped = ScatteringModel((np.array([[0, 0.1], [0.1, 0]]),), LeadSpec(1.0, (0.0, 0.5)))
    assert solve_scattering(gapped, 0.1).phi_plus is None


def test_by_label():
    out = solve_scattering(kondo_contact_spread(0.5, -0.5, 2, 100.0), 0.1)
    assert set(out.by_label("T")) == {"i", "plus", "minus"}


def test_concurrent_solves_match_serial():
    model = kondo_contact_spread(1.5, -0.5, 3, 100.0)
    Ks = np.geomspace(1e-4, 10, 64)
    serial = [solve_scattering(model, K).T for K in Ks]
    with ThreadPoolExecutor(8) as pool:
        parallel = list(pool.map(lambda K: solve_scattering(model, K).T, Ks))
    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a, b)
