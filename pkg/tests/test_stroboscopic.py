import numpy as np
import pytest
import scipy.linalg

from floqspin import (
    BranchAmbiguityError,
    MU_B,
    StaticParams,
    decompose_spin1,
    effective_hamiltonian,
    effective_hamiltonian_exact,
    extract_cancellation_field,
    one_cycle_propagator,
    solve_driven,
    spin1_basis_matrices,
    static_hamiltonian,
    to_fourier,
    track_levels,
)
from floqspin.constants import HBAR
from conftest import make_drive, make_params, random_hermitian


def test_undriven_propagator_is_plain_exponential():
    p = make_params(0.1)
    f = to_fourier(make_drive("x", 0.0))
    u = one_cycle_propagator(p, f, 100)
    expect = scipy.linalg.expm(-1j * f.period * static_hamiltonian(p) / HBAR)
    assert np.abs(u - expect).max() < 1e-12


def test_propagator_unitarity():
    p = make_params(1.0 / 3.0)
    f = to_fourier(make_drive("(xz)+", 250.0))
    u = one_cycle_propagator(p, f, 100)
    assert np.abs(u.conj().T @ u - np.eye(3)).max() < 1e-10
    assert abs(abs(np.linalg.det(u)) - 1.0) < 1e-10


def test_propagator_step_doubling_is_second_order():
    # Doubling the step count shrinks the change by about 4x (left-sampled
    # steps on a full period gain an order from the periodic cancellation).
    p = make_params(0.1)
    f = to_fourier(make_drive("(xy)+", 200.0))
    u100 = one_cycle_propagator(p, f, 100)
    u200 = one_cycle_propagator(p, f, 200)
    u400 = one_cycle_propagator(p, f, 400)
    r = np.linalg.norm(u100 - u200) / np.linalg.norm(u200 - u400)
    assert 2.0 < r < 8.0


def test_propagator_step_count_validated():
    p = make_params(0.1)
    with pytest.raises(ValueError):
        one_cycle_propagator(p, to_fourier(make_drive("x", 0.0)), 1)


def test_static_effective_hamiltonian_spectrum():
    p = make_params(0.1)
    f = to_fourier(make_drive("x", 0.0))
    eff = effective_hamiltonian(p, f, 100)
    assert np.abs(eff.eigenvalues() - np.array([-10 / 3, 7 / 6, 13 / 6])).max() < 1e-10
    assert eff.provenance == "exact"


def test_log_of_identity_is_zero():
    h = effective_hamiltonian_exact(np.eye(3, dtype=complex), 0.5)
    assert np.abs(h).max() < 1e-12


def test_log_reproduces_propagator():
    p = make_params(0.1)
    f = to_fourier(make_drive("(yz)-", 180.0))
    u = one_cycle_propagator(p, f, 100)
    h = effective_hamiltonian_exact(u, f.period)
    assert np.abs(h - h.conj().T).max() < 1e-12
    u_back = scipy.linalg.expm(-1j * f.period * h / HBAR)
    assert np.abs(u_back - u).max() < 1e-9
    # Eigenvalues confined to the first zone.
    w = np.linalg.eigvalsh(h)
    assert w.min() > -10.0 and w.max() <= 10.0


def test_branch_ambiguity_raises():
    with pytest.raises(BranchAmbiguityError):
        effective_hamiltonian_exact(np.diag([-1.0 + 0j, 1.0, 1.0]), 1.0)


def test_non_unitary_rejected():
    with pytest.raises(ValueError, match="unitary"):
        effective_hamiltonian_exact(np.diag([2.0 + 0j, 1.0, 1.0]), 1.0)


def test_folded_spectrum_matches_quasienergies():
    # Cross-method check with the step count pushed far enough that the
    # discretization error is below the comparison tolerance.
    p = make_params(0.1)
    d = make_drive("+x+z")
    bf = 100.0
    cur = track_levels(p, d, np.arange(0.0, bf + 1.0, 10.0))
    folded = cur.energies[-1] - 20.0 * np.round(cur.energies[-1] / 20.0)
    eff = effective_hamiltonian(p, to_fourier(d.with_amplitude(bf)), 25600)
    assert np.abs(np.sort(folded) - np.sort(eff.eigenvalues())).max() < 1e-8


def test_zero_field_decomposition_coefficients():
    # For the bare zero-field Hamiltonian: using 1 = (sx^2 + sy^2 + sz^2)/2
    # for spin 1, the coefficients are c1 = E - D/3, c2 = -E - D/3,
    # c3 = 2D/3, everything else zero.
    d_val, e_val = 5.0, 0.5
    p = StaticParams(S=1, D=d_val, E=e_val, g=2.0)
    c = decompose_spin1(static_hamiltonian(p))
    expect = np.array(
        [e_val - d_val / 3, -e_val - d_val / 3, 2 * d_val / 3, 0, 0, 0, 0, 0, 0]
    )
    assert np.abs(c - expect).max() < 1e-12
    assert abs((c[0] - c[1]) - 2 * e_val) < 1e-12


def test_zeeman_decomposition_coefficients():
    from floqspin import spin_operators, zeeman_hamiltonian

    ops = spin_operators(1)
    h = zeeman_hamiltonian((0.0, 0.0, 50.0), 2.0, ops)
    c = decompose_spin1(h)
    assert abs(c[8] - 2 * MU_B * 50.0) < 1e-12
    assert np.abs(c[6:8]).max() < 1e-14


def test_decomposition_round_trip_random(rng):
    basis = spin1_basis_matrices()
    for _ in range(20):
        h = random_hermitian(rng, 3, scale=4.0)
        c = decompose_spin1(h)
        back = sum(ci * mi for ci, mi in zip(c, basis))
        assert np.abs(back - h).max() < 1e-12


def test_decomposition_rejects_wrong_shape():
    with pytest.raises(ValueError, match="3x3"):
        decompose_spin1(np.eye(5))


def test_basis_matrices_are_independent():
    m = np.column_stack([b.reshape(9) for b in spin1_basis_matrices()])
    assert abs(np.linalg.det(m)) > 1e-6


def test_cancellation_field_extraction():
    script_b, b_eff = extract_cancellation_field(0.0, 0.0, 0.0, 2.0)
    assert np.abs(script_b).max() == 0.0 and np.abs(b_eff).max() == 0.0
    script_b, b_eff = extract_cancellation_field(2.0 * MU_B, 0.0, 0.0, 2.0)
    assert np.allclose(script_b, [2.0, 0.0, 0.0])
    assert np.allclose(b_eff, [1.0, 0.0, 0.0])
    with pytest.raises(ValueError, match="invertible"):
        extract_cancellation_field(1.0, 0.0, 0.0, np.zeros((3, 3)))


def test_linear_drive_effective_field_is_small():
    # Residual effective Zeeman vector for a linear drive at zero static
    # field stays at the few-mT scale.
    p = make_params(0.1)
    for pol in ("x", "z", "+y-z"):
        eff = effective_hamiltonian(p, to_fourier(make_drive(pol, 100.0)), 100)
        _, b_eff = extract_cancellation_field(*eff.coefficients[6:9], p.g)
        assert np.linalg.norm(b_eff) < 5.0


def test_effective_hamiltonian_skips_decomposition_for_other_spins():
    p = StaticParams(S=1.5, D=5.0, E=0.5, g=2.0)
    eff = effective_hamiltonian(p, to_fourier(make_drive("x", 50.0)), 100)
    assert eff.coefficients is None and eff.d_eff is None
    assert eff.h_eff.shape == (4, 4)


def test_stability_at_zero_effective_zeeman(rng):
    # For H = s^T D s + mu_B script_b . s with symmetric D, every eigenvalue
    # is stationary in script_b at the origin (finite differences on the
    # sorted spectrum).
    from floqspin import spin_operators

    svec = spin_operators(1).vector()
    delta = 0.01
    for _ in range(5):
        dmat = random_hermitian(rng, 3).real
        dmat = (dmat + dmat.T) / 2
        h0 = np.einsum("ab,aij,bjk->ik", dmat, svec, svec)
        for a in range(3):
            e = np.zeros(3)
            e[a] = delta
            hp = h0 + MU_B * np.tensordot(e, svec, axes=1)
            hm = h0 - MU_B * np.tensordot(e, svec, axes=1)
            slopes = (np.linalg.eigvalsh(hp) - np.linalg.eigvalsh(hm)) / (2 * delta)
            assert np.abs(slopes).max() < 1e-8
