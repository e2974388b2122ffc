import math

import numpy as np
import pytest

from darkwells.dynamics import analytic_sigma_symmetric
from darkwells.model import ParallelWellPair, WellPair
from darkwells.oracle import (
    DiscretizedReservoir,
    FockSpace,
    build_fock_hamiltonian,
    build_single_particle_hamiltonian,
    chebyshev_propagate,
    convergence_report,
    default_cutoff,
    dot_mode_count,
    evolve_exact,
    evolve_fock,
    fock_basis_state,
    fock_spectral_bounds,
    reduced_quantities,
    reservoir_couplings,
    single_particle_trajectory,
    slater_dot_rdm,
    slater_reservoir_distribution,
)
from darkwells.rotation import check_constant_ratio, dark_state


def test_reservoir_grid_geometry():
    res = DiscretizedReservoir.uniform(10, 5.0)
    assert res.spacing == pytest.approx(1.0)
    assert res.recurrence_time == pytest.approx(2.0 * math.pi)
    np.testing.assert_allclose(res.energies, np.arange(-4.5, 5.0, 1.0))
    # midpoint offset: symmetric grid, no level at zero
    assert np.all(res.energies != 0.0)
    np.testing.assert_allclose(res.energies + res.energies[::-1], 0.0, atol=1e-15)


def test_reservoir_validation():
    with pytest.raises(ValueError, match=">= 10"):
        DiscretizedReservoir.uniform(8, 5.0)
    with pytest.raises(ValueError, match="even"):
        DiscretizedReservoir.uniform(11, 5.0)
    with pytest.raises(ValueError, match="positive"):
        DiscretizedReservoir.uniform(10, 0.0)


def test_default_cutoff_scales():
    assert default_cutoff(WellPair.from_widths(1.0, 1.0)) == pytest.approx(40.0)
    assert default_cutoff(
        WellPair.from_widths(0.5, 0.5, epsilon=100.0)
    ) == pytest.approx(2000.0)
    pair = WellPair.from_widths(1.0, 1.0, lambda_cutoff=7.0)
    res = DiscretizedReservoir.for_pair(pair, 10)
    assert res.cutoff == 7.0
    res2 = DiscretizedReservoir.for_pair(pair, 10, cutoff=9.0)
    assert res2.cutoff == 9.0


def test_couplings_keep_widths_and_ratio():
    pair = WellPair.from_widths(1.0, 3.0, eta=-1)
    res = DiscretizedReservoir.uniform(64, 10.0)
    coup = reservoir_couplings(pair, res)
    # every level keeps the physical width of its slice
    widths = 2.0 * math.pi * coup**2 / res.spacing
    np.testing.assert_allclose(widths[:, 0], pair.gamma1, rtol=1e-12)
    np.testing.assert_allclose(widths[:, 1], pair.gamma2, rtol=1e-12)
    ok, worst = check_constant_ratio(coup)
    assert ok and worst == 0.0


def test_hamiltonian_dense_and_sparse_agree():
    pair = WellPair.from_widths(1.0, 2.0, eta=-1, epsilon=0.4)
    res = DiscretizedReservoir.uniform(32, 8.0)
    dense = build_single_particle_hamiltonian(pair, res)
    sparse = build_single_particle_hamiltonian(pair, res, sparse=True)
    np.testing.assert_allclose(sparse.toarray(), dense, atol=1e-15)
    np.testing.assert_allclose(dense, dense.T, atol=1e-15)
    assert dense[0, 0] == pair.E1 and dense[1, 1] == pair.E2


def test_evolve_exact_guards():
    with pytest.raises(ValueError, match="square"):
        evolve_exact(np.zeros((2, 3)), np.array([1.0, 0.0]), [0.0])
    h = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError, match="Hermitian"):
        evolve_exact(h, np.array([1.0, 0.0]), [0.0])
    big = np.eye(4)
    with pytest.raises(ValueError, match="cap"):
        evolve_exact(big, np.array([1.0, 0, 0, 0]), [0.0], max_dim=3)
    with pytest.raises(ValueError, match="norm"):
        evolve_exact(np.eye(2), np.array([1.0, 1.0]), [0.0])


def test_chebyshev_matches_dense_eigensolve():
    pair = WellPair.from_widths(1.0, 2.0, eta=-1, epsilon=0.6)
    res = DiscretizedReservoir.uniform(48, 10.0)
    dense = build_single_particle_hamiltonian(pair, res)
    sparse = build_single_particle_hamiltonian(pair, res, sparse=True)
    psi0 = np.zeros(50, dtype=complex)
    psi0[0] = 1.0
    times = np.array([0.0, 0.4, 1.3, 2.0])
    ref = evolve_exact(dense, psi0, times)
    che = chebyshev_propagate(sparse, psi0, times)
    np.testing.assert_allclose(che, ref, atol=1e-11)
    # dense input and explicit bounds take the same path
    che2 = chebyshev_propagate(dense, psi0, times, bounds=(-12.0, 12.0))
    np.testing.assert_allclose(che2, ref, atol=1e-11)


def test_chebyshev_is_deterministic():
    pair = WellPair.from_widths(1.0, 1.0)
    res = DiscretizedReservoir.uniform(32, 8.0)
    h = build_single_particle_hamiltonian(pair, res, sparse=True)
    psi0 = np.zeros(34, dtype=complex)
    psi0[1] = 1.0
    a = chebyshev_propagate(h, psi0, [1.7])
    b = chebyshev_propagate(h, psi0, [1.7])
    assert np.array_equal(a, b)


def test_chebyshev_propagates_orbital_stacks():
    pair = WellPair.from_widths(1.0, 2.0, epsilon=0.3)
    res = DiscretizedReservoir.uniform(24, 6.0)
    h = build_single_particle_hamiltonian(pair, res, sparse=True)
    dim = 26
    stack = np.zeros((dim, 2), dtype=complex)
    stack[0, 0] = 1.0
    stack[1, 1] = 1.0
    times = [0.9, 1.8]
    both = chebyshev_propagate(h, stack, times)
    for col in range(2):
        single = chebyshev_propagate(h, stack[:, col], times)
        np.testing.assert_allclose(both[:, :, col], single, atol=1e-12)


def test_chebyshev_time_grid_validation():
    h = np.eye(2)
    with pytest.raises(ValueError, match="non-decreasing"):
        chebyshev_propagate(h, np.array([1.0, 0.0]), [1.0, 0.5])
    with pytest.raises(ValueError, match="non-decreasing"):
        chebyshev_propagate(h, np.array([1.0, 0.0]), [-1.0])


def test_dark_state_survives_finite_discretization():
    # constant coupling ratio protects the dark mode at any n
    pair = WellPair.from_widths(1.0, 4.0, eta=-1)
    run = single_particle_trajectory(
        pair, dark_state(pair), np.linspace(0.0, 10.0, 5), n_levels=64, cutoff=10.0
    )
    np.testing.assert_allclose(run.trajectory.occupation, 1.0, atol=1e-10)


def test_oracle_converges_to_wide_band_solution():
    pair = WellPair.from_widths(1.0, 1.0, lambda_cutoff=20.0)
    times = np.array([1.0, 2.0, 4.0])
    exact = analytic_sigma_symmetric(1.0, 0.0, times)[0]
    run = single_particle_trajectory(pair, (1.0, 0.0), times, n_levels=400)
    err = np.max(np.abs(run.trajectory.sigma11 - exact))
    assert err < 1e-2
    assert run.trajectory.sigma11[-1] == pytest.approx(0.25, abs=1e-2)


def test_oracle_spacing_error_is_second_order():
    # reference run isolates the n-dependence from the band-edge effect
    pair = WellPair.from_widths(1.0, 1.0, lambda_cutoff=20.0)
    times = np.array([1.0, 2.0, 4.0])
    ref = single_particle_trajectory(pair, (1.0, 0.0), times, n_levels=3200)
    errs = {}
    for n in (100, 400):
        run = single_particle_trajectory(pair, (1.0, 0.0), times, n_levels=n)
        errs[n] = np.max(np.abs(run.trajectory.sigma11 - ref.trajectory.sigma11))
    # two doublings of n should shrink the error far more than one order
    assert errs[100] / errs[400] > 3.0


def test_recurrence_warning_and_flag():
    pair = WellPair.from_widths(1.0, 1.0)
    with pytest.warns(UserWarning, match="recurrence"):
        run = single_particle_trajectory(
            pair, (1.0, 0.0), [50.0], n_levels=16, cutoff=4.0
        )
    assert run.recurrence_exceeded
    report = convergence_report(run)
    assert report["recurrence_exceeded"] is True
    assert report["n_levels"] == 16
    assert report["recurrence_time"] == pytest.approx(2.0 * math.pi / 0.5)
    quiet = single_particle_trajectory(pair, (1.0, 0.0), [1.0], n_levels=64, cutoff=4.0)
    assert not quiet.recurrence_exceeded


def test_trajectory_method_selection():
    pair = WellPair.from_widths(1.0, 1.0)
    auto_small = single_particle_trajectory(pair, (1.0, 0.0), [0.5], n_levels=32, cutoff=4.0)
    assert auto_small.method == "dense"
    forced = single_particle_trajectory(
        pair, (1.0, 0.0), [0.5], n_levels=32, cutoff=4.0, method="chebyshev"
    )
    assert forced.method == "chebyshev"
    np.testing.assert_allclose(
        forced.trajectory.sigma11, auto_small.trajectory.sigma11, atol=1e-10
    )
    with pytest.raises(ValueError, match="method"):
        single_particle_trajectory(pair, (1.0, 0.0), [0.5], n_levels=32, method="magic")
    with pytest.raises(ValueError, match="normalized"):
        single_particle_trajectory(pair, (1.0, 1.0), [0.5], n_levels=32)


def test_fock_space_enumeration():
    fermi = FockSpace(5, 2, "fermi")
    assert fermi.size == 10
    assert fermi.states[0] == (0, 1) and fermi.states[-1] == (3, 4)
    bose = FockSpace(3, 2, "bose")
    assert bose.size == 6
    assert (0, 0) in bose.index
    occ = fermi.occupation_matrix
    assert occ.shape == (10, 5)
    np.testing.assert_array_equal(occ.sum(axis=1), 2)
    np.testing.assert_array_equal(fermi.mode_counts(2)[:4], [2, 1, 1, 1])
    with pytest.raises(ValueError):
        FockSpace(2, 3, "fermi")
    with pytest.raises(ValueError):
        FockSpace(3, 0, "bose")
    with pytest.raises(ValueError):
        FockSpace(3, 1, "maxwell")


def test_fock_basis_state_lookup():
    space = FockSpace(4, 2, "fermi")
    psi = fock_basis_state(space, (2, 0))
    assert psi[space.index[(0, 2)]] == 1.0
    assert np.count_nonzero(psi) == 1
    with pytest.raises(ValueError, match="not a basis state"):
        fock_basis_state(space, (0, 0))


def test_single_particle_sector_reproduces_first_quantization():
    pair = WellPair.from_widths(1.0, 2.0, eta=-1, epsilon=0.4)
    res = DiscretizedReservoir.uniform(16, 5.0)
    dense = build_single_particle_hamiltonian(pair, res)
    for stat in ("fermi", "bose"):
        space = FockSpace(18, 1, stat)
        h = build_fock_hamiltonian(pair, res, space)
        np.testing.assert_allclose(h.toarray(), dense, atol=1e-14)


def test_fock_hamiltonian_is_hermitian():
    base = WellPair.from_widths(1.0, 2.0, eta=-1, epsilon=0.3)
    model = ParallelWellPair(base=base, yprime=0.7, U=1.5)
    res = DiscretizedReservoir.uniform(10, 4.0)
    assert dot_mode_count(model) == 4
    for stat, n_part in (("fermi", 2), ("fermi", 3), ("bose", 2)):
        space = FockSpace(14, n_part, stat)
        h = build_fock_hamiltonian(model, res, space)
        gap = abs(h - h.T).max()
        assert gap < 1e-12
    with pytest.raises(ValueError, match="modes"):
        build_fock_hamiltonian(model, res, FockSpace(10, 2, "fermi"))


def test_fock_spectral_bounds_enclose_spectrum():
    base = WellPair.from_widths(1.0, 2.0, epsilon=0.3)
    model = ParallelWellPair(base=base, yprime=0.8, U=2.0)
    res = DiscretizedReservoir.uniform(10, 4.0)
    space = FockSpace(14, 2, "fermi")
    h = build_fock_hamiltonian(model, res, space).toarray()
    evals = np.linalg.eigvalsh(h)
    lo, hi = fock_spectral_bounds(model, res, 2)
    assert lo < evals.min() and evals.max() < hi


def test_two_fermion_evolution_matches_determinant_formalism():
    # non-interacting: the determinant of evolved orbitals is the exact state
    pair = WellPair.from_widths(1.0, 2.0, eta=-1, epsilon=0.4)
    res = DiscretizedReservoir.uniform(20, 5.0)
    dim = 22
    dense = build_single_particle_hamiltonian(pair, res)
    times = np.array([0.7, 2.3])
    orbitals = []
    for col in (0, 1):
        e = np.zeros(dim, dtype=complex)
        e[col] = 1.0
        orbitals.append(evolve_exact(dense, e, times))
    space = FockSpace(dim, 2, "fermi")
    psi_t = evolve_fock(pair, res, space, fock_basis_state(space, (0, 1)), times)
    for k in range(times.size):
        phi = np.column_stack([orbitals[0][k], orbitals[1][k]])
        red = reduced_quantities(space, psi_t[k], 2)
        np.testing.assert_allclose(
            red.reservoir_count_probs,
            slater_reservoir_distribution(phi, 2),
            atol=1e-9,
        )
        np.testing.assert_allclose(red.dot_rdm, slater_dot_rdm(phi, 2), atol=1e-9)
        np.testing.assert_allclose(
            red.mode_occupations,
            np.abs(phi[:, 0]) ** 2 + np.abs(phi[:, 1]) ** 2,
            atol=1e-9,
        )


def test_two_boson_dark_state_is_trapped():
    pair = WellPair.from_widths(1.0, 4.0)
    d = dark_state(pair)
    res = DiscretizedReservoir.uniform(16, 5.0)
    space = FockSpace(18, 2, "bose")
    psi0 = np.zeros(space.size, dtype=complex)
    psi0[space.index[(0, 0)]] = d[0] * d[0]
    psi0[space.index[(0, 1)]] = math.sqrt(2.0) * d[0] * d[1]
    psi0[space.index[(1, 1)]] = d[1] * d[1]
    psi_t = evolve_fock(pair, res, space, psi0, [8.0])
    red = reduced_quantities(space, psi_t[0], 2)
    np.testing.assert_allclose(red.reservoir_count_probs, [1.0, 0.0, 0.0], atol=1e-10)
    assert red.mode_occupations[0] == pytest.approx(2 * d[0] ** 2, abs=1e-10)


def test_interacting_parallel_model_conserves_local_dark_occupancy():
    # the doubly-occupied-site projector is rotation invariant for fermions,
    # so U never leaks particles out of the per-well decoupled combination
    base = WellPair.from_widths(1.0, 2.0, epsilon=0.0)
    model = ParallelWellPair(base=base, yprime=0.6, U=1.7)
    res = DiscretizedReservoir.uniform(16, 5.0)
    space = FockSpace(20, 2, "fermi")
    psi_t = evolve_fock(
        model, res, space, fock_basis_state(space, (0, 2)), [0.0, 1.5, 4.0]
    )
    yp = model.yprime
    d1 = np.array([yp, -1.0, 0.0, 0.0]) / math.hypot(yp, 1.0)
    d2 = np.array([0.0, 0.0, yp, -1.0]) / math.hypot(yp, 1.0)
    want1 = yp**2 / (1 + yp**2)
    for k in range(3):
        rdm = reduced_quantities(space, psi_t[k], 4).dot_rdm
        occ1 = float((d1 @ rdm @ d1).real)
        occ2 = float((d2 @ rdm @ d2).real)
        assert occ1 == pytest.approx(want1, abs=1e-8)
        assert occ2 == pytest.approx(want1, abs=1e-8)


def test_slater_helpers_on_hand_built_orbitals():
    # one orbital fully on the dots, one with known reservoir weight
    phi = np.zeros((5, 2), dtype=complex)
    phi[0, 0] = 1.0
    phi[1, 1] = math.sqrt(0.4)
    phi[3, 1] = math.sqrt(0.6)
    dist = slater_reservoir_distribution(phi, 2)
    np.testing.assert_allclose(dist, [0.4, 0.6, 0.0], atol=1e-12)
    rdm = slater_dot_rdm(phi, 2)
    np.testing.assert_allclose(np.diag(rdm).real, [1.0, 0.4], atol=1e-12)
    assert np.sum(dist) == pytest.approx(1.0, abs=1e-12)
