import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqa.constraints import LinearZ, sector_basis
from cqa.drivers import build_gi_fourbody, build_transverse, build_xy_cycle
from cqa.encodings import Graph, build_gi_grid
from cqa.pauli import Hamiltonian, PauliTerm, to_matrix
from cqa.spectral import (
    ClosureError,
    ground_states,
    joint_levels,
    magnetization_curve,
    restrict,
    sector_ground,
    spectrum_sweep,
    xy_sector_energies,
    xy_sector_spectra,
)

from conftest import kron_hamiltonian


def free_fermion_ground(n, M, J=1.0):
    """XY-ring sector ground energy from the Jordan-Wigner free-fermion solution.

    ``-J (XX + YY)`` on a bond is a hop of amplitude ``-2J``; with ``N`` up spins
    the momenta are periodic for odd ``N`` and antiperiodic for even ``N``.
    """
    N = (n + M) // 2
    shift = 0.0 if N % 2 else 0.5
    eps = np.sort(-4 * J * np.cos(2 * np.pi * (np.arange(n) + shift) / n))
    return float(eps[:N].sum())


def test_restrict_matches_dense_submatrix():
    n = 6
    h = build_xy_cycle(range(n), 0.8)
    sec = sector_basis([LinearZ((1,) * n, 2)], n)
    np.testing.assert_allclose(restrict(h, sec), kron_hamiltonian(h)[np.ix_(sec.states, sec.states)], atol=1e-14)
    np.testing.assert_allclose(restrict(h, sec, sparse=True).toarray(), restrict(h, sec))


def test_restrict_raises_on_leak():
    sec = sector_basis([LinearZ((1,) * 4, 0)], 4)
    with pytest.raises(ClosureError):
        restrict(build_transverse(4), sec)


def test_restrict_site_mismatch():
    with pytest.raises(ValueError):
        restrict(build_transverse(3), sector_basis([LinearZ((1,) * 4, 0)], 4))


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8, 9, 10])
def test_xy_sector_energies_free_fermion_oracle(n):
    e = xy_sector_energies(n)
    for M, val in e.items():
        assert val == pytest.approx(free_fermion_ground(n, M), abs=1e-10)


def test_xy_sector_energies_examples():
    e = xy_sector_energies(4)
    assert e[0] == pytest.approx(-4 * np.sqrt(2), abs=1e-10)
    assert e[2] == pytest.approx(-4) and e[-2] == pytest.approx(-4)
    assert e[4] == pytest.approx(0, abs=1e-12)


def test_sector_spectra_union_is_full_spectrum():
    n = 6
    spectra = xy_sector_spectra(n)
    union = np.sort(np.concatenate(list(spectra.values())))
    np.testing.assert_allclose(union, np.linalg.eigvalsh(kron_hamiltonian(build_xy_cycle(range(n)))), atol=1e-10)


def test_ground_states_multiplicity():
    gs = ground_states(Hamiltonian.from_labels({"ZI": 1.0}))
    assert gs.multiplicity == 2 and gs.energy == pytest.approx(-1)
    gs = ground_states(build_transverse(3))
    assert gs.multiplicity == 1 and gs.energy == pytest.approx(-3)
    np.testing.assert_allclose(np.abs(gs.vectors[:, 0]), np.full(8, 8**-0.5), atol=1e-12)


def test_iterative_matches_dense(monkeypatch):
    h = build_xy_cycle(range(8)) + 0.3 * Hamiltonian(8, [PauliTerm.from_sites(8, {0: "Z"})])
    dense = ground_states(h, k=3)
    monkeypatch.setenv("CQA_MAX_DIM", "64")
    it = ground_states(h, k=3)
    np.testing.assert_allclose(it.energies[:3], dense.energies[:3], atol=1e-10)
    assert it.multiplicity == dense.multiplicity
    overlap = np.linalg.svd(dense.ground_space.conj().T @ it.ground_space, compute_uv=False)
    np.testing.assert_allclose(overlap, 1, atol=1e-8)


def test_iterative_resolves_degenerate_cluster(monkeypatch):
    # ground cluster found by Lanczos must match the dense multiplicity
    h = build_xy_cycle(range(6))
    dense = ground_states(h)
    monkeypatch.setenv("CQA_MAX_DIM", "16")
    it = ground_states(h)
    assert it.multiplicity == dense.multiplicity
    assert it.energy == pytest.approx(dense.energy, abs=1e-10)


def test_sector_ground_energy_and_vector():
    n = 6
    h = build_xy_cycle(range(n))
    sec = sector_basis([LinearZ((1,) * n, 2)], n)
    sg = sector_ground(h, sec)
    assert sg.energy == pytest.approx(free_fermion_ground(n, 2), abs=1e-10)
    m = restrict(h, sec)
    assert np.linalg.norm(m @ sg.state - sg.energy * sg.state) < 1e-10


def test_joint_levels_sharp_observable():
    n = 6
    diag_z = np.array([n - 2 * bin(s).count("1") for s in range(1 << n)], dtype=float)
    evals, mags = joint_levels(build_xy_cycle(range(n)), diag_z)
    np.testing.assert_allclose(mags, np.round(mags), atol=1e-9)
    spectra = xy_sector_spectra(n)
    for M, ev in spectra.items():
        np.testing.assert_allclose(np.sort(evals[np.round(mags) == M]), ev, atol=1e-9)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_magnetization_curve_staircase(n):
    grid = np.linspace(0, 4, 81)
    curve = magnetization_curve(n, grid)
    assert curve.Mz[0] == 0
    assert np.all(np.diff(curve.Mz) >= 0)
    assert curve.Mz[-1] == n
    assert set(np.diff(curve.Mz)) <= {0, 2}


@pytest.mark.parametrize("n", [4, 6, 8])
def test_magnetization_curve_methods_agree(n):
    grid = np.linspace(0, 4, 41)
    s = magnetization_curve(n, grid, method="sector")
    f = magnetization_curve(n, grid, method="full")
    d = magnetization_curve(n, grid, method="full_direct")
    np.testing.assert_array_equal(s.Mz, f.Mz)
    np.testing.assert_array_equal(s.Mz, d.Mz)
    np.testing.assert_allclose(s.E0_density, f.E0_density, atol=1e-10)
    np.testing.assert_allclose(s.E0_density, d.E0_density, atol=1e-10)


def test_magnetization_steps_at_free_fermion_fields():
    n = 8
    grid = np.linspace(0, 4, 4001)
    steps = magnetization_curve(n, grid).steps()
    assert [M for _, M in steps] == [2, 4, 6, 8]
    for B, M in steps:
        # the step into M happens where E_{M-2} - B (M-2) = E_M - B M
        B_star = (free_fermion_ground(n, M) - free_fermion_ground(n, M - 2)) / 2
        assert B_star <= B < B_star + 1e-3 + 1e-12


@given(st.floats(0.1, 3.0))
def test_magnetization_curve_scales_with_J(J):
    grid = np.linspace(0, 3, 31)
    a = magnetization_curve(6, grid, J=1.0)
    b = magnetization_curve(6, grid, J=J)
    np.testing.assert_array_equal(a.Mz, b.Mz)
    np.testing.assert_allclose(a.E0_density, b.E0_density, atol=1e-10)


def test_magnetization_curve_rows():
    curve = magnetization_curve(4, [0.0, 5.0])
    assert curve.to_rows()[0][1] == 0 and curve.to_rows()[1][1] == 4
    with pytest.raises(ValueError):
        magnetization_curve(4, [0.0], method="nope")


def test_one_qubit_min_gap():
    hp = Hamiltonian.from_labels({"Z": -1.0})
    hd = Hamiltonian.from_labels({"X": -1.0})
    sweep = spectrum_sweep(hp, hd, np.linspace(0, 1, 101))
    assert sweep.min_gap == pytest.approx(np.sqrt(2), abs=1e-10)
    assert sweep.s_star == pytest.approx(0.5)
    s = sweep.s_grid
    np.testing.assert_allclose(sweep.gaps, 2 * np.sqrt(s**2 + (1 - s) ** 2), atol=1e-12)


def test_sweep_ground_block_for_degenerate_problem():
    g1 = Graph.path(3)
    hp, cs = build_gi_grid(g1, g1.relabel([1, 2, 0]))
    sec = sector_basis(cs, 9)
    sweep = spectrum_sweep(hp, build_gi_fourbody(3), np.linspace(0, 1, 11), sec)
    # path on 3 vertices has 2 automorphisms
    assert sweep.ground_block == 2
    # levels 0 and 1 merge at s = 1; the gap is measured to level 2
    np.testing.assert_allclose(sweep.gaps, sweep.energies[:, 2] - sweep.energies[:, 0])
    assert sweep.gaps[0] == pytest.approx(3) and sweep.gaps[-1] == pytest.approx(2)
    assert sweep.energies.shape == (11, 4)


def test_sweep_endpoints():
    hp = Hamiltonian.from_labels({"ZI": -1.0, "IZ": -0.5})
    hd = build_transverse(2)
    sweep = spectrum_sweep(hp, hd, [0.0, 1.0], k=4)
    np.testing.assert_allclose(sweep.energies[0], np.linalg.eigvalsh(to_matrix(hd)), atol=1e-12)
    np.testing.assert_allclose(sweep.energies[1], np.linalg.eigvalsh(to_matrix(hp)), atol=1e-12)
