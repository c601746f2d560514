"""Exact diagonalization: ground spaces, sector restriction, magnetization staircase, gap sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .constraints import LinearZ, SectorBasis, sector_basis
from .pauli import Hamiltonian, check_dim, max_dim, to_matrix

DEGENERACY_RTOL = 1e-10
RESIDUAL_TOL = 1e-10


class ClosureError(ValueError):
    """The Hamiltonian maps sector states outside the sector."""


def degeneracy_tol(e0: float) -> float:
    return DEGENERACY_RTOL * max(1.0, abs(e0))


def _realify(m):
    if sp.issparse(m):
        if m.nnz == 0 or np.abs(m.data.imag).max() == 0:
            return m.real.astype(float)
        return m
    if np.iscomplexobj(m) and not np.any(m.imag):
        return m.real.copy()
    return m


def restrict(h: Hamiltonian, sector: SectorBasis, tol: float = 1e-12, sparse: bool = False):
    """Matrix of ``h`` in the sector basis; raises :class:`ClosureError` if ``h`` leaks."""
    if h.n_sites != sector.n_sites:
        raise ValueError(f"Hamiltonian on {h.n_sites} sites, sector on {sector.n_sites}")
    states = sector.states
    d = sector.size
    rows, cols, data = [], [], []
    for x, amp in h.amplitudes(states).items():
        idx = sector.index(states ^ x)
        live = np.abs(amp) > tol
        if np.any(live & (idx < 0)):
            k = int(np.nonzero(live & (idx < 0))[0][0])
            raise ClosureError(f"flip mask {x:#b} takes sector state {int(states[k]):#b} outside the sector")
        keep = idx >= 0
        rows.append(idx[keep])
        cols.append(np.nonzero(keep)[0])
        data.append(amp[keep])
    if not rows:
        m = sp.csr_matrix((d, d), dtype=complex)
    else:
        m = sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(d, d), dtype=complex
        )
        m.sum_duplicates()
    m = _realify(m)
    if sparse:
        return m
    check_dim(d)
    return m.toarray()


def _operator(h: Hamiltonian, sector: SectorBasis | None):
    """Dense matrix when within the dense limit, else a sparse/matrix-free operator."""
    if sector is not None:
        d = sector.size
        if d <= max_dim():
            return restrict(h, sector)
        return restrict(h, sector, sparse=True)
    if h.dim <= max_dim():
        return _realify(to_matrix(h))
    return spla.LinearOperator((h.dim, h.dim), matvec=h.apply, dtype=complex)


class GroundStates(NamedTuple):
    energies: np.ndarray
    vectors: np.ndarray
    multiplicity: int

    @property
    def energy(self) -> float:
        return float(self.energies[0])

    @property
    def ground_space(self) -> np.ndarray:
        return self.vectors[:, : self.multiplicity]


def _multiplicity(evals: np.ndarray) -> int:
    return int(np.count_nonzero(evals - evals[0] <= degeneracy_tol(evals[0])))


def _dense_ground(m: np.ndarray, k: int) -> GroundStates:
    evals, evecs = np.linalg.eigh(m)
    mult = _multiplicity(evals)
    keep = max(k, mult)
    return GroundStates(evals[:keep], evecs[:, :keep], mult)


def _iterative_ground(op, k: int) -> GroundStates:
    """Lowest eigenpairs by Lanczos, widening ``k`` until the ground cluster is resolved."""
    n = op.shape[0]
    kk = max(k, 2) + 1
    while True:
        kk = min(kk, n - 1)
        evals, evecs = spla.eigsh(op, k=kk, which="SA", tol=0)
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
        mult = _multiplicity(evals)
        if mult < kk or kk == n - 1:
            break
        kk *= 2
    for j in range(max(k, mult)):
        r = np.linalg.norm(op @ evecs[:, j] - evals[j] * evecs[:, j])
        if r > RESIDUAL_TOL:
            raise RuntimeError(f"eigenpair {j} residual {r:.2e} exceeds {RESIDUAL_TOL}")
    keep = max(k, mult)
    return GroundStates(evals[:keep], evecs[:, :keep], mult)


def ground_states(h: Hamiltonian, k: int = 1, sector: SectorBasis | None = None) -> GroundStates:
    """Lowest ``k`` eigenpairs, always extended to the full ground multiplicity."""
    op = _operator(h, sector)
    if isinstance(op, np.ndarray):
        return _dense_ground(op, k)
    return _iterative_ground(op, k)


class SectorGround(NamedTuple):
    energy: float
    state: np.ndarray
    multiplicity: int


def sector_ground(h: Hamiltonian, sector: SectorBasis) -> SectorGround:
    """Ground energy and (first) ground vector of ``h`` restricted to ``sector``, in sector coordinates."""
    if not sector.feasible:
        raise ValueError("empty sector")
    gs = ground_states(h, 1, sector)
    return SectorGround(gs.energy, gs.vectors[:, 0], gs.multiplicity)


# -- XY ring in a longitudinal field -----------------------------------------


def xy_ring(n: int, J: float = 1.0) -> Hamiltonian:
    from .drivers import build_xy_cycle

    return build_xy_cycle(list(range(n)), J)


def magnetization_sector(n: int, M: int) -> SectorBasis:
    return sector_basis([LinearZ((1,) * n, M)], n)


def xy_sector_spectra(n: int, J: float = 1.0) -> dict[int, np.ndarray]:
    """Full spectrum of the XY ring inside every magnetization sector."""
    h = xy_ring(n, J)
    return {M: np.linalg.eigvalsh(restrict(h, magnetization_sector(n, M))) for M in range(-n, n + 1, 2)}


def xy_sector_energies(n: int, J: float = 1.0) -> dict[int, float]:
    return {M: float(ev[0]) for M, ev in xy_sector_spectra(n, J).items()}


def joint_levels(h: Hamiltonian, observable_diag: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full-space eigenvalues of ``h`` paired with a commuting diagonal observable.

    Degenerate eigenspaces of ``h`` are rotated to diagonalize the observable,
    so every returned level carries a sharp observable value.
    """
    m = _realify(to_matrix(h))
    evals, evecs = np.linalg.eigh(m)
    obs = np.empty_like(evals)
    start = 0
    while start < evals.size:
        stop = start + 1
        while stop < evals.size and evals[stop] - evals[start] <= degeneracy_tol(evals[start]):
            stop += 1
        v = evecs[:, start:stop]
        block = v.conj().T @ (observable_diag[:, None] * v)
        obs[start:stop] = np.linalg.eigvalsh(block)
        start = stop
    return evals, obs


@dataclass
class MagnetizationCurve:
    n: int
    B_over_J: np.ndarray
    Mz: np.ndarray
    E0_density: np.ndarray
    method: str = "sector"

    def to_rows(self) -> list[tuple[float, int, float]]:
        return [(float(b), int(m), float(e)) for b, m, e in zip(self.B_over_J, self.Mz, self.E0_density)]

    def steps(self) -> list[tuple[float, int]]:
        """``(B/J, new Mz)`` at every grid point where the magnetization changes."""
        return [(float(self.B_over_J[k]), int(self.Mz[k])) for k in range(1, len(self.Mz)) if self.Mz[k] != self.Mz[k - 1]]


def _lowest_level(energies: np.ndarray, mags: np.ndarray, b: float, J: float) -> tuple[int, float]:
    tot = energies - b * J * mags
    e0 = tot.min()
    # ties at a step resolve to the smaller magnetization
    cand = mags[tot - e0 <= degeneracy_tol(e0)]
    return int(round(cand.min())), float(e0)


def magnetization_curve(n: int, grid: Sequence[float], J: float = 1.0, method: str = "sector") -> MagnetizationCurve:
    """Ground-state magnetization of ``XY(n, J) - B sum Z`` over a grid of ``B/J``.

    ``method="sector"`` diagonalizes each magnetization block separately;
    ``method="full"`` diagonalizes the whole ``2**n`` space once and reads the
    magnetization off the joint eigenbasis; ``method="full_direct"``
    diagonalizes the full field-dependent matrix at every grid point.
    """
    grid = np.asarray(grid, dtype=float)
    if method == "sector":
        e = xy_sector_energies(n, J)
        mags = np.array(sorted(e), dtype=float)
        energies = np.array([e[int(M)] for M in mags])
    elif method == "full":
        check_dim(1 << n)
        diag_z = np.array([n - 2 * int(s).bit_count() for s in range(1 << n)], dtype=float)
        energies, mags = joint_levels(xy_ring(n, J), diag_z)
    elif method == "full_direct":
        return _magnetization_curve_direct(n, grid, J)
    else:
        raise ValueError(f"unknown method {method!r}")
    Mz, E0 = zip(*(_lowest_level(energies, mags, b, J) for b in grid)) if grid.size else ((), ())
    return MagnetizationCurve(n, grid, np.array(Mz, dtype=int), np.array(E0) / (J * n), method)


def _magnetization_curve_direct(n: int, grid: np.ndarray, J: float) -> MagnetizationCurve:
    check_dim(1 << n)
    xy = _realify(to_matrix(xy_ring(n, J)))
    diag_z = np.array([n - 2 * int(s).bit_count() for s in range(1 << n)], dtype=float)
    Mz, E0 = [], []
    for b in grid:
        evals, evecs = np.linalg.eigh(xy - np.diag(b * J * diag_z))
        mult = _multiplicity(evals)
        v = evecs[:, :mult]
        mz = np.linalg.eigvalsh(v.T @ (diag_z[:, None] * v))
        Mz.append(int(round(mz.min())))
        E0.append(evals[0])
    return MagnetizationCurve(n, grid, np.array(Mz, dtype=int), np.array(E0) / (J * n), "full_direct")


# -- annealing spectrum --------------------------------------------------------


@dataclass
class SpectrumSweep:
    s_grid: np.ndarray
    energies: np.ndarray = field(repr=False)
    gaps: np.ndarray = field(repr=False)
    min_gap: float
    s_star: float
    ground_block: int = 1

    def to_rows(self) -> list[list[float]]:
        return [[float(s), *map(float, e)] for s, e in zip(self.s_grid, self.energies)]


def spectrum_sweep(
    h_p: Hamiltonian,
    h_d: Hamiltonian,
    s_grid: Sequence[float],
    sector: SectorBasis | None = None,
    k: int = 4,
    ground_block: int | None = None,
) -> SpectrumSweep:
    """Lowest levels of ``s h_p + (1 - s) h_d`` along ``s_grid``.

    The gap at each ``s`` is ``E[g] - E[0]``, where ``g`` (``ground_block``) is
    the number of levels that merge into the final ground space; by default the
    ground multiplicity of ``h_p`` in the swept space.  Excitations into levels
    ``1..g-1`` end up in the final ground space and do no harm.  With ``g = 1``
    this is the usual ``E1 - E0``.
    """
    if sector is not None:
        mp, md = restrict(h_p, sector), restrict(h_d, sector)
    else:
        mp, md = _realify(to_matrix(h_p)), _realify(to_matrix(h_d))
    if ground_block is None:
        ground_block = _multiplicity(np.linalg.eigvalsh(mp))
    dim = mp.shape[0]
    if ground_block >= dim:
        raise ValueError("no level above the final ground space; gap undefined")
    kk = min(dim, max(k, ground_block + 1))
    s_grid = np.asarray(s_grid, dtype=float)
    energies = np.array([np.linalg.eigvalsh(s * mp + (1 - s) * md)[:kk] for s in s_grid])
    gaps = energies[:, ground_block] - energies[:, 0]
    j = int(np.argmin(gaps))
    return SpectrumSweep(s_grid, energies, gaps, float(gaps[j]), float(s_grid[j]), ground_block)
