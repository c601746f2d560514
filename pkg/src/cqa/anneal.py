"""Closed-system annealing along ``H(s) = s H_p + (1 - s) H_d``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .constraints import Constraint, SectorBasis, eval_constraint, sector_basis
from .drivers import build_aux
from .pauli import Hamiltonian, to_matrix
from .spectral import _dense_ground, _realify, ground_states, restrict, sector_ground

NORM_TOL = 1e-10
# above this dimension each step uses a sparse matrix-exponential action
DENSE_STEP_MAX_DIM = 64


class DegenerateGroundError(ValueError):
    """The requested ground state is not unique."""


class WrongSectorError(ValueError):
    """An auxiliary-field ground state landed outside the target sector."""


@dataclass(frozen=True)
class Schedule:
    """Annealing schedule on ``t in [0, T]``; ``s_of_t`` maps normalized time ``t/T`` to ``s``."""

    T: float
    s_of_t: Callable[[float], float] | None = None
    max_step: float = 0.1
    tol: float = 1e-3
    n_checkpoints: int = 64

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("total time must be nonnegative")
        if self.n_checkpoints < 1:
            raise ValueError("need at least one checkpoint")
        if self.s_of_t is not None:
            u = np.linspace(0, 1, 257)
            s = np.array([self.s_of_t(x) for x in u])
            if abs(s[0]) > 1e-12 or abs(s[-1] - 1) > 1e-12 or np.any(np.diff(s) < -1e-12):
                raise ValueError("schedule must rise monotonically from s=0 to s=1")

    def s(self, t: float) -> float:
        u = 0.0 if self.T == 0 else min(max(t / self.T, 0.0), 1.0)
        return u if self.s_of_t is None else float(self.s_of_t(u))

    def max_slope(self) -> float:
        """Largest ``ds/dt`` (sampled)."""
        if self.T == 0:
            return 0.0
        if self.s_of_t is None:
            return 1.0 / self.T
        u = np.linspace(0, 1, 1025)
        s = np.array([self.s_of_t(x) for x in u])
        return float(np.max(np.abs(np.diff(s))) / (self.T * (u[1] - u[0])))

    def n_steps(self, drift_norm: float) -> int:
        """Steps so that ``||H(s_{k+1}) - H(s_k)|| * dt < tol`` and ``dt <= max_step``."""
        if self.T == 0:
            return 0
        n = math.ceil(self.T / self.max_step)
        slope = self.max_slope()
        if drift_norm > 0 and slope > 0:
            n = max(n, math.ceil(self.T * math.sqrt(slope * drift_norm / self.tol)))
        c = self.n_checkpoints
        return c * math.ceil(n / c)


@dataclass
class Checkpoint:
    t: float
    s: float
    energy: float
    leakage: float
    norm: float


@dataclass
class AnnealResult:
    final_state: np.ndarray
    overlap: float
    checkpoints: list[Checkpoint]
    states: np.ndarray = field(repr=False)
    sector: SectorBasis | None = field(default=None, repr=False)
    n_steps: int = 0

    @property
    def max_leakage(self) -> float:
        return max((c.leakage for c in self.checkpoints), default=0.0)

    def to_json(self) -> dict:
        return {
            "overlap": self.overlap,
            "max_leakage": self.max_leakage,
            "n_steps": self.n_steps,
            "checkpoints": [
                {"t": c.t, "s": c.s, "energy": c.energy, "leakage": c.leakage, "norm": c.norm}
                for c in self.checkpoints
            ],
        }

    def to_rows(self) -> list[tuple[float, float, float, float]]:
        return [(c.t, c.s, c.energy, c.leakage) for c in self.checkpoints]


def _outside_weight(psi: np.ndarray, keep: np.ndarray | None) -> float:
    total = float(np.vdot(psi, psi).real)
    if keep is None:
        # sector-coordinate run: anything missing from the norm has left the sector
        return max(0.0, 1.0 - total)
    inside = float(np.sum(np.abs(psi[keep]) ** 2))
    return min(1.0, max(0.0, total - inside))


def _step(m, psi: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-i m dt) psi``: eigendecomposition for dense blocks, scipy's Taylor-series action for sparse ones."""
    if sp.issparse(m):
        return spla.expm_multiply(-1j * dt * m, psi)
    evals, evecs = np.linalg.eigh(m)
    return evecs @ (np.exp(-1j * evals * dt) * (evecs.conj().T @ psi))


def evolve(
    h_p: Hamiltonian,
    h_d: Hamiltonian,
    psi0: np.ndarray,
    sched: Schedule,
    sector: SectorBasis | None = None,
    leak_sector: SectorBasis | None = None,
) -> AnnealResult:
    """Integrate the Schrodinger equation with piecewise-constant midpoint Hamiltonians.

    With ``sector`` the evolution runs in sector coordinates (both Hamiltonians
    must preserve it); ``psi0`` may be given in full or sector coordinates.
    ``leak_sector`` (full-space runs) is the charge sector whose complement
    counts as leakage.  The overlap is the weight on the ground eigenspace of
    ``h_p`` in the working space.
    """
    if h_p.n_sites != h_d.n_sites:
        raise ValueError("h_p and h_d act on different registers")
    psi = np.asarray(psi0, dtype=complex)
    if sector is not None:
        if psi.shape[0] == 1 << h_p.n_sites:
            if _outside_weight(psi, sector.states) > NORM_TOL:
                raise ValueError("initial state has weight outside the sector")
            psi = sector.project(psi)
        mp, md = restrict(h_p, sector), restrict(h_d, sector)
        keep = None
    else:
        mp, md = _realify(to_matrix(h_p)), _realify(to_matrix(h_d))
        keep = None if leak_sector is None else leak_sector.states
    if psi.shape[0] != mp.shape[0]:
        raise ValueError(f"state dimension {psi.shape[0]} does not match {mp.shape[0]}")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise ValueError("initial state is not normalized")
    if keep is None and sector is None:
        leak = lambda v: 0.0  # noqa: E731  (no sector to leak from)
    else:
        leak = lambda v: _outside_weight(v, keep)  # noqa: E731

    drift = float(np.linalg.norm(mp - md, 2)) if mp.size else 0.0
    n_steps = sched.n_steps(drift)
    n_chk = sched.n_checkpoints if n_steps else 1
    every = max(1, n_steps // n_chk)
    dt = sched.T / n_steps if n_steps else 0.0

    def record(t, v):
        s = sched.s(t)
        hv = s * (mp @ v) + (1 - s) * (md @ v)
        return Checkpoint(float(t), float(s), float(np.vdot(v, hv).real), leak(v), float(np.linalg.norm(v)))

    checkpoints = [record(0.0, psi)]
    saved = [psi.copy()]
    if mp.shape[0] > DENSE_STEP_MAX_DIM:
        mp_s, md_s = sp.csr_matrix(mp), sp.csr_matrix(md)
    else:
        mp_s, md_s = mp, md
    for k in range(n_steps):
        s_mid = sched.s((k + 0.5) * dt)
        psi = _step(s_mid * mp_s + (1 - s_mid) * md_s, psi, dt)
        if (k + 1) % every == 0:
            checkpoints.append(record((k + 1) * dt, psi))
            saved.append(psi.copy())

    g = _dense_ground(mp, 1)
    overlap = float(np.sum(np.abs(g.ground_space.conj().T @ psi) ** 2))
    return AnnealResult(psi, overlap, checkpoints, np.array(saved), sector, n_steps)


def _sector_from_state(psi: np.ndarray, constraints: Sequence[Constraint], n: int) -> SectorBasis:
    support = np.nonzero(np.abs(psi) > 1e-12)[0]
    if support.size == 0:
        raise ValueError("zero state")
    targets = []
    for c in constraints:
        vals = np.unique(eval_constraint(c, support, n))
        if vals.size != 1:
            raise ValueError(f"initial state spans several values of {c}")
        targets.append(int(vals[0]))
    states = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(states.size, bool)
    for c, v in zip(constraints, targets):
        ok &= eval_constraint(c, states, n) == v
    return SectorBasis(n, states[ok])


def leakage(result: AnnealResult, constraints: Sequence[Constraint] = (), psi0_sector: SectorBasis | None = None) -> float:
    """Largest probability found outside the initial charge sector over all checkpoints.

    Without ``psi0_sector`` the sector is read off the initial state's
    constraint values.
    """
    states = result.states
    if result.sector is not None:
        return max(_outside_weight(v, None) for v in states)
    n = int(round(math.log2(states.shape[1])))
    if psi0_sector is None:
        if not constraints:
            raise ValueError("need constraints or a sector to measure leakage")
        psi0_sector = _sector_from_state(states[0], constraints, n)
    return max(_outside_weight(v, psi0_sector.states) for v in states)


def prepare_initial(
    h_d: Hamiltonian,
    mode: str = "global_ground",
    sector: SectorBasis | None = None,
    B: float | Sequence[float] | None = None,
    aux: Sequence[Constraint] | None = None,
    target: Sequence[Constraint] | SectorBasis | None = None,
) -> np.ndarray:
    """Initial full-register state for an anneal.

    ``global_ground``: unique ground state of ``h_d`` (a ``sector`` resolves degeneracy);
    ``sector_ground``: ground state of ``h_d`` inside ``sector``;
    ``aux_assisted``: ground state of ``h_d - sum_j B_j C_j`` over ``aux``, checked
    to lie in ``target`` (a sector or a constraint list).
    """
    n = h_d.n_sites
    if mode == "global_ground":
        gs = ground_states(h_d)
        if gs.multiplicity == 1:
            return gs.vectors[:, 0].astype(complex)
        if sector is None:
            raise DegenerateGroundError(f"driver ground space is {gs.multiplicity}-fold degenerate")
        mode = "sector_ground"
    if mode == "sector_ground":
        if sector is None:
            raise ValueError("sector_ground needs a sector")
        sg = sector_ground(h_d, sector)
        if sg.multiplicity > 1:
            raise DegenerateGroundError(f"sector ground space is {sg.multiplicity}-fold degenerate")
        return sector.embed(sg.state)
    if mode == "aux_assisted":
        if aux is None or B is None:
            raise ValueError("aux_assisted needs aux constraints and field values B")
        gs = ground_states(h_d + build_aux(aux, B, n))
        if gs.multiplicity > 1:
            raise DegenerateGroundError(f"auxiliary field leaves a {gs.multiplicity}-fold ground space")
        psi = gs.vectors[:, 0].astype(complex)
        if target is not None:
            tgt = target if isinstance(target, SectorBasis) else sector_basis(list(target), n)
            miss = _outside_weight(psi, tgt.states)
            if miss > 1e-8:
                raise WrongSectorError(f"ground state has weight {miss:.3g} outside the target sector")
        return psi
    raise ValueError(f"unknown preparation mode {mode!r}")


__all__ = [
    "AnnealResult",
    "Checkpoint",
    "DegenerateGroundError",
    "Schedule",
    "WrongSectorError",
    "evolve",
    "leakage",
    "prepare_initial",
]
