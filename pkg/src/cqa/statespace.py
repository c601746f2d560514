"""Closure and completeness checks for hopping drivers on charge sectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .constraints import Constraint, SectorBasis, eval_constraint, int_to_bits, sector_basis
from .encodings import ConfigModel
from .pauli import Hamiltonian

AMPLITUDE_TOL = 1e-12
# closure is checked on every basis state up to this register size
FULL_SCAN_MAX_SITES = 20


@dataclass(frozen=True)
class HopGraph:
    nodes: list = field(repr=False)
    edges: tuple[tuple[int, int], ...]
    n_leaving: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def adjacency(self) -> sp.csr_matrix:
        n = self.n_nodes
        if not self.edges:
            return sp.csr_matrix((n, n), dtype=np.int8)
        u, v = np.array(self.edges).T
        a = sp.coo_matrix((np.ones(2 * len(u), np.int8), (np.r_[u, v], np.r_[v, u])), shape=(n, n))
        return a.tocsr()

    def components(self) -> int:
        if self.n_nodes == 0:
            return 0
        return int(connected_components(self.adjacency(), directed=False)[0])

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency().sum(axis=1)).ravel()


def _hamiltonian_hops(driver: Hamiltonian, sector: SectorBasis, tol: float) -> HopGraph:
    if driver.n_sites != sector.n_sites:
        raise ValueError(f"driver acts on {driver.n_sites} sites, sector on {sector.n_sites}")
    if not sector.feasible:
        raise ValueError("hop graph of an empty sector")
    states = sector.states
    edges: set[tuple[int, int]] = set()
    leaving = 0
    for x, amp in driver.amplitudes(states).items():
        if x == 0:
            continue
        idx = sector.index(states ^ x)
        live = np.abs(amp) > tol
        inside = live & (idx >= 0)
        leaving += int(np.count_nonzero(live & (idx < 0)))
        src = np.nonzero(inside)[0]
        for a, b in zip(src.tolist(), idx[inside].tolist()):
            edges.add((min(a, b), max(a, b)))
    return HopGraph([int(s) for s in states], tuple(sorted(edges)), leaving)


def _config_hops(model: ConfigModel, words) -> HopGraph:
    words = list(model.permutation_words() if words is None else words)
    index = {tuple(w): k for k, w in enumerate(words)}
    edges: set[tuple[int, int]] = set()
    leaving = 0
    for k, w in enumerate(words):
        for v in model.neighbors(tuple(w)):
            j = index.get(v)
            if j is None:
                leaving += 1
            else:
                edges.add((min(k, j), max(k, j)))
    return HopGraph(words, tuple(sorted(edges)), leaving)


def hop_graph(driver: Hamiltonian | ConfigModel, sector=None, tol: float = AMPLITUDE_TOL) -> HopGraph:
    """Graph on the sector states with an edge wherever the driver has a nonzero matrix element.

    For a :class:`ConfigModel`, ``sector`` is a list of words (permutation words
    by default).  Hops that leave the sector are counted in ``n_leaving``.
    """
    if isinstance(driver, ConfigModel):
        return _config_hops(driver, sector)
    return _hamiltonian_hops(driver, sector, tol)


def is_connected(g: HopGraph) -> bool:
    if g.n_nodes == 0:
        raise ValueError("empty hop graph")
    return g.components() == 1


@dataclass
class ClosureReport:
    passed: bool
    witnesses: list[dict]
    n_violations: int
    connected: bool
    components: int
    sector_size: int
    max_term_support: int
    n_terms: int
    scanned_states: int

    def to_json(self) -> dict:
        return {
            "closure": "pass" if self.passed else "fail",
            "witnesses": self.witnesses,
            "n_violations": self.n_violations,
            "connected": self.connected,
            "components": self.components,
            "sector_size": self.sector_size,
            "max_term_support": self.max_term_support,
            "n_terms": self.n_terms,
            "scanned_states": self.scanned_states,
        }


def check_closure(
    driver: Hamiltonian,
    constraints: Sequence[Constraint],
    sector: SectorBasis | None = None,
    tol: float = AMPLITUDE_TOL,
    max_witnesses: int = 20,
) -> ClosureReport:
    """Verify that no driver hop changes any constraint value.

    Hops are the merged matrix elements per flip mask, so cancellations between
    Pauli strings (e.g. ``XX + YY`` on ``|00>``) are honored.  Every basis state
    is scanned for registers up to 20 sites (which makes the check equivalent to
    vanishing commutators); larger registers scan the target sector only.
    Connectivity is reported on ``sector`` (default: the constraints' target sector).
    """
    n = driver.n_sites
    if sector is None:
        sector = sector_basis(list(constraints), n)
    states = np.arange(1 << n, dtype=np.int64) if n <= FULL_SCAN_MAX_SITES else sector.states
    before = [eval_constraint(c, states, n) for c in constraints]
    witnesses: list[dict] = []
    n_bad = 0
    for x, amp in driver.amplitudes(states).items():
        if x == 0:
            continue
        live = np.abs(amp) > tol
        out = states ^ x
        for j, c in enumerate(constraints):
            after = eval_constraint(c, out, n)
            bad = np.nonzero(live & (after != before[j]))[0]
            n_bad += bad.size
            for k in bad[: max(0, max_witnesses - len(witnesses))].tolist():
                witnesses.append(
                    {
                        "state": int_to_bits(int(states[k]), n),
                        "flip": int_to_bits(x, n),
                        "result": int_to_bits(int(out[k]), n),
                        "constraint": j,
                        "before": int(before[j][k]),
                        "after": int(after[k]),
                        "amplitude": [float(amp[k].real), float(amp[k].imag)],
                    }
                )
    if sector.feasible:
        comps = hop_graph(driver, sector, tol).components()
    else:
        comps = 0
    return ClosureReport(
        passed=n_bad == 0,
        witnesses=witnesses,
        n_violations=int(n_bad),
        connected=comps == 1,
        components=comps,
        sector_size=sector.size,
        max_term_support=driver.max_support(),
        n_terms=len(driver),
        scanned_states=int(states.size),
    )
