"""Constraint-commuting driver Hamiltonians.

Every constructor returns an expanded Pauli-sum :class:`~cqa.pauli.Hamiltonian`.
Hop amplitudes default to ``-1`` (uniform weights) so that drivers built from
nonnegative hops are stoquastic and their sector ground states are positive
superpositions of all reachable configurations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, NamedTuple, Sequence

from .constraints import (
    ClauseIndicator,
    Constraint,
    Gf2Solution,
    ZParity,
    constraint_as_hamiltonian,
    constraint_from_json,
    gf2_rank,
    gf2_solve,
)
from .encodings import check_disjoint, grid_site, gi_row_sites
from .pauli import Hamiltonian, PauliTerm, ketbra

FAMILIES = ("transverse", "xy_cycle", "gi_row_xy", "gi_fourbody", "nae_clause", "lhz_twoflip", "lhz_gf2", "aux")


def _check_cycle(cycle: Sequence[int]) -> list[int]:
    cycle = [int(s) for s in cycle]
    if len(cycle) < 3:
        raise ValueError("cycles need at least 3 sites")
    if len(set(cycle)) != len(cycle):
        raise ValueError(f"repeated site in cycle {cycle}")
    if min(cycle) < 0:
        raise ValueError("negative site index")
    return cycle


def build_transverse(n: int, sites: Iterable[int] | None = None, coeff: float = -1.0) -> Hamiltonian:
    """``coeff * sum_i X_i`` over ``sites`` (all sites by default)."""
    if n < 1:
        raise ValueError("need n >= 1")
    sites = range(n) if sites is None else sites
    return Hamiltonian(n, [PauliTerm.from_sites(n, {s: "X"}, coeff) for s in sites])


def build_xy_cycle(cycle: Sequence[int], J: float = 1.0, n_sites: int | None = None) -> Hamiltonian:
    """``-J sum (X_a X_b + Y_a Y_b)`` over consecutive sites of a closed cycle."""
    cycle = _check_cycle(cycle)
    n = max(cycle) + 1 if n_sites is None else n_sites
    terms = []
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        terms.append(PauliTerm.from_sites(n, {a: "X", b: "X"}, -J))
        terms.append(PauliTerm.from_sites(n, {a: "Y", b: "Y"}, -J))
    return Hamiltonian(n, terms)


def build_aux(cs: Sequence[Constraint], B: Sequence[float] | float, n: int | None = None) -> Hamiltonian:
    """Diagonal steering field ``-sum_j B_j C_j``."""
    if isinstance(B, (int, float)):
        B = [B] * len(cs)
    if len(B) != len(cs):
        raise ValueError(f"{len(cs)} constraints but {len(B)} field values")
    n = max(c.min_sites for c in cs) if n is None else n
    h = Hamiltonian.zero(n)
    for c, b in zip(cs, B):
        h = h - b * constraint_as_hamiltonian(c, n)
    return h.real()


@dataclass(frozen=True)
class AuxField:
    """Result of :func:`find_aux_field`; ``B`` is ``None`` when the sector is never globally minimal."""

    target_Mz: int
    B: float | None
    interval: tuple[float, float] | None
    attainable: tuple[int, ...]
    sector_energies: Mapping[int, float] = field(repr=False, default_factory=dict)

    @property
    def found(self) -> bool:
        return self.B is not None


def stable_field_interval(energies: Mapping[int, float], M: int) -> tuple[float, float]:
    """Field range ``[lo, hi]`` over which sector ``M`` minimizes ``E_M - B*M``."""
    lo, hi = -math.inf, math.inf
    for Mp, Ep in energies.items():
        if Mp > M:
            hi = min(hi, (Ep - energies[M]) / (Mp - M))
        elif Mp < M:
            lo = max(lo, (energies[M] - Ep) / (M - Mp))
    return lo, hi


def find_aux_field(n: int, target_Mz: int, J: float = 1.0, tol: float = 1e-10) -> AuxField:
    """Field ``B`` putting the global ground state of ``XY(n, J) - B sum Z`` in sector ``target_Mz``.

    Returns the midpoint of the stability interval; for the saturated sectors
    (unbounded interval) returns one unit of ``|J|`` past the last step.
    """
    from .spectral import xy_sector_energies

    if abs(target_Mz) > n or (n - target_Mz) % 2:
        raise ValueError(f"magnetization {target_Mz} impossible for {n} spins")
    energies = xy_sector_energies(n, J)
    intervals = {M: stable_field_interval(energies, M) for M in energies}
    scale = max(1.0, abs(J))
    attainable = tuple(sorted(M for M, (lo, hi) in intervals.items() if hi - lo > tol * scale))
    lo, hi = intervals[target_Mz]
    if target_Mz not in attainable:
        return AuxField(target_Mz, None, None, attainable, energies)
    if math.isinf(hi) and math.isinf(lo):
        B = 0.0
    elif math.isinf(hi):
        B = lo + abs(J)
    elif math.isinf(lo):
        B = hi - abs(J)
    else:
        B = 0.5 * (lo + hi)
    return AuxField(target_Mz, B, (lo, hi), attainable, energies)


def build_gi_row_xy(n: int, J: float = 1.0) -> Hamiltonian:
    """One periodic XY cycle per grid row; conserves each row's magnetization."""
    if n < 3:
        raise ValueError("need n >= 3")
    h = Hamiltonian.zero(n * n)
    for i in range(n):
        h = h + build_xy_cycle(gi_row_sites(n, i), J, n * n)
    return h


def gi_fourbody_hops(n: int) -> list[tuple[int, int, int, int]]:
    """``(i, i+1 mod n, j, j')`` index tuples of the neighboring-row swap hops."""
    return [(i, (i + 1) % n, j, jp) for i in range(n) for j, jp in itertools.combinations(range(n), 2)]


def build_gi_fourbody(n: int, coeff: float = -1.0) -> Hamiltonian:
    """Swap the column assignments of neighboring rows (periodic in the row index).

    Each hop is ``s+_{(i,j)} s-_{(i',j)} s+_{(i',j')} s-_{(i,j')} + h.c.`` with
    ``i' = i + 1 mod n`` and ``s+ = |up><down|``.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    N = n * n
    h = Hamiltonian.zero(N)
    for i, ip, j, jp in gi_fourbody_hops(n):
        sites = [grid_site(n, i, j), grid_site(n, ip, j), grid_site(n, ip, jp), grid_site(n, i, jp)]
        # s+ = |0><1|, s- = |1><0| under bit 0 = up
        ket, bra = [0, 1, 0, 1], [1, 0, 1, 0]
        h = h + coeff * (ketbra(N, sites, ket, bra) + ketbra(N, sites, bra, ket))
    return h.real()


def nae_clause_driver(c: ClauseIndicator, n: int, coeff: float = -1.0) -> Hamiltonian:
    """Uniform hopping among the six satisfying configurations of one clause."""
    h = Hamiltonian.zero(n)
    for a, b in itertools.permutations(c.allowed, 2):
        ka = [(a >> k) & 1 for k in range(3)]
        kb = [(b >> k) & 1 for k in range(3)]
        h = h + ketbra(n, c.support, ka, kb)
    return (coeff * h).real()


def build_nae_driver(constraint_clauses: Sequence[ClauseIndicator], n: int, coeff: float = -1.0) -> Hamiltonian:
    """Clause hops on the constrained clauses plus ``-X`` on every uncovered site."""
    check_disjoint(c.support for c in constraint_clauses)
    covered: set[int] = set()
    h = Hamiltonian.zero(n)
    for c in constraint_clauses:
        h = h + nae_clause_driver(c, n, coeff)
        covered.update(c.support)
    free = [k for k in range(n) if k not in covered]
    if free:
        h = h + build_transverse(n, free)
    return h


def build_lhz_twoflip(cycle: Sequence[int], n_sites: int | None = None, coeff: float = -1.0) -> Hamiltonian:
    """``coeff * sum_m X_{l_m} X_{l_{m+1}}`` around one parity loop."""
    cycle = _check_cycle(cycle)
    n = max(cycle) + 1 if n_sites is None else n_sites
    return Hamiltonian(
        n, [PauliTerm.from_sites(n, {a: "X", b: "X"}, coeff) for a, b in zip(cycle, cycle[1:] + cycle[:1])]
    )


def build_lhz_twoflip_driver(cycles: Sequence[Sequence[int]], n: int) -> Hamiltonian:
    """Two-flip drivers on non-overlapping loops plus ``-X`` on spins outside them."""
    check_disjoint(cycles)
    h = Hamiltonian.zero(n)
    covered: set[int] = set()
    for c in cycles:
        h = h + build_lhz_twoflip(c, n)
        covered.update(c)
    free = [k for k in range(n) if k not in covered]
    if free:
        h = h + build_transverse(n, free)
    return h


def completed_flip_mask(sol: Gf2Solution, subset: Iterable[int]) -> int:
    """X-mask of ``S_p`` plus the dependent spins needed to restore commutation.

    A dependent spin is added exactly when the X-product over ``subset``
    anticommutes with that dependent spin's solved parity row.
    """
    subset = set(int(i) for i in subset)
    if not subset:
        raise ValueError("driver subsets must be nonempty")
    indep = set(sol.independent_vars)
    if not subset <= indep:
        raise ValueError(f"sites {sorted(subset - indep)} are not independent variables")
    mask = sum(1 << i for i in subset)
    for d, expr in zip(sol.dependent_vars, sol.expressions):
        if len(subset.intersection(expr)) % 2:
            mask |= 1 << d
    return mask


def build_lhz_gf2_driver(
    sol: Gf2Solution,
    subsets: Sequence[Iterable[int]] | None = None,
    n_sites: int | None = None,
    coeff: float = -1.0,
) -> Hamiltonian:
    """Sum of completed X-strings, one per subset of independent variables.

    ``subsets`` defaults to the singletons of the independent variables.
    """
    n = sol.n_sites if n_sites is None else n_sites
    if subsets is None:
        subsets = [[i] for i in sol.independent_vars]
    return Hamiltonian(n, [PauliTerm(n, completed_flip_mask(sol, s), 0, coeff) for s in subsets])


class Independence(NamedTuple):
    independent: bool
    rank: int


def check_term_independence(terms: Iterable[PauliTerm | Hamiltonian]) -> Independence:
    """GF(2) rank of the x-masks of pure X-strings."""
    masks = []
    for t in terms:
        ts = t.terms if isinstance(t, Hamiltonian) else [t]
        for p in ts:
            if p.z_mask:
                raise ValueError(f"{p} is not a pure X-string")
            masks.append(p.x_mask)
    r = gf2_rank(masks)
    return Independence(r == len(masks), r)


def driver_ops_from_masks(n: int, masks: Iterable[int], coeff: float = -1.0) -> Hamiltonian:
    return Hamiltonian(n, [PauliTerm(n, m, 0, coeff) for m in masks])


# -- DriverSpec ---------------------------------------------------------------


@dataclass(frozen=True)
class DriverSpec:
    """Family tag plus family parameters, mirroring the JSON form."""

    family: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown driver family {self.family!r}")

    def build(self) -> Hamiltonian:
        p = dict(self.params)
        f = self.family
        if f == "transverse":
            return build_transverse(int(p["n"]), p.get("sites"))
        if f == "xy_cycle":
            return build_xy_cycle(p["cycle"], float(p.get("J", 1.0)), p.get("n_sites"))
        if f == "gi_row_xy":
            return build_gi_row_xy(int(p["n"]), float(p.get("J", 1.0)))
        if f == "gi_fourbody":
            return build_gi_fourbody(int(p["n"]))
        if f == "nae_clause":
            clauses = [constraint_from_json({"type": "clause", **c}) for c in p["clauses"]]
            return build_nae_driver(clauses, int(p["n"]))
        if f == "lhz_twoflip":
            if "cycles" in p:
                return build_lhz_twoflip_driver(p["cycles"], int(p["n_sites"]))
            return build_lhz_twoflip(p["cycle"], p.get("n_sites"))
        if f == "lhz_gf2":
            parities = [ZParity(tuple(q["support"]), int(q.get("target", 1))) for q in p["parities"]]
            sol = gf2_solve(parities, p.get("n_sites"))
            return build_lhz_gf2_driver(sol, p.get("subsets"), p.get("n_sites"))
        if f == "aux":
            cs = [constraint_from_json(c) for c in p["constraints"]]
            return build_aux(cs, p["B"], p.get("n"))
        raise AssertionError(f)

    def to_json(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}

    @classmethod
    def from_json(cls, d: Mapping) -> "DriverSpec":
        if "params" in d:
            return cls(d["family"], d["params"])
        return cls(d["family"], {k: v for k, v in d.items() if k != "family"})


__all__ = [
    "AuxField",
    "DriverSpec",
    "Independence",
    "build_aux",
    "build_gi_fourbody",
    "build_gi_row_xy",
    "build_lhz_gf2_driver",
    "build_lhz_twoflip",
    "build_lhz_twoflip_driver",
    "build_nae_driver",
    "build_transverse",
    "build_xy_cycle",
    "check_term_independence",
    "completed_flip_mask",
    "find_aux_field",
    "nae_clause_driver",
    "stable_field_interval",
]
