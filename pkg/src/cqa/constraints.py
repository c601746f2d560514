"""Diagonal constraint operators, charge-sector enumeration and the mod-2 solver."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .pauli import Hamiltonian, ketbra, z_string

# enumerate sectors by vectorized filtering up to this many sites, DFS beyond
BRUTE_FORCE_MAX_SITES = 20


class InfeasibleError(ValueError):
    """A constraint system has no solution."""


def bits_to_int(bits: str | Sequence[int]) -> int:
    """``"0110"`` -> integer with ``bit k`` = character ``k`` (site order)."""
    return sum(int(b) << k for k, b in enumerate(bits))


def int_to_bits(state: int, n: int) -> str:
    return "".join(str((state >> k) & 1) for k in range(n))


def _spin(bit):
    return 1 - 2 * bit


@dataclass(frozen=True)
class LinearZ:
    """``sum_i coeffs[i] * z_i == target`` with ``z_i = +-1``."""

    coeffs: tuple[int, ...]
    target: int

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if all(c in (0, 1) for c in self.coeffs):
            k = sum(self.coeffs)
            if (k - self.target) % 2:
                raise ValueError(f"target {self.target} unreachable by {k} unit spins (parity)")

    @classmethod
    def on_sites(cls, n: int, sites: Iterable[int], target: int) -> "LinearZ":
        coeffs = [0] * n
        for s in sites:
            coeffs[s] = 1
        return cls(tuple(coeffs), target)

    @classmethod
    def from_occupation(cls, n: int, sites: Iterable[int], count: int) -> "LinearZ":
        """Convert ``sum_i (1 + z_i)/2 == count`` over ``sites`` to spin units."""
        sites = list(sites)
        return cls.on_sites(n, sites, 2 * count - len(sites))

    @property
    def min_sites(self) -> int:
        return len(self.coeffs)

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.coeffs) if c)


@dataclass(frozen=True)
class ZParity:
    """``prod_{i in support} z_i == target``."""

    support: tuple[int, ...]
    target: int = 1

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(s) for s in self.support))
        if not self.support:
            raise ValueError("parity support must be nonempty")
        if len(set(self.support)) != len(self.support):
            raise ValueError("repeated site in parity support")
        if self.target not in (1, -1):
            raise ValueError("parity target must be +1 or -1")

    @property
    def min_sites(self) -> int:
        return max(self.support) + 1

    @property
    def mask(self) -> int:
        return sum(1 << s for s in self.support)

    @property
    def rhs(self) -> int:
        """Right-hand side of ``sum b_i = rhs (mod 2)``."""
        return 0 if self.target == 1 else 1


@dataclass(frozen=True)
class ClauseIndicator:
    """Indicator of the violating pair ``{j, ~j}`` of a 3-site clause.

    ``violating`` is a 3-bit config with bit ``k`` belonging to ``support[k]``.
    """

    support: tuple[int, int, int]
    violating: int
    target: int = 0

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(s) for s in self.support))
        if len(self.support) != 3 or len(set(self.support)) != 3:
            raise ValueError("clause needs 3 distinct sites")
        if not 0 <= self.violating < 8:
            raise ValueError("violating config must be a 3-bit value")
        if self.target != 0:
            raise ValueError("clause constraints require target 0 (satisfied)")

    @property
    def violating_pair(self) -> tuple[int, int]:
        j = self.violating
        return (min(j, j ^ 7), max(j, j ^ 7))

    @property
    def allowed(self) -> list[int]:
        return [c for c in range(8) if c not in self.violating_pair]

    @property
    def min_sites(self) -> int:
        return max(self.support) + 1


Constraint = Union[LinearZ, ZParity, ClauseIndicator]


def _check_range(c: Constraint, n: int) -> None:
    if c.min_sites > n:
        raise ValueError(f"constraint {c} refers to sites beyond {n}")


def eval_constraint(c: Constraint, state, n: int | None = None):
    """Value of ``c`` on basis state(s); accepts an int or an int array."""
    if n is not None:
        _check_range(c, n)
    s = np.asarray(state, dtype=np.int64)
    if isinstance(c, LinearZ):
        val = sum(coef * _spin((s >> i) & 1) for i, coef in enumerate(c.coeffs) if coef)
        val = val + np.zeros_like(s)
    elif isinstance(c, ZParity):
        val = _spin((np.bitwise_count(s & c.mask) & 1).astype(np.int64))
    elif isinstance(c, ClauseIndicator):
        cfg = sum(((s >> site) & 1) << k for k, site in enumerate(c.support))
        a, b = c.violating_pair
        val = ((cfg == a) | (cfg == b)).astype(np.int64)
    else:
        raise TypeError(f"unknown constraint {c!r}")
    return int(val) if np.ndim(val) == 0 else val


def satisfied(cs: Sequence[Constraint], states) -> np.ndarray:
    s = np.asarray(states, dtype=np.int64)
    ok = np.ones(s.shape, dtype=bool)
    for c in cs:
        ok &= eval_constraint(c, s) == c.target
    return ok


@dataclass(frozen=True)
class SectorBasis:
    n_sites: int
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        st = np.asarray(self.states, dtype=np.int64)
        if st.size and np.any(np.diff(st) <= 0):
            st = np.unique(st)
        st.setflags(write=False)
        object.__setattr__(self, "states", st)

    @property
    def feasible(self) -> bool:
        return self.states.size > 0

    @property
    def size(self) -> int:
        return int(self.states.size)

    def __len__(self):
        return self.size

    @property
    def index_of(self) -> dict[int, int]:
        return {int(s): k for k, s in enumerate(self.states)}

    def index(self, states) -> np.ndarray:
        """Positions of ``states`` in the basis, ``-1`` where absent."""
        s = np.asarray(states, dtype=np.int64)
        pos = np.searchsorted(self.states, s)
        pos = np.clip(pos, 0, max(self.size - 1, 0))
        hit = self.states[pos] == s if self.size else np.zeros(s.shape, bool)
        return np.where(hit, pos, -1)

    def contains(self, states) -> np.ndarray:
        return self.index(states) >= 0

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Sector-coordinate vector -> full-register vector."""
        full = np.zeros((1 << self.n_sites,) + np.shape(vec)[1:], dtype=complex)
        full[self.states] = vec
        return full

    def project(self, full: np.ndarray) -> np.ndarray:
        return np.asarray(full)[self.states]

    def bitstrings(self) -> list[str]:
        return [int_to_bits(int(s), self.n_sites) for s in self.states]

    def to_json(self) -> dict:
        return {"n": self.n_sites, "states": self.bitstrings(), "feasible": self.feasible}

    @classmethod
    def from_json(cls, data: Mapping) -> "SectorBasis":
        return cls(int(data["n"]), np.array([bits_to_int(b) for b in data["states"]], dtype=np.int64))


def _dfs_sector(cs: Sequence[Constraint], n: int) -> np.ndarray:
    """Site-by-site enumeration with pruning, for registers too large to filter."""
    # for each site, constraints that become fully determined once it is assigned
    last_site = [max(c.sites if isinstance(c, LinearZ) else c.support, default=0) for c in cs]
    closing = [[j for j, ls in enumerate(last_site) if ls == i] for i in range(n)]
    linear = [(j, c) for j, c in enumerate(cs) if isinstance(c, LinearZ)]
    # remaining |coeff| mass after each site, for LinearZ bounds
    rem = {j: np.concatenate([np.cumsum(np.abs(c.coeffs)[::-1])[::-1], [0]]) for j, c in linear}
    partial = {j: 0 for j, _ in linear}
    out: list[int] = []

    def rec(i: int, state: int):
        if i == n:
            out.append(state)
            return
        for bit in (0, 1):
            st = state | (bit << i)
            ok = True
            touched = []
            for j, c in linear:
                if i < len(c.coeffs) and c.coeffs[i]:
                    partial[j] += c.coeffs[i] * _spin(bit)
                    touched.append((j, c.coeffs[i] * _spin(bit)))
                if abs(c.target - partial[j]) > rem[j][i + 1]:
                    ok = False
            if ok:
                for j in closing[i]:
                    if eval_constraint(cs[j], st) != cs[j].target:
                        ok = False
                        break
            if ok:
                rec(i + 1, st)
            for j, d in touched:
                partial[j] -= d

    rec(0, 0)
    return np.array(out, dtype=np.int64)


def sector_basis(cs: Sequence[Constraint], n: int) -> SectorBasis:
    """All basis states satisfying every constraint (possibly empty)."""
    for c in cs:
        _check_range(c, n)
    if n <= BRUTE_FORCE_MAX_SITES:
        states = np.arange(1 << n, dtype=np.int64)
        return SectorBasis(n, states[satisfied(cs, states)])
    return SectorBasis(n, np.sort(_dfs_sector(cs, n)))


def constraint_as_hamiltonian(c: Constraint, n: int | None = None) -> Hamiltonian:
    n = c.min_sites if n is None else n
    _check_range(c, n)
    if isinstance(c, LinearZ):
        h = Hamiltonian.zero(n)
        for i, coef in enumerate(c.coeffs):
            if coef:
                h = h + z_string(n, [i], coef)
        return h
    if isinstance(c, ZParity):
        return z_string(n, c.support)
    if isinstance(c, ClauseIndicator):
        h = Hamiltonian.zero(n)
        for cfg in c.violating_pair:
            bits = [(cfg >> k) & 1 for k in range(3)]
            h = h + ketbra(n, c.support, bits, bits)
        return h
    raise TypeError(f"unknown constraint {c!r}")


# -- mod-2 linear systems ---------------------------------------------------


@dataclass(frozen=True)
class Gf2Solution:
    """Solved form ``b_dep = XOR(b_i for i in expr) XOR const`` per dependent site."""

    dependent_vars: tuple[int, ...]
    expressions: tuple[tuple[int, ...], ...]
    independent_vars: tuple[int, ...]
    constants: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.constants:
            object.__setattr__(self, "constants", (0,) * len(self.dependent_vars))

    @property
    def n_sites(self) -> int:
        return max(self.dependent_vars + self.independent_vars, default=-1) + 1

    def solved_parities(self) -> list[ZParity]:
        """The system rewritten as one parity per dependent variable."""
        return [
            ZParity((d,) + e, -1 if k else 1)
            for d, e, k in zip(self.dependent_vars, self.expressions, self.constants)
        ]

    def assign(self, independent_bits: Mapping[int, int]) -> dict[int, int]:
        """Complete an assignment of the independent variables."""
        bits = {i: int(independent_bits.get(i, 0)) & 1 for i in self.independent_vars}
        for d, e, k in zip(self.dependent_vars, self.expressions, self.constants):
            v = k
            for i in e:
                v ^= bits[i]
            bits[d] = v
        return bits

    def to_json(self) -> dict:
        return {
            "dependent": list(self.dependent_vars),
            "exprs": [list(e) for e in self.expressions],
            "constants": list(self.constants),
            "independent": list(self.independent_vars),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Gf2Solution":
        dep = tuple(data["dependent"])
        return cls(
            dep,
            tuple(tuple(e) for e in data["exprs"]),
            tuple(data.get("independent", ())),
            tuple(data.get("constants", (0,) * len(dep))),
        )


def gf2_solve(parities: Sequence[ZParity], n_sites: int | None = None) -> Gf2Solution:
    """Gauss-Jordan elimination of ``sum_{m} b_m = rhs (mod 2)`` rows.

    Rows are processed in order; each row's pivot (the dependent variable) is its
    highest-index remaining site after reduction by earlier pivots.  Redundant rows
    are dropped; a reduced row ``0 = 1`` raises :class:`InfeasibleError`.
    """
    sites: set[int] = set()
    for p in parities:
        sites.update(p.support)
    if n_sites is not None:
        if sites and max(sites) >= n_sites:
            raise ValueError("parity support outside n_sites")
        sites.update(range(n_sites))

    pivots: list[int] = []
    rows: list[int] = []
    rhs: list[int] = []
    for p in parities:
        r, b = p.mask, p.rhs
        for k, piv in enumerate(pivots):
            if r >> piv & 1:
                r ^= rows[k]
                b ^= rhs[k]
        if r == 0:
            if b:
                raise InfeasibleError(f"constraint {p} contradicts earlier rows")
            continue
        piv = r.bit_length() - 1
        for k in range(len(rows)):
            if rows[k] >> piv & 1:
                rows[k] ^= r
                rhs[k] ^= b
        pivots.append(piv)
        rows.append(r)
        rhs.append(b)

    exprs = tuple(
        tuple(i for i in range(r.bit_length()) if (r >> i & 1) and i != piv) for piv, r in zip(pivots, rows)
    )
    independent = tuple(sorted(sites - set(pivots)))
    return Gf2Solution(tuple(pivots), exprs, independent, tuple(rhs))


# -- JSON ----------------------------------------------------------------


def constraint_to_json(c: Constraint) -> dict:
    if isinstance(c, LinearZ):
        return {"type": "linear_z", "coeffs": list(c.coeffs), "target": c.target}
    if isinstance(c, ZParity):
        return {"type": "z_parity", "support": list(c.support), "target": c.target}
    if isinstance(c, ClauseIndicator):
        return {
            "type": "clause",
            "support": list(c.support),
            "violating": int_to_bits(c.violating, 3),
            "target": c.target,
        }
    raise TypeError(f"unknown constraint {c!r}")


def constraint_from_json(d: Mapping) -> Constraint:
    kind = d.get("type")
    if kind == "linear_z":
        if "coeffs" in d:
            return LinearZ(tuple(d["coeffs"]), int(d["target"]))
        return LinearZ.on_sites(int(d["n"]), d["sites"], int(d["target"]))
    if kind == "z_parity":
        return ZParity(tuple(d["support"]), int(d.get("target", 1)))
    if kind == "clause":
        v = d["violating"]
        v = bits_to_int(v) if isinstance(v, str) else int(v)
        return ClauseIndicator(tuple(d["support"]), v, int(d.get("target", 0)))
    raise ValueError(f"unknown constraint type {kind!r}")


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of integer bit-rows."""
    basis: list[int] = []  # kept sorted by leading bit, descending
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
            basis.sort(reverse=True)
    return len(basis)
