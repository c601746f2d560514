"""Problem Hamiltonians for graph isomorphism, NAE3SAT and LHZ parity constraints."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .constraints import ClauseIndicator, LinearZ, ZParity, constraint_as_hamiltonian
from .pauli import Hamiltonian, PauliTerm, z_string


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u}, {v}) out of range")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Image graph with vertex ``v`` renamed ``perm[v]``."""
        return Graph(self.n_vertices, frozenset((perm[u], perm[v]) for u, v in self.edges))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls(n, frozenset((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, frozenset(itertools.combinations(range(n), 2)))

    def to_json(self) -> dict:
        return {"n": self.n_vertices, "edges": [list(e) for e in sorted(self.edges)]}

    @classmethod
    def from_json(cls, d: Mapping) -> "Graph":
        return cls(int(d["n"]), frozenset(tuple(e) for e in d["edges"]))


# -- graph isomorphism on the n x n grid ------------------------------------


def grid_site(n: int, i: int, j: int) -> int:
    """Site of ``(i, j)``: vertex ``i`` of G1 mapped to vertex ``j`` of G2."""
    return i * n + j


def gi_row_sites(n: int, i: int) -> list[int]:
    return [grid_site(n, i, j) for j in range(n)]


def gi_col_sites(n: int, j: int) -> list[int]:
    return [grid_site(n, i, j) for i in range(n)]


def gi_constraints(n: int, rows: bool = True, cols: bool = True) -> list[LinearZ]:
    """Exactly one up spin per row / column, in spin units (target ``2 - n``)."""
    out = []
    if rows:
        out += [LinearZ.from_occupation(n * n, gi_row_sites(n, i), 1) for i in range(n)]
    if cols:
        out += [LinearZ.from_occupation(n * n, gi_col_sites(n, j), 1) for j in range(n)]
    return out


def permutation_state(perm: Sequence[int]) -> int:
    """Grid basis state with row ``i`` up only at column ``perm[i]``."""
    n = len(perm)
    state = (1 << (n * n)) - 1
    for i, j in enumerate(perm):
        state &= ~(1 << grid_site(n, i, j))
    return state


def state_to_permutation(state: int, n: int) -> tuple[int, ...] | None:
    perm = []
    for i in range(n):
        ups = [j for j in range(n) if not (state >> grid_site(n, i, j)) & 1]
        if len(ups) != 1:
            return None
        perm.append(ups[0])
    return tuple(perm) if len(set(perm)) == n else None


def _mismatched_pairs(g1: Graph, g2: Graph):
    """``(i, j, i', j')`` with ``i < j``, ``i' != j'`` and edge status differing."""
    n = g1.n_vertices
    for i, j in itertools.combinations(range(n), 2):
        e1 = g1.has_edge(i, j)
        for a, b in itertools.permutations(range(n), 2):
            if e1 != g2.has_edge(a, b):
                yield i, j, a, b


def build_gi_grid(g1: Graph, g2: Graph) -> tuple[Hamiltonian, list[LinearZ]]:
    """Edge-mismatch Hamiltonian on ``n**2`` sites plus the 2n bijectivity constraints.

    Each unordered pair ``{i, j}`` of G1 vertices is charged once for every
    ordered image pair ``(i', j')`` whose edge status in G2 differs, weighted by
    the projector ``(1 + Z_{i,i'})(1 + Z_{j,j'})/4``.  On a permutation state the
    energy is the number of mismatched edges.
    """
    if g1.n_vertices != g2.n_vertices:
        raise ValueError("graphs must have equal vertex counts")
    n = g1.n_vertices
    N = n * n
    terms = []
    for i, j, a, b in _mismatched_pairs(g1, g2):
        s, t = grid_site(n, i, a), grid_site(n, j, b)
        terms += [
            PauliTerm(N, 0, 0, 0.25),
            PauliTerm(N, 0, 1 << s, 0.25),
            PauliTerm(N, 0, 1 << t, 0.25),
            PauliTerm(N, 0, (1 << s) | (1 << t), 0.25),
        ]
    return Hamiltonian(N, terms).real(), gi_constraints(n)


def gi_mismatch_count(g1: Graph, g2: Graph, perm: Sequence[int]) -> int:
    """Number of vertex pairs whose adjacency differs between G1 and G2 under ``perm``."""
    return sum(
        g1.has_edge(i, j) != g2.has_edge(perm[i], perm[j])
        for i, j in itertools.combinations(range(g1.n_vertices), 2)
    )


def _occupation_excess(n: int, sites: Iterable[int]) -> Hamiltonian:
    h = Hamiltonian.identity(n, -1.0)
    for s in sites:
        h = h + 0.5 * Hamiltonian.identity(n) + z_string(n, [s], 0.5)
    return h


def build_gi_penalty(n: int, rows: bool = True, cols: bool = True) -> Hamiltonian:
    """Sum of squared (occupation - 1) over grid rows and/or columns."""
    if n < 2:
        raise ValueError("need n >= 2")
    N = n * n
    h = Hamiltonian.zero(N)
    for k in range(n):
        if rows:
            r = _occupation_excess(N, gi_row_sites(n, k))
            h = h + r * r
        if cols:
            c = _occupation_excess(N, gi_col_sites(n, k))
            h = h + c * c
    return h.real()


def penalty_bound(h_p: Hamiltonian) -> float:
    """Penalty weight that makes any unit constraint violation cost more than the whole H_p range."""
    return 2.0 * sum(abs(c) for _, c in h_p.items())


# -- ConfigModel: qudit and log-binary GI encodings -------------------------


@dataclass(frozen=True)
class ConfigModel:
    """Words over ``range(alphabet_size)`` with a diagonal cost and swap hops.

    A hop generator ``((p, q), (a, b))`` exchanges the values ``a`` and ``b``
    between positions ``p`` and ``q`` (in either orientation); words that do not
    hold exactly ``{a, b}`` at ``(p, q)`` are annihilated.
    """

    word_length: int
    alphabet_size: int
    cost: Callable[[tuple[int, ...]], float] = field(compare=False)
    hop_generators: tuple = ()
    encoding: str = "qudit"

    @property
    def block_bits(self) -> int:
        return max(1, (self.alphabet_size - 1).bit_length())

    @property
    def qubits(self) -> int | None:
        if self.encoding == "log_binary":
            return self.word_length * self.block_bits
        return None

    def apply(self, gen, word: tuple[int, ...]) -> tuple[int, ...] | None:
        (p, q), (a, b) = gen
        if {word[p], word[q]} != {a, b}:
            return None
        w = list(word)
        w[p], w[q] = w[q], w[p]
        return tuple(w)

    def neighbors(self, word: tuple[int, ...]) -> list[tuple[int, ...]]:
        out = []
        for g in self.hop_generators:
            w = self.apply(g, word)
            if w is not None:
                out.append(w)
        return out

    def words(self):
        return itertools.product(range(self.alphabet_size), repeat=self.word_length)

    def permutation_words(self) -> list[tuple[int, ...]]:
        return list(itertools.permutations(range(self.alphabet_size), self.word_length))

    def encode(self, word: Sequence[int]) -> int:
        """Qubit basis state of a word in the log-binary block layout."""
        b = self.block_bits
        return sum(int(v) << (b * i) for i, v in enumerate(word))

    def decode(self, state: int) -> tuple[int, ...]:
        b = self.block_bits
        return tuple((state >> (b * i)) & ((1 << b) - 1) for i in range(self.word_length))


def _gi_word_cost(g1: Graph, g2: Graph):
    mism = {(i, j, a, b) for i, j, a, b in _mismatched_pairs(g1, g2)}
    n = g1.n_vertices

    def cost(word):
        return float(
            sum((i, j, word[i], word[j]) in mism for i, j in itertools.combinations(range(n), 2))
        )

    return cost


def gi_swap_generators(n: int) -> tuple:
    """Neighbor swaps on a periodic chain of ``n`` positions, one per value pair."""
    pos = sorted({tuple(sorted((i, (i + 1) % n))) for i in range(n)})
    return tuple((p, v) for p in pos for v in itertools.combinations(range(n), 2))


def build_gi_qudit(g1: Graph, g2: Graph, encoding: str = "qudit") -> ConfigModel:
    if g1.n_vertices != g2.n_vertices:
        raise ValueError("graphs must have equal vertex counts")
    if encoding not in ("qudit", "log_binary"):
        raise ValueError(f"unknown word encoding {encoding!r}")
    n = g1.n_vertices
    return ConfigModel(n, n, _gi_word_cost(g1, g2), gi_swap_generators(n), encoding)


# -- NAE3SAT ----------------------------------------------------------------


def check_disjoint(supports: Iterable[Iterable[int]]) -> None:
    seen: set[int] = set()
    for s in supports:
        s = set(s)
        if seen & s:
            raise ValueError(f"supports overlap on sites {sorted(seen & s)}")
        seen |= s


def build_nae_problem(
    clauses: Sequence[ClauseIndicator], n: int, constrained: Iterable[int] = ()
) -> Hamiltonian:
    """Sum of violating-pair projectors over the clauses not promoted to constraints."""
    constrained = set(constrained)
    check_disjoint(clauses[m].support for m in sorted(constrained))
    h = Hamiltonian.zero(n)
    for m, c in enumerate(clauses):
        if m not in constrained:
            h = h + constraint_as_hamiltonian(c, n)
    return h.real()


# -- LHZ --------------------------------------------------------------------


def lhz_pairs(n_logical: int) -> list[tuple[int, int]]:
    """Logical pair carried by each physical spin, in spin order."""
    return list(itertools.combinations(range(n_logical), 2))


def lhz_plaquettes(n_logical: int) -> list[tuple[int, ...]]:
    """All closed loops of the LHZ layout: 3-spin at the diagonal, 4-spin in the bulk."""
    idx = {p: k for k, p in enumerate(lhz_pairs(n_logical))}
    out = []
    for i in range(n_logical - 2):
        out.append((idx[(i, i + 1)], idx[(i, i + 2)], idx[(i + 1, i + 2)]))
        for j in range(i + 2, n_logical - 1):
            out.append((idx[(i, j)], idx[(i, j + 1)], idx[(i + 1, j)], idx[(i + 1, j + 1)]))
    return out


@dataclass(frozen=True)
class LhzInstance:
    n_logical: int
    J: tuple[float, ...]
    cycles: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "J", tuple(float(v) for v in self.J))
        object.__setattr__(self, "cycles", tuple(tuple(int(s) for s in c) for c in self.cycles))
        if len(self.J) != self.M:
            raise ValueError(f"need {self.M} local fields, got {len(self.J)}")
        if len(self.cycles) not in (self.M - self.n_logical, self.M - self.n_logical + 1):
            raise ValueError(f"need M - n = {self.M - self.n_logical} cycles, got {len(self.cycles)}")
        for c in self.cycles:
            if len(set(c)) != len(c) or not all(0 <= s < self.M for s in c):
                raise ValueError(f"bad cycle {c}")

    @property
    def M(self) -> int:
        return self.n_logical * (self.n_logical - 1) // 2

    @property
    def L(self) -> int:
        return len(self.cycles)

    def constraints(self, which: Iterable[int] | None = None) -> list[ZParity]:
        which = range(self.L) if which is None else which
        return [ZParity(self.cycles[l], 1) for l in which]

    def to_json(self) -> dict:
        return {"n_logical": self.n_logical, "J": list(self.J), "cycles": [list(c) for c in self.cycles]}

    @classmethod
    def from_json(cls, d: Mapping) -> "LhzInstance":
        return cls(int(d["n_logical"]), tuple(d["J"]), tuple(tuple(c) for c in d["cycles"]))


def lhz_instance(n_logical: int, J: Sequence[float] | None = None, seed: int = 0, complete: bool = False) -> LhzInstance:
    """Instance on the LHZ plaquette layout.

    By default keeps the first ``M - n`` plaquettes; ``complete=True`` keeps all
    ``M - n + 1`` independent loops.  Fields default to seeded uniform draws in
    ``[-1, 1]``.
    """
    M = n_logical * (n_logical - 1) // 2
    if J is None:
        J = np.random.default_rng(seed).uniform(-1.0, 1.0, M)
    cycles = lhz_plaquettes(n_logical)
    if not complete:
        cycles = cycles[: M - n_logical]
    return LhzInstance(n_logical, tuple(J), tuple(cycles))


def lhz_penalty(inst: LhzInstance, which: Iterable[int]) -> Hamiltonian:
    """``sum_l (1 - C_l)``: 0 on satisfied loops, 2 per violated loop."""
    h = Hamiltonian.zero(inst.M)
    for l in which:
        h = h + Hamiltonian.identity(inst.M) - z_string(inst.M, inst.cycles[l])
    return h


def build_lhz(
    inst: LhzInstance,
    constrained: Iterable[int] | None = None,
    path: str = "gf2",
    alpha: float | None = None,
) -> tuple[Hamiltonian, list[ZParity]]:
    """Local-field problem Hamiltonian and the loops enforced by the driver.

    Loops not in ``constrained`` stay in the problem Hamiltonian as penalties of
    weight ``alpha`` (default :func:`penalty_bound` of the local fields).
    """
    constrained = list(range(inst.L)) if constrained is None else sorted(set(constrained))
    if path == "twoflip":
        check_disjoint(inst.cycles[l] for l in constrained)
    elif path != "gf2":
        raise ValueError(f"unknown LHZ path {path!r}")
    h = Hamiltonian(inst.M, [PauliTerm.from_sites(inst.M, {k: "Z"}, J) for k, J in enumerate(inst.J)])
    rest = [l for l in range(inst.L) if l not in constrained]
    if rest:
        a = penalty_bound(h) if alpha is None else alpha
        h = h + a * lhz_penalty(inst, rest)
    return h, inst.constraints(constrained)


# -- resource counts --------------------------------------------------------

ENCODINGS = ("gi_standard", "gi_partial", "gi_fourbody", "gi_log_binary", "gi_qudit", "lhz")


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length()


def resource_counts(encoding: str, n: int) -> dict[str, int]:
    if n < 2:
        raise ValueError("need n >= 2")
    if encoding == "gi_standard":
        return {"qubits": n * n, "edges": n * n * (n - 1)}
    if encoding == "gi_partial":
        return {"qubits": n * n, "edges": n * n * (n - 1) // 2 + n * n}
    if encoding == "gi_fourbody":
        return {"qubits": n * n, "driver_terms": n * (n * (n - 1) // 2), "max_term_support": 4}
    if encoding == "gi_log_binary":
        b = ceil_log2(n)
        return {"qubits": n * b, "block_bits": b}
    if encoding == "gi_qudit":
        return {"qudits": n, "levels": n, "driver_terms": n * n * (n - 1)}
    if encoding == "lhz":
        M = n * (n - 1) // 2
        return {"qubits": M, "constraints": M - n}
    raise ValueError(f"unknown encoding {encoding!r}; expected one of {', '.join(ENCODINGS)}")
