import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

PAULI_2x2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_label(label: str) -> np.ndarray:
    """Dense matrix of a Pauli label, site 0 = least significant bit (rightmost factor)."""
    m = np.eye(1, dtype=complex)
    for ch in label:
        m = np.kron(PAULI_2x2[ch], m)
    return m


def kron_hamiltonian(h) -> np.ndarray:
    """Independent dense realization of a Hamiltonian by Kronecker products."""
    m = np.zeros((h.dim, h.dim), dtype=complex)
    for t in h.terms:
        m += t.coeff * kron_label(t.label)
    return m


def spins(state: int, n: int) -> list[int]:
    return [1 - 2 * ((state >> i) & 1) for i in range(n)]


def brute_force_sector(predicate, n: int) -> list[int]:
    return [s for s in range(1 << n) if predicate(spins(s, n))]


def bfs_components(n_nodes: int, edges) -> int:
    adj = [[] for _ in range(n_nodes)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n_nodes
    comps = 0
    for start in range(n_nodes):
        if seen[start]:
            continue
        comps += 1
        seen[start] = True
        q = deque([start])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    q.append(v)
    return comps


def gf2_brute_force(rows, n: int):
    """All assignments (as bit lists) satisfying ``sum_{i in support} b_i = rhs`` for every row."""
    sols = []
    for bits in itertools.product((0, 1), repeat=n):
        if all(sum(bits[i] for i in sup) % 2 == rhs for sup, rhs in rows):
            sols.append(bits)
    return sols


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
