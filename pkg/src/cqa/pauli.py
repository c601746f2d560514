"""Pauli strings and Pauli-sum Hamiltonians in symplectic (x-mask, z-mask) form.

Conventions used throughout the package:

* site ``i`` is bit ``i`` of a basis-state integer (little endian), so the
  dense matrix of a string is ``P_{n-1} (x) ... (x) P_0``;
* bit 0 is spin up (``Z = +1``), bit 1 is spin down (``Z = -1``);
* a string with masks ``(x, z)`` denotes ``i**|x & z| * X^x Z^z``, i.e. a site
  with both bits set is ``Y = iXZ``.  Every such string is Hermitian, so a
  Hamiltonian is Hermitian exactly when all of its coefficients are real.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

DEFAULT_MAX_DIM = 4096
MERGE_TOL = 1e-14

_I_POW = (1, 1j, -1, -1j)
_SINGLE = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


class DimensionError(ValueError):
    """Raised when a dense/sparse realization would exceed the configured limit."""


def max_dim() -> int:
    """Dense dimension limit; ``CQA_MAX_DIM`` overrides the default of 4096."""
    return int(os.environ.get("CQA_MAX_DIM", DEFAULT_MAX_DIM))


def check_dim(dim: int) -> None:
    limit = max_dim()
    if dim > limit:
        raise DimensionError(f"dimension {dim} exceeds limit {limit} (set CQA_MAX_DIM to override)")


def popcount(v: int) -> int:
    return int(v).bit_count()


@dataclass(frozen=True)
class PauliTerm:
    n_sites: int
    x_mask: int
    z_mask: int
    coeff: complex = 1.0

    def __post_init__(self):
        if self.n_sites < 0:
            raise ValueError("n_sites must be nonnegative")
        full = (1 << self.n_sites) - 1
        if self.x_mask < 0 or self.z_mask < 0 or (self.x_mask | self.z_mask) & ~full:
            raise ValueError(f"masks have bits outside {self.n_sites} sites")

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliTerm":
        """``label[k]`` is the Pauli letter on site ``k``, e.g. ``"XIZ"``."""
        x = z = 0
        for k, ch in enumerate(label.upper()):
            try:
                xb, zb = _SINGLE[ch]
            except KeyError:
                raise ValueError(f"bad Pauli letter {ch!r}") from None
            x |= xb << k
            z |= zb << k
        return cls(len(label), x, z, coeff)

    @classmethod
    def from_sites(cls, n_sites: int, ops: Mapping[int, str], coeff: complex = 1.0) -> "PauliTerm":
        x = z = 0
        for site, ch in ops.items():
            if not 0 <= site < n_sites:
                raise ValueError(f"site {site} out of range for {n_sites} sites")
            xb, zb = _SINGLE[ch.upper()]
            x |= xb << site
            z |= zb << site
        return cls(n_sites, x, z, coeff)

    @property
    def label(self) -> str:
        return "".join(
            _LETTER[((self.x_mask >> k) & 1, (self.z_mask >> k) & 1)] for k in range(self.n_sites)
        )

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return popcount(self.support)

    @property
    def key(self) -> tuple[int, int]:
        return (self.x_mask, self.z_mask)

    def is_diagonal(self) -> bool:
        return self.x_mask == 0

    def scaled(self, c: complex) -> "PauliTerm":
        return PauliTerm(self.n_sites, self.x_mask, self.z_mask, self.coeff * c)

    def __mul__(self, other):
        if isinstance(other, PauliTerm):
            return multiply(self, other)
        return self.scaled(other)

    def __rmul__(self, c):
        return self.scaled(c)

    def __repr__(self):
        return f"PauliTerm({self.coeff!r} * {self.label})"


def _check_same(a_n: int, b_n: int) -> None:
    if a_n != b_n:
        raise ValueError(f"site-count mismatch: {a_n} vs {b_n}")


def product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent ``e`` (mod 4) with ``P(x1,z1) P(x2,z2) = i**e P(x1^x2, z1^z2)``."""
    x3, z3 = x1 ^ x2, z1 ^ z2
    return (popcount(x1 & z1) + popcount(x2 & z2) + 2 * popcount(z1 & x2) - popcount(x3 & z3)) % 4


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    _check_same(a.n_sites, b.n_sites)
    e = product_phase(a.x_mask, a.z_mask, b.x_mask, b.z_mask)
    return PauliTerm(a.n_sites, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, a.coeff * b.coeff * _I_POW[e])


def commutes(a: PauliTerm, b: PauliTerm) -> bool:
    _check_same(a.n_sites, b.n_sites)
    return (popcount(a.x_mask & b.z_mask) + popcount(a.z_mask & b.x_mask)) % 2 == 0


class Hamiltonian:
    """Weighted sum of Pauli strings with merged, canonically ordered terms.

    Instances are treated as immutable; arithmetic returns new objects.
    """

    __slots__ = ("n_sites", "_coeffs")

    def __init__(self, n_sites: int, terms: Iterable[PauliTerm] = ()):
        self.n_sites = int(n_sites)
        acc: dict[tuple[int, int], complex] = {}
        for t in terms:
            _check_same(self.n_sites, t.n_sites)
            acc[t.key] = acc.get(t.key, 0.0) + complex(t.coeff)
        self._coeffs = {k: v for k, v in sorted(acc.items()) if abs(v) >= MERGE_TOL}

    @classmethod
    def _from_dict(cls, n_sites: int, coeffs: Mapping[tuple[int, int], complex]) -> "Hamiltonian":
        h = cls.__new__(cls)
        h.n_sites = n_sites
        h._coeffs = {k: complex(v) for k, v in sorted(coeffs.items()) if abs(v) >= MERGE_TOL}
        return h

    @classmethod
    def zero(cls, n_sites: int) -> "Hamiltonian":
        return cls(n_sites)

    @classmethod
    def identity(cls, n_sites: int, coeff: complex = 1.0) -> "Hamiltonian":
        return cls(n_sites, [PauliTerm(n_sites, 0, 0, coeff)])

    @classmethod
    def from_labels(cls, items: Mapping[str, complex] | Iterable[tuple[str, complex]]) -> "Hamiltonian":
        items = list(items.items()) if isinstance(items, Mapping) else list(items)
        if not items:
            raise ValueError("need at least one label to infer n_sites")
        n = len(items[0][0])
        return cls(n, [PauliTerm.from_label(lbl, c) for lbl, c in items])

    # -- views -----------------------------------------------------------
    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        return tuple(PauliTerm(self.n_sites, x, z, c) for (x, z), c in self._coeffs.items())

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    def coeff(self, label_or_key) -> complex:
        if isinstance(label_or_key, str):
            t = PauliTerm.from_label(label_or_key)
            label_or_key = t.key
        return self._coeffs.get(tuple(label_or_key), 0.0)

    def items(self):
        return self._coeffs.items()

    def __len__(self):
        return len(self._coeffs)

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        return self.n_sites == other.n_sites and (self - other).is_zero()

    __hash__ = None

    def is_zero(self, tol: float = 1e-12) -> bool:
        return all(abs(c) <= tol for c in self._coeffs.values())

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._coeffs.values())

    def is_diagonal(self) -> bool:
        return all(x == 0 for x, _ in self._coeffs)

    def x_masks(self) -> list[int]:
        return sorted({x for x, _ in self._coeffs})

    def max_support(self) -> int:
        return max((popcount(x | z) for x, z in self._coeffs if x | z), default=0)

    def dagger(self) -> "Hamiltonian":
        return Hamiltonian._from_dict(self.n_sites, {k: c.conjugate() for k, c in self._coeffs.items()})

    def real(self) -> "Hamiltonian":
        """Drop imaginary round-off from a Hamiltonian known to be Hermitian."""
        return Hamiltonian._from_dict(self.n_sites, {k: c.real for k, c in self._coeffs.items()})

    def embed(self, n_sites: int) -> "Hamiltonian":
        """Same operator viewed on a larger register (extra sites get identity)."""
        if n_sites < self.n_sites:
            raise ValueError("cannot embed into fewer sites")
        return Hamiltonian._from_dict(n_sites, self._coeffs)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Hamiltonian.identity(self.n_sites, other)
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        _check_same(self.n_sites, other.n_sites)
        acc = dict(self._coeffs)
        for k, c in other._coeffs.items():
            acc[k] = acc.get(k, 0.0) + c
        return Hamiltonian._from_dict(self.n_sites, acc)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Hamiltonian):
            _check_same(self.n_sites, other.n_sites)
            acc: dict[tuple[int, int], complex] = {}
            for (x1, z1), c1 in self._coeffs.items():
                for (x2, z2), c2 in other._coeffs.items():
                    k = (x1 ^ x2, z1 ^ z2)
                    acc[k] = acc.get(k, 0.0) + c1 * c2 * _I_POW[product_phase(x1, z1, x2, z2)]
            return Hamiltonian._from_dict(self.n_sites, acc)
        if isinstance(other, (int, float, complex, np.number)):
            return Hamiltonian._from_dict(self.n_sites, {k: c * other for k, c in self._coeffs.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __repr__(self):
        body = " + ".join(f"({c:.6g})*{PauliTerm(self.n_sites, x, z).label}" for (x, z), c in self._coeffs.items())
        return f"Hamiltonian(n={self.n_sites}: {body or '0'})"

    # -- realizations ----------------------------------------------------
    def _term_arrays(self):
        if not self._coeffs:
            return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, complex)
        keys = np.array(list(self._coeffs), dtype=np.int64)
        coeffs = np.array(list(self._coeffs.values()), dtype=complex)
        # fold the Y phases i**|x&z| into the coefficient
        ypow = np.bitwise_count(keys[:, 0] & keys[:, 1]).astype(np.int64) % 4
        return keys[:, 0], keys[:, 1], coeffs * np.array(_I_POW)[ypow]

    def amplitudes(self, states: np.ndarray) -> dict[int, np.ndarray]:
        """Merged off-/on-diagonal amplitudes per flip mask.

        Returns ``{x: amp}`` where ``amp[k] = <states[k] ^ x| H |states[k]>``.
        """
        states = np.asarray(states, dtype=np.int64)
        xs, zs, cs = self._term_arrays()
        out: dict[int, np.ndarray] = {}
        for x, z, c in zip(xs.tolist(), zs.tolist(), cs):
            sign = 1 - 2 * (np.bitwise_count(states & z) & 1).astype(np.int64)
            amp = c * sign
            if x in out:
                out[x] = out[x] + amp
            else:
                out[x] = amp.astype(complex)
        return out

    def diagonal(self) -> np.ndarray:
        check_dim(self.dim)
        return self.amplitudes(np.arange(self.dim)).get(0, np.zeros(self.dim, complex))

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Matrix-free ``H @ psi`` on the full register."""
        psi = np.asarray(psi)
        if psi.shape[0] != self.dim:
            raise ValueError(f"state has length {psi.shape[0]}, expected {self.dim}")
        idx = np.arange(self.dim, dtype=np.int64)
        out = np.zeros(psi.shape, dtype=complex)
        for x, amp in self.amplitudes(idx).items():
            out[idx ^ x] += amp.reshape((-1,) + (1,) * (psi.ndim - 1)) * psi
        return out

    def to_sparse(self) -> sp.csr_matrix:
        check_dim(self.dim)
        idx = np.arange(self.dim, dtype=np.int64)
        rows, cols, data = [], [], []
        for x, amp in self.amplitudes(idx).items():
            rows.append(idx ^ x)
            cols.append(idx)
            data.append(amp)
        if not rows:
            return sp.csr_matrix((self.dim, self.dim), dtype=complex)
        m = sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim),
            dtype=complex,
        )
        m.sum_duplicates()
        return m

    def to_matrix(self) -> np.ndarray:
        return to_matrix(self)

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        terms = []
        for (x, z), c in self._coeffs.items():
            sites = [k for k in range(self.n_sites) if (x | z) >> k & 1]
            paulis = "".join(_LETTER[((x >> k) & 1, (z >> k) & 1)] for k in sites)
            terms.append({"sites": sites, "paulis": paulis, "coeff": [c.real, c.imag]})
        return {"n": self.n_sites, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> "Hamiltonian":
        n = int(data["n"])
        terms = []
        for t in data["terms"]:
            sites, paulis = list(t["sites"]), t["paulis"]
            if len(sites) != len(paulis):
                raise ValueError("sites and paulis differ in length")
            if len(set(sites)) != len(sites):
                raise ValueError("repeated site in term")
            c = t["coeff"]
            coeff = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
            terms.append(PauliTerm.from_sites(n, dict(zip(sites, paulis)), coeff))
        return cls(n, terms)


def pauli(n_sites: int, ops: Mapping[int, str], coeff: complex = 1.0) -> Hamiltonian:
    """Single-string Hamiltonian, e.g. ``pauli(4, {0: "X", 2: "X"})``."""
    return Hamiltonian(n_sites, [PauliTerm.from_sites(n_sites, ops, coeff)])


def z_string(n_sites: int, sites: Iterable[int], coeff: complex = 1.0) -> Hamiltonian:
    return pauli(n_sites, {s: "Z" for s in sites}, coeff)


def x_string(n_sites: int, sites: Iterable[int], coeff: complex = 1.0) -> Hamiltonian:
    return pauli(n_sites, {s: "X" for s in sites}, coeff)


# |a><b| on one site, as (label, coeff) pairs
_KETBRA = {
    (0, 0): (("I", 0.5), ("Z", 0.5)),
    (1, 1): (("I", 0.5), ("Z", -0.5)),
    (0, 1): (("X", 0.5), ("Y", 0.5j)),
    (1, 0): (("X", 0.5), ("Y", -0.5j)),
}


def ketbra(n_sites: int, sites: Iterable[int], ket: Iterable[int], bra: Iterable[int]) -> Hamiltonian:
    """``|ket><bra|`` on ``sites`` (identity elsewhere), expanded into Pauli strings."""
    sites, ket, bra = list(sites), list(ket), list(bra)
    if not len(sites) == len(ket) == len(bra):
        raise ValueError("sites, ket and bra must have equal length")
    if len(set(sites)) != len(sites):
        raise ValueError("repeated site")
    out = Hamiltonian.identity(n_sites)
    for s, a, b in zip(sites, ket, bra):
        factor = Hamiltonian(
            n_sites,
            [PauliTerm.from_sites(n_sites, {s: lbl} if lbl != "I" else {}, c) for lbl, c in _KETBRA[(a, b)]],
        )
        out = out * factor
    return out


def to_matrix(h: Hamiltonian) -> np.ndarray:
    check_dim(h.dim)
    return h.to_sparse().toarray()


def commutator(a: Hamiltonian, b: Hamiltonian) -> Hamiltonian:
    return a * b - b * a


def commutator_norm(a: Hamiltonian, b: Hamiltonian) -> float:
    """Frobenius norm of ``AB - BA`` computed on the matrix realizations."""
    _check_same(a.n_sites, b.n_sites)
    ma, mb = a.to_sparse(), b.to_sparse()
    c = (ma @ mb - mb @ ma).tocsr()
    c.sum_duplicates()
    return float(np.sqrt(np.sum(np.abs(c.data) ** 2)))


def hermiticity_defect(m) -> float:
    if sp.issparse(m):
        d = (m - m.conj().T).tocsr()
        return float(np.sqrt(np.sum(np.abs(d.data) ** 2)))
    return float(np.linalg.norm(m - m.conj().T))
