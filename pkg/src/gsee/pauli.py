"""Exact algebra over Pauli strings and weighted Pauli sums.

Strings are held in a symplectic bitmask representation: a string is the
pair of integers ``(x_mask, z_mask)`` where bit ``q`` of ``x_mask`` /
``z_mask`` records an X / Z factor on qubit ``q``, and a Y factor sets
both bits.  Products, commutation checks, and dense-matrix actions then
reduce to bit arithmetic.

The qubit-to-amplitude convention used throughout the package is little
endian: qubit ``q`` is bit ``q`` of the computational-basis index.

Example:
    >>> phase, product = multiply(PauliString.from_label("X0"),
    ...                           PauliString.from_label("Y0"))
    >>> phase, product.to_label()
    (1j, 'Z0')
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "PauliString",
    "PauliSum",
    "CommutingSets",
    "multiply",
    "commutes",
    "sum_multiply",
    "truncate",
    "group_commuting",
    "spectral_norm",
    "PURGE_TOL",
    "DENSE_MATRIX_CAP",
]

# Coefficients at or below this magnitude are purged after arithmetic;
# double-precision cancellation residue lands well below it.
PURGE_TOL = 1e-14

# Dense 2^n x 2^n paths (matrices, eigendecompositions) refuse wider
# registers; desk-scale memory runs out shortly after.
DENSE_MATRIX_CAP = 14

_PHASES = (1 + 0j, 1j, -1 + 0j, -1j)
_AXIS_FROM_BITS = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS_FROM_AXIS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_AXIS_RANK = {"X": 0, "Y": 1, "Z": 2}


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Pauli operators.

    Attributes:
        x_mask: bit ``q`` set iff the factor on qubit ``q`` is X or Y.
        z_mask: bit ``q`` set iff the factor on qubit ``q`` is Z or Y.

    The empty string (both masks zero) is the identity.
    """

    x_mask: int = 0
    z_mask: int = 0

    @classmethod
    def from_support(cls, support: Mapping[int, str]) -> "PauliString":
        """Builds a string from a ``{qubit: axis}`` mapping.

        Args:
            support: map from qubit index to one of ``"X"``, ``"Y"``, ``"Z"``.

        Raises:
            ValueError: on a negative qubit index or unknown axis letter.
        """
        x = z = 0
        for q, axis in support.items():
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            try:
                bx, bz = _BITS_FROM_AXIS[axis]
            except KeyError:
                raise ValueError(f"unknown Pauli axis {axis!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(x, z)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parses a label such as ``"X0 Y3 Z5"``; ``""`` is the identity.

        Raises:
            ValueError: on malformed tokens or a repeated qubit index.
        """
        support: dict[int, str] = {}
        for token in label.split():
            axis, index = token[0].upper(), token[1:]
            if axis not in _AXIS_RANK or not index.isdigit():
                raise ValueError(f"malformed Pauli token {token!r}")
            q = int(index)
            if q in support:
                raise ValueError(f"qubit {q} appears twice in {label!r}")
            support[q] = axis
        return cls.from_support(support)

    @property
    def support(self) -> dict[int, str]:
        """Map from qubit index to axis, in ascending qubit order."""
        out: dict[int, str] = {}
        occ = self.x_mask | self.z_mask
        q = 0
        while occ >> q:
            bx, bz = (self.x_mask >> q) & 1, (self.z_mask >> q) & 1
            if bx or bz:
                out[q] = _AXIS_FROM_BITS[(bx, bz)]
            q += 1
        return out

    @property
    def is_identity(self) -> bool:
        return not (self.x_mask | self.z_mask)

    @property
    def weight(self) -> int:
        """Number of qubits the string acts on non-trivially."""
        return (self.x_mask | self.z_mask).bit_count()

    @property
    def min_width(self) -> int:
        """Smallest register width containing the support."""
        return (self.x_mask | self.z_mask).bit_length()

    def to_label(self) -> str:
        return " ".join(f"{axis}{q}" for q, axis in self.support.items())

    def sort_key(self) -> tuple:
        """Canonical ordering key: lexicographic by (qubit index, X<Y<Z)."""
        return tuple((q, _AXIS_RANK[a]) for q, a in self.support.items())

    def multiply(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Operator product ``self · other`` as ``(phase, string)``.

        The phase is one of ``+1, +i, -1, -i``; ``phase * string`` equals
        the matrix product exactly.
        """
        xc = self.x_mask ^ other.x_mask
        zc = self.z_mask ^ other.z_mask
        # Per qubit, with P(x,z) = i^{xz} X^x Z^z:
        #   P(a)P(b) = i^{xa·za + xb·zb + 2·za·xb − xc·zc} P(c).
        g = (
            (self.x_mask & self.z_mask).bit_count()
            + (other.x_mask & other.z_mask).bit_count()
            + 2 * (self.z_mask & other.x_mask).bit_count()
            - (xc & zc).bit_count()
        )
        return _PHASES[g % 4], PauliString(xc, zc)

    def commutes(self, other: "PauliString", mode: str = "full") -> bool:
        """Commutation test under the chosen mode.

        Args:
            mode: ``"full"`` — true iff the number of qubits where both
                strings act with different axes is even (operator-level
                commutation); ``"qubitwise"`` — true iff the axes agree on
                every shared qubit.
        """
        if mode == "full":
            sym = (self.x_mask & other.z_mask).bit_count() + (
                self.z_mask & other.x_mask
            ).bit_count()
            return sym % 2 == 0
        if mode == "qubitwise":
            shared = (self.x_mask | self.z_mask) & (other.x_mask | other.z_mask)
            differ = (self.x_mask ^ other.x_mask) | (self.z_mask ^ other.z_mask)
            return differ & shared == 0
        raise ValueError(f"unknown commutation mode {mode!r}")

    def dense(self, n_qubits: int) -> np.ndarray:
        """Dense ``2^n x 2^n`` matrix of the string (little-endian)."""
        return PauliSum(n_qubits, {self: 1.0}).to_dense()

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.to_label() or "I"


@dataclass(frozen=True)
class CommutingSets:
    """A partition of a term list into internally commuting sets.

    Attributes:
        sets: list of term lists; each term is a ``(PauliString, coeff)``
            pair and appears in exactly one set.
        mode: the commutation mode the partition is valid under.
    """

    sets: tuple[tuple[tuple[PauliString, complex], ...], ...]
    mode: str

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self) -> Iterator[tuple[tuple[PauliString, complex], ...]]:
        return iter(self.sets)


class PauliSum:
    """A weighted sum of Pauli strings on a fixed register width.

    Terms are kept combined and purged: after any arithmetic there is at
    most one entry per string and no coefficient with magnitude at or
    below :data:`PURGE_TOL`.  Instances are immutable; derived data
    (dense matrix spectra) may be cached internally.
    """

    __slots__ = ("_n_qubits", "_terms", "_eig_cache", "_norm_cache")

    def __init__(
        self,
        n_qubits: int,
        terms: Mapping[PauliString, complex]
        | Iterable[tuple[PauliString, complex]] = (),
    ) -> None:
        if n_qubits < 0:
            raise ValueError("register width must be non-negative")
        items = terms.items() if isinstance(terms, Mapping) else terms
        combined: dict[PauliString, complex] = {}
        for string, coeff in items:
            if string.min_width > n_qubits:
                raise ValueError(
                    f"term {string.to_label()!r} exceeds register width {n_qubits}"
                )
            combined[string] = combined.get(string, 0j) + complex(coeff)
        self._n_qubits = n_qubits
        self._terms = {
            s: c for s, c in combined.items() if abs(c) > PURGE_TOL
        }
        self._eig_cache: tuple[np.ndarray, np.ndarray] | None = None
        self._norm_cache: float | None = None

    # ------------------------------------------------------------------
    # basic accessors
    # ------------------------------------------------------------------
    @property
    def n_qubits(self) -> int:
        return self._n_qubits

    def terms(self) -> list[tuple[PauliString, complex]]:
        """Terms in canonical order (identity first)."""
        return sorted(self._terms.items(), key=lambda t: t[0].sort_key())

    def coefficient(self, string: PauliString) -> complex:
        return self._terms.get(string, 0j)

    @property
    def identity_coefficient(self) -> complex:
        return self._terms.get(PauliString(), 0j)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self._n_qubits == other._n_qubits and self._terms == other._terms

    def one_norm(self) -> float:
        """Coefficient 1-norm, an upper bound on the spectral norm."""
        return float(sum(abs(c) for c in self._terms.values()))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------
    def _require_same_width(self, other: "PauliSum") -> None:
        if self._n_qubits != other._n_qubits:
            raise ValueError(
                f"register-width mismatch: {self._n_qubits} vs {other._n_qubits}"
            )

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._require_same_width(other)
        merged = dict(self._terms)
        for s, c in other._terms.items():
            merged[s] = merged.get(s, 0j) + c
        return PauliSum(self._n_qubits, merged)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (other * -1.0)

    def __mul__(self, scalar: complex) -> "PauliSum":
        return PauliSum(
            self._n_qubits, {s: c * scalar for s, c in self._terms.items()}
        )

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        self._require_same_width(other)
        out: dict[PauliString, complex] = {}
        for sa, ca in self._terms.items():
            for sb, cb in other._terms.items():
                phase, prod = sa.multiply(sb)
                out[prod] = out.get(prod, 0j) + ca * cb * phase
        return PauliSum(self._n_qubits, out)

    # ------------------------------------------------------------------
    # dense paths
    # ------------------------------------------------------------------
    def to_dense(self) -> np.ndarray:
        """Dense matrix in the little-endian basis (qubit q = index bit q).

        Raises:
            ValueError: register wider than :data:`DENSE_MATRIX_CAP`.
        """
        if self._n_qubits > DENSE_MATRIX_CAP:
            raise ValueError(
                f"dense matrix limited to {DENSE_MATRIX_CAP} qubits, "
                f"got {self._n_qubits}"
            )
        dim = 1 << self._n_qubits
        idx = np.arange(dim)
        out = np.zeros((dim, dim), dtype=complex)
        for s, c in self._terms.items():
            # P|b> = i^{|x&z|} (-1)^{|z&b|} |b ^ x>
            parity = np.bitwise_count(idx & s.z_mask) & 1
            vals = c * _PHASES[(s.x_mask & s.z_mask).bit_count() % 4] * np.where(
                parity, -1.0, 1.0
            )
            out[idx ^ s.x_mask, idx] += vals
        return out

    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached Hermitian eigendecomposition ``(eigenvalues, vectors)``.

        Raises:
            ValueError: non-Hermitian sum or register beyond the dense cap.
        """
        if self._eig_cache is None:
            if not self.is_hermitian():
                raise ValueError("eigendecomposition requires a Hermitian sum")
            vals, vecs = np.linalg.eigh(self.to_dense())
            self._eig_cache = (vals, vecs)
        return self._eig_cache

    def spectral_norm(self, fallback: bool = False) -> float:
        """Largest singular value (max |eigenvalue| when Hermitian).

        Args:
            fallback: permit the coefficient 1-norm upper bound when the
                register exceeds the dense cap.

        Raises:
            ValueError: register too wide and ``fallback`` not requested.
        """
        if self._norm_cache is None:
            if self._n_qubits > DENSE_MATRIX_CAP:
                if not fallback:
                    raise ValueError(
                        "register too wide for the dense spectral norm; "
                        "pass fallback=True to accept the 1-norm bound"
                    )
                return self.one_norm()
            if self.is_hermitian():
                vals, _ = self.eig()
                self._norm_cache = float(np.max(np.abs(vals))) if len(vals) else 0.0
            else:
                self._norm_cache = float(
                    np.linalg.norm(self.to_dense(), ord=2)
                )
        return self._norm_cache

    # ------------------------------------------------------------------
    # truncation and grouping
    # ------------------------------------------------------------------
    def truncate(self, threshold: float) -> tuple["PauliSum", float]:
        """Drops terms with ``|coefficient| < threshold``.

        Returns:
            ``(truncated sum, dropped weight)`` where the dropped weight is
            the 1-norm of the removed coefficients.

        Raises:
            ValueError: negative threshold.
        """
        if threshold < 0:
            raise ValueError("threshold must be non-negative")
        kept: dict[PauliString, complex] = {}
        dropped = 0.0
        for s, c in self._terms.items():
            if abs(c) < threshold:
                dropped += abs(c)
            else:
                kept[s] = c
        return PauliSum(self._n_qubits, kept), dropped

    def group_commuting(self, mode: str = "full") -> CommutingSets:
        """Partition into commuting sets by greedy largest-first coloring.

        Vertices are the terms in canonical order; edges join pairs that do
        not commute under ``mode``.  Vertices are colored in descending
        degree (ties broken by canonical term order) with the smallest
        color absent from their neighborhood.
        """
        term_list = self.terms()
        n = len(term_list)
        strings = [s for s, _ in term_list]
        neighbors: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if not strings[i].commutes(strings[j], mode):
                    neighbors[i].append(j)
                    neighbors[j].append(i)
        order = sorted(range(n), key=lambda i: (-len(neighbors[i]), i))
        color = [-1] * n
        for v in order:
            used = {color[u] for u in neighbors[v] if color[u] >= 0}
            c = 0
            while c in used:
                c += 1
            color[v] = c
        n_sets = max(color) + 1 if n else 0
        sets: list[list[tuple[PauliString, complex]]] = [[] for _ in range(n_sets)]
        for i, term in enumerate(term_list):
            sets[color[i]].append(term)
        return CommutingSets(tuple(tuple(s) for s in sets), mode)

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_json(self) -> str:
        """Serializes to the Pauli-sum JSON format (lossless round trip)."""
        payload = {
            "n_qubits": self._n_qubits,
            "terms": [
                {"coeff": [c.real, c.imag], "paulis": s.to_label()}
                for s, c in self.terms()
            ],
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PauliSum":
        payload = json.loads(text)
        terms = [
            (PauliString.from_label(t["paulis"]), complex(*t["coeff"]))
            for t in payload["terms"]
        ]
        return cls(int(payload["n_qubits"]), terms)

    def __repr__(self) -> str:  # pragma: no cover - repr convenience
        inner = " + ".join(
            f"({c:.6g})*{s.to_label() or 'I'}" for s, c in self.terms()[:6]
        )
        more = "" if len(self) <= 6 else f" + …({len(self)} terms)"
        return f"PauliSum({self._n_qubits}, {inner}{more})"


# ----------------------------------------------------------------------
# operation-style wrappers
# ----------------------------------------------------------------------
def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Operator product of two strings; see :meth:`PauliString.multiply`."""
    return a.multiply(b)


def commutes(a: PauliString, b: PauliString, mode: str = "full") -> bool:
    """Commutation test; see :meth:`PauliString.commutes`."""
    return a.commutes(b, mode)


def sum_multiply(a: PauliSum, b: PauliSum) -> PauliSum:
    """Operator product of two sums with like terms combined."""
    return a @ b


def truncate(a: PauliSum, threshold: float) -> tuple[PauliSum, float]:
    """Coefficient truncation; see :meth:`PauliSum.truncate`."""
    return a.truncate(threshold)


def group_commuting(a: PauliSum, mode: str = "full") -> CommutingSets:
    """Commuting-set partition; see :meth:`PauliSum.group_commuting`."""
    return a.group_commuting(mode)


def spectral_norm(a: PauliSum, fallback: bool = False) -> float:
    """Spectral norm; see :meth:`PauliSum.spectral_norm`."""
    return a.spectral_norm(fallback)
