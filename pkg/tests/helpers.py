"""Shared dense oracles for the test suite.

Everything here is built independently of the package internals: strings
become matrices through explicit Kronecker products of 2x2 constants, so
package results can be checked against straight linear algebra.
"""

from __future__ import annotations

import numpy as np

from gsee.pauli import PauliString, PauliSum

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
AXIS_MATS = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}


def dense_string(string: PauliString, n_qubits: int) -> np.ndarray:
    """Kronecker-product matrix of a string, little-endian (qubit 0 = LSB)."""
    support = string.support
    out = np.array([[1.0 + 0j]])
    for q in reversed(range(n_qubits)):
        out = np.kron(out, AXIS_MATS[support.get(q, "I")])
    return out


def dense_sum(a: PauliSum) -> np.ndarray:
    dim = 1 << a.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for string, coeff in a.terms():
        out += coeff * dense_string(string, a.n_qubits)
    return out


def random_string(rng: np.random.Generator, n_qubits: int) -> PauliString:
    support = {}
    for q in range(n_qubits):
        axis = rng.choice(["I", "X", "Y", "Z"])
        if axis != "I":
            support[q] = str(axis)
    return PauliString.from_support(support)


def random_sum(
    rng: np.random.Generator,
    n_qubits: int,
    n_terms: int,
    hermitian: bool = True,
) -> PauliSum:
    terms = {}
    while len(terms) < n_terms:
        s = random_string(rng, n_qubits)
        c = rng.normal() if hermitian else rng.normal() + 1j * rng.normal()
        terms[s] = c
    return PauliSum(n_qubits, terms)


def random_state(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return v / np.linalg.norm(v)


def embed_1q(mat: np.ndarray, q: int, n_qubits: int) -> np.ndarray:
    """Single-qubit operator placed at qubit ``q``, little-endian."""
    out = np.array([[1.0 + 0j]])
    for k in reversed(range(n_qubits)):
        out = np.kron(out, mat if k == q else I2)
    return out


def gate_matrix(gate, n_qubits: int) -> np.ndarray:
    """Dense unitary of one gate, built from first principles.

    Exponential kinds go through ``scipy.linalg.expm`` so the simulator
    kernels are checked against an unrelated code path.
    """
    from scipy.linalg import expm

    from gsee.pauli import PauliString

    kind = gate.kind
    if kind == "h":
        return embed_1q((X2 + Z2) / np.sqrt(2.0), gate.qubits[0], n_qubits)
    if kind == "sdg":
        return embed_1q(np.diag([1.0, -1j]), gate.qubits[0], n_qubits)
    if kind == "rx":
        string = PauliString.from_support({gate.qubits[0]: "X"})
    elif kind == "rz":
        string = PauliString.from_support({gate.qubits[0]: "Z"})
    elif kind == "zzphase":
        string = PauliString.from_support({q: "Z" for q in gate.qubits})
    else:
        string = gate.pauli
    u = expm(-0.5j * gate.angle * dense_string(string, n_qubits))
    if kind == "cpauliexp":
        control = gate.qubits[0]
        p0 = embed_1q(np.diag([1.0 + 0j, 0.0]), control, n_qubits)
        p1 = embed_1q(np.diag([0.0, 1.0 + 0j]), control, n_qubits)
        return p0 + u @ p1
    return u


def circuit_unitary(circuit) -> np.ndarray:
    """Product of dense gate matrices; requires a fully bound circuit."""
    dim = 1 << circuit.n_qubits
    out = np.eye(dim, dtype=complex)
    for gate in circuit.gates:
        out = gate_matrix(gate, circuit.n_qubits) @ out
    return out
