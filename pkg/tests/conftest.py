"""Shared dense-matrix oracles built independently of the package internals.

Everything here goes through explicit numpy kron chains so that package
results are checked against a second implementation, not against
themselves.
"""

import numpy as np
import pytest

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_string(letters, n_qubits):
    """Dense matrix of a Pauli string given {qubit: letter}; qubit 0 is the LSB."""
    mat = np.array([[1.0 + 0j]])
    for q in reversed(range(n_qubits)):
        mat = np.kron(mat, PAULI[letters.get(q, "I")])
    return mat


def dense_pauli_string(string):
    return dense_string(dict(string.items), string.n_qubits)


def dense_local_term(term, n_qubits):
    """Embed a LocalTerm's weighted Pauli sum into the full register."""
    dim = 2 ** n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    for coeff, string in term.pauli_sum:
        mat += coeff * dense_pauli_string(string)
    return mat


def dense_hamiltonian(hamiltonian):
    dim = 2 ** hamiltonian.n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    for term in hamiltonian.terms:
        mat += dense_local_term(term, hamiltonian.n_qubits)
    return mat + hamiltonian.offset * np.eye(dim)


def dense_expm_hermitian(mat, scale):
    """expm(scale * mat) for Hermitian mat via eigendecomposition."""
    w, v = np.linalg.eigh(mat)
    return (v * np.exp(scale * w)) @ v.conj().T


def random_state(n_qubits, rng):
    amps = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
    return amps / np.linalg.norm(amps)


def random_real_state(n_qubits, rng):
    amps = rng.normal(size=2 ** n_qubits)
    return (amps / np.linalg.norm(amps)).astype(complex)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
