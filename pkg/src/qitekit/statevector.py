"""Exact statevector representation and the dense kernels built on it.

Amplitude indexing convention: qubit 0 is the least significant bit of
the array index, so basis label strings are written qubit 0 first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .errors import DimensionError, ResourceError
from .pauli import PauliString

DEFAULT_MAX_QUBITS = 14
DEFAULT_MAX_UNITARY_DOMAIN = 12
DEFAULT_MAX_RDM_QUBITS = 8

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
}

_BASIS_VECTORS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
}


@dataclass
class StateVector:
    """Pure state on ``n_qubits`` qubits as a dense complex amplitude array."""

    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise DimensionError(
                f"amplitude array of shape {self.amplitudes.shape} does not match "
                f"{self.n_qubits} qubits"
            )
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > 1e-12:
            raise DimensionError(f"state norm {norm!r} is not 1 within 1e-12")

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.n_qubits)


@dataclass
class DensityMatrix:
    """Reduced density matrix on the listed qubits (ascending order)."""

    matrix: np.ndarray
    qubits: Tuple[int, ...]


def _check_register(n_qubits: int, max_qubits: int) -> None:
    if n_qubits < 1:
        raise DimensionError("need at least one qubit")
    if n_qubits > max_qubits:
        raise ResourceError(
            f"{n_qubits} qubits exceeds the configured ceiling of {max_qubits}"
        )


def zero_state(n_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    _check_register(n_qubits, max_qubits)
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(amps, n_qubits)


def product_state(label: str, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Product state from a per-qubit label over {0, 1, +, -}, qubit 0 first."""
    n = len(label)
    _check_register(n, max_qubits)
    amps = np.array([1.0 + 0j])
    for ch in reversed(label):  # highest qubit becomes the outer kron factor
        if ch not in _BASIS_VECTORS:
            raise ValueError(f"unknown basis label character {ch!r}")
        amps = np.kron(amps, _BASIS_VECTORS[ch])
    return StateVector(amps, n)


def neel_state(n_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    return product_state("01" * (n_qubits // 2) + "0" * (n_qubits % 2), max_qubits)


def plus_state(n_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    return product_state("+" * n_qubits, max_qubits)


def singlet_dimer_state(
    n_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS
) -> StateVector:
    """Product of two-qubit singlets on pairs (0,1), (2,3), ...

    A total-spin-zero valence-bond trial state; useful as a fast-converging
    start for antiferromagnets whose ground state is a global singlet.
    """
    if n_qubits % 2:
        raise ValueError("singlet dimer state needs an even qubit count")
    _check_register(n_qubits, max_qubits)
    singlet = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0)
    amps = np.array([1.0])
    for _ in range(n_qubits // 2):
        amps = np.kron(singlet, amps)  # earlier pairs stay least significant
    return StateVector(amps.astype(complex), n_qubits)


def from_amplitudes(amplitudes: Sequence[complex]) -> StateVector:
    amps = np.asarray(amplitudes, dtype=complex)
    n = int(round(np.log2(amps.size)))
    if 2**n != amps.size:
        raise DimensionError(f"amplitude array length {amps.size} is not a power of 2")
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise DimensionError("cannot normalize the zero vector")
    return StateVector(amps / norm, n)


# ---------------------------------------------------------------------------
# Pauli application and expectation values


@lru_cache(maxsize=4096)
def _string_masks(n_qubits: int, items: Tuple[Tuple[int, str], ...]):
    xmask = 0
    yzmask = 0
    n_y = 0
    for qubit, letter in items:
        if letter in ("X", "Y"):
            xmask |= 1 << qubit
        if letter in ("Y", "Z"):
            yzmask |= 1 << qubit
        if letter == "Y":
            n_y += 1
    return xmask, yzmask, (1j) ** n_y


def _parity(indices: np.ndarray, mask: int) -> np.ndarray:
    out = np.zeros(indices.shape, dtype=np.int64)
    bit = 0
    while mask >> bit:
        if (mask >> bit) & 1:
            out ^= (indices >> bit) & 1
        bit += 1
    return out


def apply_pauli(state: StateVector, string: PauliString) -> StateVector:
    """Return sigma |psi> (norm preserved, phase kept)."""
    if string.n_qubits != state.n_qubits:
        raise DimensionError("Pauli string and state widths differ")
    xmask, yzmask, phase = _string_masks(string.n_qubits, string.items)
    idx = np.arange(state.amplitudes.size)
    src = idx ^ xmask
    signs = 1 - 2 * _parity(src, yzmask)
    return StateVector(phase * signs * state.amplitudes[src], state.n_qubits)


def expectation(state: StateVector, string: PauliString) -> float:
    """<psi| sigma |psi>, real because the string is Hermitian."""
    val = np.vdot(state.amplitudes, apply_pauli(state, string).amplitudes)
    return float(val.real)


def apply_pauli_sum(state: StateVector, pauli_sum) -> np.ndarray:
    """Unnormalized amplitudes of (sum_i c_i sigma_i) |psi>."""
    out = np.zeros_like(state.amplitudes)
    for coeff, string in pauli_sum:
        out += coeff * apply_pauli(state, string).amplitudes
    return out


def expectation_sum(state: StateVector, pauli_sum) -> float:
    return float(np.vdot(state.amplitudes, apply_pauli_sum(state, pauli_sum)).real)


def inner_product(a: StateVector, b: StateVector) -> complex:
    if a.n_qubits != b.n_qubits:
        raise DimensionError("inner product of states with different widths")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return float(abs(inner_product(a, b)) ** 2)


# ---------------------------------------------------------------------------
# dense operators on a small support


def dense_on_support(pauli_sum, support: Tuple[int, ...]) -> np.ndarray:
    """Dense 2^k x 2^k matrix of a Pauli sum on ``support`` (ascending order).

    Local bit j of the matrix index corresponds to support[j], matching the
    global least-significant-bit-first convention.
    """
    support = tuple(support)
    dim = 2 ** len(support)
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, string in pauli_sum:
        missing = set(string.support) - set(support)
        if missing:
            raise DimensionError(f"string acts outside support: qubits {sorted(missing)}")
        mat = np.array([[1.0 + 0j]])
        for q in sorted(support, reverse=True):
            mat = np.kron(mat, _SINGLE[string.letter(q)])
        out += coeff * mat
    return out


def _apply_matrix_on_support(
    amps: np.ndarray, mat: np.ndarray, support: Tuple[int, ...], n_qubits: int
) -> np.ndarray:
    k = len(support)
    tensor = amps.reshape((2,) * n_qubits)
    # tensor axis of qubit q is n-1-q; most significant local bit first
    moved = [n_qubits - 1 - q for q in sorted(support, reverse=True)]
    tensor = np.moveaxis(tensor, moved, range(k))
    shaped = tensor.reshape(2**k, -1)
    shaped = mat @ shaped
    tensor = shaped.reshape((2,) * n_qubits)
    tensor = np.moveaxis(tensor, range(k), moved)
    return tensor.reshape(-1)


@lru_cache(maxsize=512)
def _hermitian_eig(pauli_sum, support):
    mat = dense_on_support(pauli_sum, support)
    evals, evecs = np.linalg.eigh(mat)
    return evals, evecs


def _term_parts(term):
    """Accept a LocalTerm-like object or a raw (coeff, string) sequence."""
    pauli_sum = getattr(term, "pauli_sum", term)
    pauli_sum = tuple((float(c), s) for c, s in pauli_sum)
    support = set()
    for _, s in pauli_sum:
        support.update(s.support)
    return pauli_sum, tuple(sorted(support))


def apply_term_exp(state: StateVector, term, dtau: float):
    """Normalized e^{-dtau h} |psi> together with the exact squared norm c.

    c equals <psi| e^{-2 dtau h} |psi>; for small dtau it approaches
    1 - 2 dtau <h> quadratically.
    """
    pauli_sum, support = _term_parts(term)
    if not support:  # pure identity term: only the norm changes
        shift = sum(c for c, _ in pauli_sum)
        return state.copy(), float(np.exp(-2.0 * dtau * shift))
    evals, evecs = _hermitian_eig(pauli_sum, support)
    weights = np.exp(-dtau * evals)
    mat = (evecs * weights) @ evecs.conj().T
    amps = _apply_matrix_on_support(state.amplitudes, mat, support, state.n_qubits)
    c = float(np.vdot(amps, amps).real)
    return StateVector(amps / np.sqrt(c), state.n_qubits), c


def apply_domain_unitary(
    state: StateVector,
    coefficients: Sequence[float],
    strings: Sequence[PauliString],
    dtau: float,
    max_domain: int = DEFAULT_MAX_UNITARY_DOMAIN,
) -> StateVector:
    """Apply e^{-i dtau A} with A = sum_I a_I sigma_I (a_I real)."""
    if len(coefficients) != len(strings):
        raise DimensionError("coefficient and string counts differ")
    support = set()
    for s in strings:
        if s.n_qubits != state.n_qubits:
            raise DimensionError("pool string width differs from state")
        support.update(s.support)
    identity_weight = sum(
        float(a) for a, s in zip(coefficients, strings) if s.is_identity
    )
    phase = np.exp(-1j * dtau * identity_weight)
    if not support:
        return StateVector(phase * state.amplitudes, state.n_qubits)
    if len(support) > max_domain:
        raise ResourceError(
            f"unitary domain of {len(support)} qubits exceeds ceiling {max_domain}"
        )
    support = tuple(sorted(support))
    gen = dense_on_support(
        [(a, s) for a, s in zip(coefficients, strings) if not s.is_identity], support
    )
    evals, evecs = np.linalg.eigh(gen)
    unitary = (evecs * np.exp(-1j * dtau * evals)) @ evecs.conj().T
    amps = phase * _apply_matrix_on_support(
        state.amplitudes, unitary, support, state.n_qubits
    )
    amps = amps / np.linalg.norm(amps)  # guard against accumulated roundoff
    return StateVector(amps, state.n_qubits)


# ---------------------------------------------------------------------------
# reduced density matrices and projective measurement


def reduced_density_matrix(
    state: StateVector,
    qubits: Sequence[int],
    max_qubits: int = DEFAULT_MAX_RDM_QUBITS,
) -> DensityMatrix:
    qubits = tuple(qubits)
    if not qubits or any(q2 <= q1 for q1, q2 in zip(qubits, qubits[1:])):
        raise DimensionError("qubits must be a non-empty strictly increasing tuple")
    if qubits[0] < 0 or qubits[-1] >= state.n_qubits:
        raise DimensionError(f"qubits {qubits} outside register")
    if len(qubits) > max_qubits:
        raise ResourceError(
            f"reduced density matrix on {len(qubits)} qubits exceeds ceiling {max_qubits}"
        )
    k = len(qubits)
    tensor = state.amplitudes.reshape((2,) * state.n_qubits)
    moved = [state.n_qubits - 1 - q for q in sorted(qubits, reverse=True)]
    tensor = np.moveaxis(tensor, moved, range(k))
    shaped = tensor.reshape(2**k, -1)
    rho = shaped @ shaped.conj().T
    return DensityMatrix(rho, qubits)


def measure_collapse(state: StateVector, bases: Sequence[str], rng: np.random.Generator):
    """Projectively measure every qubit, each in basis 'Z' or 'X'.

    Returns (label, collapsed_state).  Label characters are 0/1 for Z-basis
    qubits and +/- for X-basis qubits, qubit 0 first; the collapsed state is
    exactly the corresponding product state.
    """
    bases = list(bases)
    if len(bases) != state.n_qubits:
        raise DimensionError("need one measurement basis per qubit")
    amps = state.amplitudes
    for q, basis in enumerate(bases):
        if basis == "X":
            amps = _apply_matrix_on_support(amps, _SINGLE["H"], (q,), state.n_qubits)
        elif basis != "Z":
            raise ValueError(f"unsupported measurement basis {basis!r}")
    probs = np.abs(amps) ** 2
    probs = probs / probs.sum()
    outcome = int(rng.choice(probs.size, p=probs))
    chars = []
    for q, basis in enumerate(bases):
        bit = (outcome >> q) & 1
        chars.append(("-" if bit else "+") if basis == "X" else ("1" if bit else "0"))
    label = "".join(chars)
    return label, product_state(label, max_qubits=state.n_qubits)
