"""Imaginary-time propagation emulated through per-term unitary reconstruction.

Each sweep walks the Hamiltonian terms; for every term the non-unitary
factor e^{-dtau h} (normalized) is replaced by e^{-i dtau A} where the
Hermitian generator A = sum_I a_I sigma_I is fit over an operator pool by
a regularized least-squares solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DimensionError, NumericalError, PoolError, ResourceError
from .hamiltonians import Hamiltonian, LocalTerm, energy
from .pauli import OperatorPool, PauliString, POOL_KINDS, enumerate_pool
from .statevector import (
    StateVector,
    _apply_matrix_on_support,
    _parity,
    _string_masks,
    apply_pauli_sum,
    apply_term_exp,
)

B_MODES = ("measurable", "exact_delta0")


@dataclass(frozen=True)
class QiteConfig:
    """Propagation parameters shared by every reconstruction step.

    b_mode 'measurable' assembles the linear system purely from Pauli
    expectation values (first-order norm estimate); 'exact_delta0' targets
    the exactly propagated step state and is the verification path.
    b_norm_factor toggles the 1/sqrt(c) scale inside the measurable b.
    """

    dtau: float = 0.1
    n_steps: int = 50
    domain_size: int = 2
    pool_kind: str = "pauli_full"
    delta: float = 0.0
    pinv_tol: float = 1e-8
    trotter_order: int = 1
    b_mode: str = "measurable"
    b_norm_factor: bool = True
    noise_sigma: float = 0.0
    max_unitary_domain: int = 12

    def validate(self) -> None:
        if self.dtau <= 0:
            raise ConfigError("dtau must be positive")
        if self.n_steps < 0:
            raise ConfigError("n_steps must be non-negative")
        if self.domain_size < 1:
            raise ConfigError("domain_size must be at least 1")
        if self.pool_kind not in POOL_KINDS:
            raise ConfigError(f"unknown pool kind {self.pool_kind!r}")
        if self.trotter_order not in (1, 2):
            raise ConfigError("trotter_order must be 1 or 2")
        if self.b_mode not in B_MODES:
            raise ConfigError(f"unknown b_mode {self.b_mode!r}")
        if self.delta < 0 or self.pinv_tol <= 0 or self.noise_sigma < 0:
            raise ConfigError("delta, pinv_tol and noise_sigma must be sane")


@dataclass
class StepRecord:
    """Diagnostics of one reconstruction step."""

    term_index: int
    dtau: float
    c: float
    coefficients: np.ndarray
    residual: float
    domain: Tuple[int, ...]


@dataclass
class Trajectory:
    """Per-sweep history of one propagation run.

    inv_sq_norms accumulates the squared norm of the unnormalized
    imaginary-time state through the per-step c factors:
    inv_sq_norms[l+1] = inv_sq_norms[l] * prod_m c_m.
    """

    betas: np.ndarray
    energies: np.ndarray
    inv_sq_norms: np.ndarray
    records: List[StepRecord]
    config: QiteConfig
    fidelities: Optional[np.ndarray] = None
    final_state: Optional[StateVector] = None


def choose_domain(
    support: Sequence[int], domain_size: int, n_qubits: int
) -> Tuple[int, ...]:
    """Grow the support to ``domain_size`` qubits along the chain.

    Contiguous supports expand symmetrically (left first), redirecting at
    the chain ends.  Non-contiguous supports grow each contiguous block in
    round-robin order under the same left/right alternation, so a
    long-range pair gains neighborhoods around both endpoints.
    """
    support = tuple(sorted(set(support)))
    if not support:
        raise PoolError("term support is empty")
    if support[0] < 0 or support[-1] >= n_qubits:
        raise DimensionError(f"support {support} outside {n_qubits}-qubit register")
    if domain_size < 1:
        raise PoolError("domain size must be at least 1")
    target = min(n_qubits, max(domain_size, len(support)))
    domain = set(support)
    round_index = 0
    while len(domain) < target:
        added = False
        blocks = _contiguous_blocks(sorted(domain))
        prefer_left = round_index % 2 == 0
        for lo, hi in blocks:
            if len(domain) >= target:
                break
            candidates = [lo - 1, hi + 1] if prefer_left else [hi + 1, lo - 1]
            for q in candidates:
                if 0 <= q < n_qubits and q not in domain:
                    domain.add(q)
                    added = True
                    break
        if not added:
            break
        round_index += 1
    return tuple(sorted(domain))


def _contiguous_blocks(qubits: List[int]) -> List[Tuple[int, int]]:
    blocks = []
    lo = prev = qubits[0]
    for q in qubits[1:]:
        if q == prev + 1:
            prev = q
            continue
        blocks.append((lo, prev))
        lo = prev = q
    blocks.append((lo, prev))
    return blocks


# ---------------------------------------------------------------------------
# per-term precomputation


@dataclass
class _TermPlan:
    index: int
    term: LocalTerm
    domain: Tuple[int, ...]
    strings: List[PauliString]
    unitary_support: Tuple[int, ...]
    gather: np.ndarray  # (P, 2^n) source indices for sigma_I |psi>
    signs: np.ndarray  # (P, 2^n) int8
    iny: np.ndarray  # (P,) i**n_Y phases
    local_gather: np.ndarray  # (P, 2^d) rows of sigma_I on the unitary support
    local_phase: np.ndarray  # (P, 2^d) matrix entries sigma_I[row, col]
    local_cols: np.ndarray  # (2^d,) column indices


def _plan_for_term(
    index: int, term: LocalTerm, config: QiteConfig, n_qubits: int
) -> _TermPlan:
    domain = choose_domain(term.support, config.domain_size, n_qubits)
    strings = enumerate_pool(OperatorPool(config.pool_kind, domain), n_qubits)
    return _build_plan(index, term, domain, strings, n_qubits, config.max_unitary_domain)


def _build_plan(
    index: int,
    term: LocalTerm,
    domain: Tuple[int, ...],
    strings: List[PauliString],
    n_qubits: int,
    max_unitary_domain: int,
) -> _TermPlan:
    support = set(domain)
    for s in strings:
        support.update(s.support)
    support = tuple(sorted(support))
    if len(support) > max_unitary_domain:
        raise ResourceError(
            f"term {index}: unitary support of {len(support)} qubits exceeds "
            f"ceiling {max_unitary_domain}"
        )

    size = 2**n_qubits
    idx = np.arange(size, dtype=np.int64)
    p = len(strings)
    gather = np.empty((p, size), dtype=np.int64)
    signs = np.empty((p, size), dtype=np.int8)
    iny = np.empty(p, dtype=complex)
    for r, s in enumerate(strings):
        xm, yz, ph = _string_masks(s.n_qubits, s.items)
        src = idx ^ xm
        gather[r] = src
        signs[r] = 1 - 2 * _parity(src, yz)
        iny[r] = ph

    # local scatter arrays: dense generator on the unitary support
    pos = {q: j for j, q in enumerate(support)}
    dim = 2 ** len(support)
    cols = np.arange(dim, dtype=np.int64)
    local_gather = np.empty((p, dim), dtype=np.int64)
    local_phase = np.empty((p, dim), dtype=complex)
    for r, s in enumerate(strings):
        local_items = tuple((pos[q], c) for q, c in s.items)
        xm, yz, ph = _string_masks(len(support), local_items)
        local_gather[r] = cols ^ xm
        local_phase[r] = ph * (1 - 2 * _parity(cols, yz))
    return _TermPlan(
        index, term, domain, strings, support, gather, signs, iny,
        local_gather, local_phase, cols,
    )


# ---------------------------------------------------------------------------
# linear system assembly and solves


def _sigma_psi_matrix(plan: _TermPlan, amplitudes: np.ndarray) -> np.ndarray:
    return plan.iny[:, None] * (plan.signs * amplitudes[plan.gather])


def _assemble(
    plan: _TermPlan,
    state: StateVector,
    dtau: float,
    config: QiteConfig,
    rng: Optional[np.random.Generator],
):
    """Return (sigma_psi, bvec, c) for one step; noise perturbs raw values."""
    psi = state.amplitudes
    c_rows = _sigma_psi_matrix(plan, psi)
    noisy = config.noise_sigma > 0
    if noisy and rng is None:
        raise ConfigError("noise_sigma > 0 requires a random generator")

    if config.b_mode == "exact_delta0":
        propagated, c = apply_term_exp(state, plan.term, dtau)
        delta0 = (propagated.amplitudes - psi) / dtau
        raw = (c_rows.conj() @ delta0).imag
        bvec = 2.0 * raw
        if noisy:
            bvec = bvec + rng.normal(0.0, config.noise_sigma, bvec.shape)
    else:
        hpsi = apply_pauli_sum(state, plan.term.pauli_sum)
        h_exp = float(np.vdot(psi, hpsi).real)
        if noisy:
            h_exp += float(rng.normal(0.0, config.noise_sigma))
        c = 1.0 - 2.0 * dtau * h_exp
        if c <= 0.0:
            raise NumericalError(
                f"first-order norm estimate c={c:g} is not positive; reduce dtau"
            )
        raw = (c_rows.conj() @ hpsi).imag
        if noisy:
            raw = raw + rng.normal(0.0, config.noise_sigma, raw.shape)
        bvec = -2.0 * raw
        if config.b_norm_factor:
            bvec = bvec / math.sqrt(c)
    return c_rows, bvec, float(c)


def build_linear_system(
    state: StateVector,
    term: LocalTerm,
    pool: OperatorPool,
    dtau: float,
    config: Optional[QiteConfig] = None,
    rng: Optional[np.random.Generator] = None,
):
    """Dense (Smat, bvec, c) for one reconstruction step over ``pool``.

    Smat is the symmetrized overlap matrix: entry (I, J) equals
    2 Re <psi| sigma_I sigma_J |psi>.  bvec follows the configured b_mode
    and c is the squared-norm factor of the step (first-order estimate in
    measurable mode, exact in exact_delta0 mode).
    """
    config = config or QiteConfig()
    strings = enumerate_pool(pool, state.n_qubits)
    plan = _build_plan(
        0, term, tuple(pool.domain), strings, state.n_qubits, config.max_unitary_domain
    )
    c_rows, bvec, c = _assemble(plan, state, dtau, config, rng)
    smat = 2.0 * (c_rows.conj() @ c_rows.T).real
    if config.noise_sigma > 0:
        draws = rng.normal(0.0, config.noise_sigma, smat.shape)
        smat = smat + np.triu(draws) + np.triu(draws, 1).T
    return smat, bvec, c


def solve_step(
    smat: np.ndarray, bvec: np.ndarray, delta: float = 0.0, pinv_tol: float = 1e-8
):
    """Minimal-norm solve of (Smat + delta I) a = -b via cutoff pseudoinverse.

    pinv_tol is relative to the largest eigenvalue magnitude.  Returns the
    coefficients and the residual norm of the regularized system.
    """
    smat = np.asarray(smat, dtype=float)
    bvec = np.asarray(bvec, dtype=float)
    if smat.shape != (bvec.size, bvec.size):
        raise DimensionError("Smat and bvec sizes are inconsistent")
    regularized = smat + delta * np.eye(bvec.size)
    pinv = np.linalg.pinv(regularized, rcond=pinv_tol, hermitian=True)
    coefficients = pinv @ (-bvec)
    residual = float(np.linalg.norm(regularized @ coefficients + bvec))
    return coefficients, residual


def _solve_factored(
    c_rows: np.ndarray, bvec: np.ndarray, delta: float, pinv_tol: float
):
    """Same solution as solve_step on Smat = 2 Re(C* C^T), without forming it.

    With W = [Re C | Im C] the symmetrized overlap matrix equals 2 W W^T,
    whose eigenvectors are the left singular vectors of W.  b lies in the
    range of W for noiseless assemblies, so null directions never
    contribute.
    """
    w = np.concatenate([c_rows.real, c_rows.imag], axis=1)
    u, sing, _ = np.linalg.svd(w, full_matrices=False)
    lam = 2.0 * sing**2 + delta
    lam_max = float(lam[0]) if lam.size else 0.0
    if lam_max <= 0.0:
        return np.zeros(bvec.size), float(np.linalg.norm(bvec))
    keep = lam >= pinv_tol * lam_max
    u_kept = u[:, keep]
    coefficients = -(u_kept / lam[keep]) @ (u_kept.T @ bvec)
    applied = 2.0 * (w @ (w.T @ coefficients)) + delta * coefficients
    residual = float(np.linalg.norm(applied + bvec))
    return coefficients, residual


# ---------------------------------------------------------------------------
# stepping and sweeping


def _run_step(
    state: StateVector,
    plan: _TermPlan,
    dtau: float,
    config: QiteConfig,
    rng: Optional[np.random.Generator],
) -> Tuple[StateVector, StepRecord]:
    c_rows, bvec, c = _assemble(plan, state, dtau, config, rng)
    if config.noise_sigma > 0:
        smat = 2.0 * (c_rows.conj() @ c_rows.T).real
        draws = rng.normal(0.0, config.noise_sigma, smat.shape)
        smat = smat + np.triu(draws) + np.triu(draws, 1).T
        coefficients, residual = solve_step(smat, bvec, config.delta, config.pinv_tol)
    else:
        coefficients, residual = _solve_factored(
            c_rows, bvec, config.delta, config.pinv_tol
        )
    if not np.all(np.isfinite(coefficients)):
        raise NumericalError(f"term {plan.index}: non-finite expansion coefficients")

    dim = plan.local_cols.size
    generator = np.zeros((dim, dim), dtype=complex)
    np.add.at(
        generator,
        (plan.local_gather, np.broadcast_to(plan.local_cols, plan.local_gather.shape)),
        coefficients[:, None] * plan.local_phase,
    )
    evals, evecs = np.linalg.eigh(generator)
    unitary = (evecs * np.exp(-1j * dtau * evals)) @ evecs.conj().T
    amps = _apply_matrix_on_support(
        state.amplitudes, unitary, plan.unitary_support, state.n_qubits
    )
    amps = amps / np.linalg.norm(amps)
    record = StepRecord(plan.index, dtau, c, coefficients, residual, plan.domain)
    return StateVector(amps, state.n_qubits), record


def qite_step(
    state: StateVector,
    term: LocalTerm,
    config: QiteConfig,
    term_index: int = 0,
    dtau: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[StateVector, StepRecord]:
    """One reconstruction step for a single Hamiltonian term."""
    config.validate()
    plan = _plan_for_term(term_index, term, config, state.n_qubits)
    return _run_step(state, plan, config.dtau if dtau is None else dtau, config, rng)


def _sweep_schedule(n_terms: int, config: QiteConfig) -> List[Tuple[int, float]]:
    if config.trotter_order == 1 or n_terms == 1:
        return [(m, config.dtau) for m in range(n_terms)]
    half = config.dtau / 2.0
    forward = [(m, half) for m in range(n_terms - 1)]
    return forward + [(n_terms - 1, config.dtau)] + forward[::-1]


def qite_evolve(
    state0: StateVector,
    hamiltonian: Hamiltonian,
    config: QiteConfig,
    rng: Optional[np.random.Generator] = None,
    reference: Optional[StateVector] = None,
    on_sweep: Optional[Callable[[int, StateVector], None]] = None,
) -> Trajectory:
    """Run ``config.n_steps`` sweeps and record the per-sweep history.

    When ``reference`` is given a per-sweep fidelity column is recorded;
    ``on_sweep(l, state)`` is invoked after each sweep for observers.
    """
    config.validate()
    if state0.n_qubits != hamiltonian.n_qubits:
        raise DimensionError("state and Hamiltonian widths differ")
    plans = [
        _plan_for_term(m, term, config, hamiltonian.n_qubits)
        for m, term in enumerate(hamiltonian.terms)
    ]
    schedule = _sweep_schedule(len(plans), config)

    state = state0
    energies = [energy(state, hamiltonian)]
    inv_sq_norms = [1.0]
    fidelities = [None] if reference is None else [_fid(state, reference)]
    records: List[StepRecord] = []
    for sweep in range(config.n_steps):
        prod_c = 1.0
        for m, dt in schedule:
            state, record = _run_step(state, plans[m], dt, config, rng)
            prod_c *= record.c
            records.append(record)
        inv_sq_norms.append(inv_sq_norms[-1] * prod_c)
        energies.append(energy(state, hamiltonian))
        if reference is not None:
            fidelities.append(_fid(state, reference))
        if on_sweep is not None:
            on_sweep(sweep + 1, state)
    betas = config.dtau * np.arange(config.n_steps + 1)
    return Trajectory(
        betas=betas,
        energies=np.array(energies),
        inv_sq_norms=np.array(inv_sq_norms),
        records=records,
        config=config,
        fidelities=None if reference is None else np.array(fidelities, dtype=float),
        final_state=state,
    )


def _fid(state: StateVector, reference: StateVector) -> float:
    from .statevector import fidelity

    return fidelity(state, reference)
