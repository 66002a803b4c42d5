import numpy as np
import pytest

from qitekit.analysis import (
    VQE_REFERENCE_COUNTS,
    CostQuery,
    cut_values,
    exact_ground,
    exact_ite,
    exact_ite_energy,
    exact_ite_squared_norm,
    gibbs_average,
    ground_space_fidelity,
    maxcut_success,
    mutual_information,
    qite_measurement_count,
    spectral,
)
from qitekit.errors import DimensionError
from qitekit.hamiltonians import (
    energy,
    heisenberg_1d,
    maxcut,
    maxcut_six_vertex_instance,
    one_qubit_field,
    tfi_1d,
)
from qitekit.statevector import (
    StateVector,
    fidelity,
    from_amplitudes,
    neel_state,
    plus_state,
    product_state,
    zero_state,
)

from conftest import dense_expm_hermitian, dense_hamiltonian, random_real_state


def test_spectral_and_exact_ground():
    h = one_qubit_field(0.6, 0.8)
    dec = spectral(h)
    assert np.allclose(dec.evals, [-1.0, 1.0])
    e0, ground = exact_ground(h)
    assert abs(e0 + 1.0) < 1e-12
    assert abs(energy(ground, h) + 1.0) < 1e-12


def test_exact_ite_matches_dense_propagation(rng):
    h = heisenberg_1d(3, 1.0, 0.15)
    amps = random_real_state(3, rng)
    state = StateVector(amps, 3)
    beta = 0.8
    prop = dense_expm_hermitian(dense_hamiltonian(h), -beta)
    want = prop @ amps
    want = want / np.linalg.norm(want)
    got = exact_ite(state, h, beta)
    # match up to a global phase (both real-positive here, so direct)
    assert abs(abs(np.vdot(got.amplitudes, want)) - 1.0) < 1e-12


def test_exact_ite_composes():
    h = tfi_1d(3, 1.0, 0.7)
    state = plus_state(3)
    one_shot = exact_ite(state, h, 1.3)
    two_step = exact_ite(exact_ite(state, h, 0.5), h, 0.8)
    assert abs(fidelity(one_shot, two_step) - 1.0) < 1e-10


def test_exact_ite_limits():
    h = heisenberg_1d(2)
    state = neel_state(2)
    assert np.allclose(exact_ite(state, h, 0.0).amplitudes, state.amplitudes)
    # beta -> infinity projects onto the ground state reached from |01>
    e0, _ = exact_ground(h)
    assert abs(exact_ite_energy(state, h, 60.0) - e0) < 1e-10
    with pytest.raises(ValueError):
        exact_ite(state, h, -0.1)


def test_exact_ite_energy_consistent_with_state():
    h = heisenberg_1d(3)
    state = neel_state(3)
    for beta in (0.0, 0.3, 1.7):
        via_state = energy(exact_ite(state, h, beta), h)
        assert abs(exact_ite_energy(state, h, beta) - via_state) < 1e-10


def test_exact_ite_energy_monotone_non_increasing():
    h = heisenberg_1d(4)
    state = neel_state(4)
    betas = np.linspace(0.0, 4.0, 41)
    vals = [exact_ite_energy(state, h, b) for b in betas]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_exact_ite_squared_norm():
    # single qubit, H = Z, start |+>: ||e^{-beta Z}|+>||^2 = cosh(2 beta)
    h = one_qubit_field(0.0, 1.0)
    for beta in (0.0, 0.5, 1.25):
        got = exact_ite_squared_norm(product_state("+"), h, beta)
        assert abs(got - np.cosh(2 * beta)) < 1e-10


def test_gibbs_average_one_qubit_closed_form():
    h = one_qubit_field(0.0, 1.0)
    for beta in (0.0, 0.4, 1.0, 3.0):
        assert abs(gibbs_average(h, beta) + np.tanh(beta)) < 1e-12


def test_gibbs_average_monotone_and_observable():
    h = heisenberg_1d(4)
    vals = [gibbs_average(h, b) for b in np.linspace(0, 3, 16)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    # passing the Hamiltonian as the observable reproduces the default
    assert abs(gibbs_average(h, 0.7, observable=h) - gibbs_average(h, 0.7)) < 1e-12
    # infinite-temperature average of H is its trace mean, zero here
    assert abs(gibbs_average(h, 0.0)) < 1e-12
    with pytest.raises(DimensionError):
        gibbs_average(h, 1.0, observable=heisenberg_1d(3))
    with pytest.raises(ValueError):
        gibbs_average(h, -1.0)


def test_ground_space_fidelity_degenerate():
    # maxcut ground space of the triangle graph is 6-fold degenerate
    h = maxcut(3, [(0, 1), (1, 2), (0, 2)])
    cuts = cut_values(h)
    best = cuts.max()
    amps = np.zeros(8)
    amps[np.argmax(cuts == best)] = 1.0
    assert abs(ground_space_fidelity(from_amplitudes(amps), h) - 1.0) < 1e-12
    assert abs(ground_space_fidelity(plus_state(3), h) - 6 / 8) < 1e-12


def test_mutual_information_known_states():
    assert abs(mutual_information(product_state("00"), 0, 1)) < 1e-12
    assert abs(mutual_information(plus_state(2), 0, 1)) < 1e-12
    bell = from_amplitudes([1, 0, 0, 1])
    assert abs(mutual_information(bell, 0, 1) - 2 * np.log(2)) < 1e-10
    ghz = from_amplitudes([1, 0, 0, 0, 0, 0, 0, 1])
    # tracing out the third qubit leaves classical correlation only
    assert abs(mutual_information(ghz, 0, 1) - np.log(2)) < 1e-10
    assert abs(mutual_information(ghz, 1, 0) - np.log(2)) < 1e-10
    with pytest.raises(DimensionError):
        mutual_information(bell, 1, 1)


def test_cut_values_and_success():
    h = maxcut(3, [(0, 1), (1, 2), (0, 2)])
    cuts = cut_values(h)
    assert cuts[0] == 0 and cuts[0b111] == 0
    assert cuts[0b001] == 2  # vertex 0 alone across from 1 and 2
    assert cuts.max() == 2
    state = from_amplitudes(np.eye(8)[0b001])
    assert abs(maxcut_success(state, h) - 1.0) < 1e-12
    assert abs(maxcut_success(zero_state(3), h)) < 1e-12
    assert abs(maxcut_success(plus_state(3), h) - 6 / 8) < 1e-12
    # explicit target overrides the computed optimum
    assert abs(maxcut_success(zero_state(3), h, c_max=0) - 1.0) < 1e-12
    with pytest.raises(DimensionError):
        cut_values(heisenberg_1d(2))


def test_maxcut_six_instance_statistics():
    h = maxcut_six_vertex_instance()
    cuts = cut_values(h)
    assert cuts.max() == 5
    assert int((cuts == 5).sum()) == 6
    assert abs(maxcut_success(plus_state(6), h) - 6 / 64) < 1e-12


def test_measurement_count_goldens():
    cases = [
        (CostQuery(4, 7, 4, False), 12544),
        (CostQuery(4, 7, 4, True), 5880),
        (CostQuery(6, 17, 4, False), 47872),
        (CostQuery(6, 17, 4, True), 22440),
        (CostQuery(6, 8, 4, False), 22528),
        (CostQuery(6, 8, 4, True), 10560),
    ]
    for query, want in cases:
        assert qite_measurement_count(query) == want, query
    with pytest.raises(ValueError):
        qite_measurement_count(CostQuery(0, 1, 2))
    with pytest.raises(ValueError):
        qite_measurement_count(CostQuery(1, 0, 2))


def test_vqe_reference_counts_present():
    assert VQE_REFERENCE_COUNTS[("heisenberg_field", 4)] == 25600
    assert VQE_REFERENCE_COUNTS[("heisenberg_field", 6)] == 403200
    assert VQE_REFERENCE_COUNTS[("tfi", 4)] == 12800
    assert VQE_REFERENCE_COUNTS[("tfi", 6)] == 69360
