"""Generator assembly, propagation and two-time correlators.

Oracles are independent of the modal route: direct matrix exponentials,
analytic decay laws, and the column-stacking identity itself.
"""

import numpy as np
import pytest
import scipy.linalg

from nvcavity.dynamics import (
    CollapseChannel,
    CorrelatorGrid,
    DensityOperator,
    HilbertSpace,
    ModalDecomposition,
    NumericsError,
    Operator,
    basis_state,
    build_liouvillian,
    evolve,
    expectation,
    identity_operator,
    lowering_operator,
    number_operator,
    projector,
    subsystem_operator,
    transition_operator,
    two_time_correlator,
    unvectorize,
    vectorize,
)


def _random_model(rng, dims=(2, 2)):
    """Random Hermitian H plus two random collapse channels."""
    space = HilbertSpace(dims)
    d = space.total_dim
    raw = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = Operator((raw + raw.conj().T) / 2.0, space)
    channels = []
    for _ in range(2):
        raw = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        channels.append(CollapseChannel(float(rng.uniform(0.1, 2.0)), Operator(raw, space)))
    return space, h, channels


def _random_density(rng, space):
    d = space.total_dim
    raw = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    mat = raw @ raw.conj().T
    return DensityOperator(mat / np.trace(mat).real, space)


def test_vectorize_round_trip_and_kron_identity():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose(unvectorize(vectorize(x), 3), x)
    # column stacking: vec(A X B) = kron(B.T, A) vec(X)
    lhs = vectorize(a @ x @ b)
    rhs = np.kron(b.T, a) @ vectorize(x)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_space_and_operator_validation():
    with pytest.raises(ValueError):
        HilbertSpace(())
    with pytest.raises(ValueError):
        HilbertSpace((0, 2))
    with pytest.raises(ValueError):
        HilbertSpace((65,))  # exceeds the dense-superoperator budget
    space = HilbertSpace((2, 3))
    with pytest.raises(ValueError):
        Operator(np.eye(4), space)
    with pytest.raises(ValueError):
        subsystem_operator(space, 2, np.eye(2))
    with pytest.raises(ValueError):
        subsystem_operator(space, 0, np.eye(3))


def test_basis_state_indexing():
    space = HilbertSpace((2, 3))
    rho = basis_state(space, (1, 2))
    n = number_operator(space, 1)
    assert expectation(n, rho) == pytest.approx(2.0)
    assert expectation(projector(space, 0, 1), rho) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        basis_state(space, (1,))
    with pytest.raises(ValueError):
        basis_state(space, (2, 0))


def test_density_operator_validation():
    space = HilbertSpace((2,))
    with pytest.raises(ValueError):
        DensityOperator(np.array([[1.0, 0.5], [0.0, 0.0]]), space)  # not Hermitian
    with pytest.raises(ValueError):
        DensityOperator(np.eye(2), space)  # trace 2
    with pytest.raises(ValueError):
        DensityOperator(np.diag([1.5, -0.5]), space)  # negative eigenvalue


def test_liouvillian_rejects_non_hermitian_hamiltonian():
    space = HilbertSpace((2,))
    h = Operator(np.array([[0.0, 1.0], [0.0, 0.0]]), space)
    with pytest.raises(ValueError):
        build_liouvillian(h, [])


def test_liouvillian_preserves_trace():
    # the row functional Tr[.] is a left null vector of any Lindblad generator
    rng = np.random.default_rng(5)
    space, h, channels = _random_model(rng)
    gen = build_liouvillian(h, channels)
    trace_row = vectorize(np.eye(space.total_dim))
    assert np.max(np.abs(trace_row @ gen.matrix)) < 1e-10 * np.max(np.abs(gen.matrix))


def test_evolve_matches_matrix_exponential():
    rng = np.random.default_rng(7)
    space, h, channels = _random_model(rng)
    gen = build_liouvillian(h, channels)
    rho0 = _random_density(rng, space)
    for t in (0.0, 0.3, 1.7):
        expected = unvectorize(
            scipy.linalg.expm(gen.matrix * t) @ vectorize(rho0.matrix), space.total_dim
        )
        got = evolve(gen, rho0, t).matrix
        assert np.max(np.abs(got - expected)) < 1e-10


def test_evolve_rejects_negative_time():
    space = HilbertSpace((2,))
    gen = build_liouvillian(Operator(np.zeros((2, 2)), space), [])
    rho = basis_state(space, (1,))
    with pytest.raises(ValueError):
        evolve(gen, rho, -1.0)


def test_two_level_decay_analytic():
    gamma = 2.0
    space = HilbertSpace((2,))
    sigma = transition_operator(space, 0, 0, 1)
    gen = build_liouvillian(
        Operator(np.zeros((2, 2)), space), [CollapseChannel(gamma, sigma)]
    )
    rho0 = basis_state(space, (1,))
    p_e = projector(space, 0, 1)
    for t in (0.1, 0.5, 2.0):
        pop = expectation(p_e, evolve(gen, rho0, t)).real
        assert pop == pytest.approx(np.exp(-gamma * t), abs=1e-12)


def test_correlator_tau_zero_column_is_exact():
    rng = np.random.default_rng(13)
    space, h, channels = _random_model(rng)
    gen = build_liouvillian(h, channels)
    rho0 = _random_density(rng, space)
    a_op = lowering_operator(space, 1)
    t_axis = np.linspace(0.0, 2.0, 9)
    tau_axis = np.linspace(0.0, 1.0, 5)
    grid = two_time_correlator(gen, rho0, a_op.dagger(), a_op, t_axis, tau_axis)
    for i, t in enumerate(t_axis):
        rho_t = evolve(gen, rho0, t)
        direct = expectation(a_op.dagger() @ a_op, rho_t)
        assert abs(grid.values[i, 0] - direct) < 1e-9


def test_correlator_matches_brute_force_regression():
    # quantum regression: G(t, tau) = Tr[A e^{L tau}(B rho(t))]
    rng = np.random.default_rng(17)
    space, h, channels = _random_model(rng)
    gen = build_liouvillian(h, channels)
    rho0 = _random_density(rng, space)
    a_op = lowering_operator(space, 1)
    t_axis = np.array([0.0, 0.4, 1.1])
    tau_axis = np.array([0.0, 0.2, 0.9])
    grid = two_time_correlator(gen, rho0, a_op.dagger(), a_op, t_axis, tau_axis)
    d = space.total_dim
    for i, t in enumerate(t_axis):
        rho_t = unvectorize(
            scipy.linalg.expm(gen.matrix * t) @ vectorize(rho0.matrix), d
        )
        seeded = a_op.matrix @ rho_t
        for j, tau in enumerate(tau_axis):
            propagated = unvectorize(
                scipy.linalg.expm(gen.matrix * tau) @ vectorize(seeded), d
            )
            direct = np.trace(a_op.dagger().matrix @ propagated)
            assert abs(grid.values[i, j] - direct) < 1e-9


def test_correlator_grid_validation():
    t = np.linspace(0.0, 1.0, 4)
    with pytest.raises(ValueError):
        CorrelatorGrid(t, t[::-1], np.zeros((4, 4)))
    with pytest.raises(ValueError):
        CorrelatorGrid(t, t, np.zeros((3, 4)))
    with pytest.raises(ValueError):
        CorrelatorGrid(np.array([-1.0, 0.0]), t, np.zeros((2, 4)))


def test_modal_guards():
    # Jordan block: defective eigenbasis must be flagged as ill conditioned
    modal = ModalDecomposition.from_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert not modal.well_conditioned
    # weight on a zero eigenvalue makes the infinite-horizon integral diverge
    modal = ModalDecomposition.from_matrix(np.diag([0.0, -1.0]).astype(complex))
    with pytest.raises(NumericsError):
        modal.integrated_weights(np.array([1.0, 1.0]))
    val = modal.integrated_weights(np.array([0.0, 3.0]))
    assert val == pytest.approx(3.0)


def test_identity_operator_neutral():
    space = HilbertSpace((2, 2))
    eye = identity_operator(space)
    a_op = lowering_operator(space, 1)
    assert np.allclose((eye @ a_op).matrix, a_op.matrix)
