import numpy as np
import pytest

from qanogan.enums import CircuitKind, GateKind, RotationAxis
from qanogan.exceptions import InvalidArgumentError
from qanogan.qsim import (
    AnsatzLayout,
    BasisAssignment,
    GateOp,
    QubitState,
    ShotSample,
    apply_circuit,
    build_ansatz,
    circuit_expectations,
    expect_z_analytic,
    expect_z_from_sample,
    grad_g_q_forward_diff,
    grad_g_q_param_shift,
    identity_block_init,
    jacobian_forward_diff,
    jacobian_param_shift,
    prepare_latent_state,
    random_init,
    sample_bitstrings,
)
from qanogan.qsim.gradients import WRT_LATENT

H = 1e-4
PAULI = {
    RotationAxis.X: np.array([[0, 1], [1, 0]], dtype=complex),
    RotationAxis.Y: np.array([[0, -1j], [1j, 0]]),
    RotationAxis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_rotation(axis, angle):
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * PAULI[axis]


def embed(matrix, qubit, n):
    full = np.eye(1)
    for q in range(n):
        full = np.kron(full, matrix if q == qubit else np.eye(2))
    return full


def dense_cnot(control, target, n):
    size = 2 ** n
    out = np.zeros((size, size))
    for index in range(size):
        bits = [(index >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        out[int("".join(map(str, bits)), 2), index] = 1
    return out


def dense_unitary(layout, bases, theta):
    n = layout.n_qubits
    unitary = np.eye(2 ** n, dtype=complex)
    for gate in layout.gates:
        if gate.kind == GateKind.CNOT:
            step = dense_cnot(gate.control, gate.target, n)
        else:
            step = embed(dense_rotation(bases.axes[gate.param_slot], theta[gate.param_slot]),
                         gate.target, n)
        unitary = step @ unitary
    return unitary


def random_state(rng, n):
    amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return QubitState(n, amps / np.linalg.norm(amps))


def single_rx():
    layout = AnsatzLayout(1, 1, (GateOp(GateKind.RX, 0, param_slot=0),), 1)
    return layout, BasisAssignment((RotationAxis.X,))


class TestQubitState:
    @pytest.mark.parametrize("amplitudes", [[2.0, 0.0], [0.0, 0.0], [1.0, 1e-4]])
    def test_rejects_unnormalized(self, amplitudes):
        with pytest.raises(InvalidArgumentError):
            QubitState(1, amplitudes)

    def test_accepts_rounding_error(self):
        state = QubitState(1, [np.sqrt(1 + 1e-12), 0.0])
        assert -1 <= expect_z_analytic(state)[0] <= 1 + 1e-10


class TestStatePreparation:
    def test_zero_angles_leave_ground_state(self):
        np.testing.assert_allclose(expect_z_analytic(prepare_latent_state([0, 0])), [1, 1])

    def test_pi_flips_qubit(self):
        np.testing.assert_allclose(
            expect_z_analytic(prepare_latent_state([np.pi, 0])), [-1, 1], atol=1e-12
        )

    def test_half_pi_gives_zero_expectation(self):
        assert abs(expect_z_analytic(prepare_latent_state([np.pi / 2]))[0]) < 1e-10

    def test_invalid_latents(self):
        with pytest.raises(InvalidArgumentError):
            prepare_latent_state(np.zeros((2, 2)))
        with pytest.raises(InvalidArgumentError):
            prepare_latent_state([np.nan])


class TestApplyCircuit:
    def test_zero_angles_are_identity(self, rng):
        layout, bases = build_ansatz(CircuitKind.C4, 3, 2, rng_seed=0)
        state = random_state(rng, 3)
        out = apply_circuit(state, layout, bases, np.zeros(layout.n_params))
        np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-12)

    def test_cnot_truth_table(self):
        layout = AnsatzLayout(2, 1, (GateOp(GateKind.CNOT, target=1, control=0),), 0)
        state = QubitState(2, [0, 0, 1, 0])
        out = apply_circuit(state, layout, BasisAssignment(()), [])
        np.testing.assert_allclose(out.amplitudes, [0, 0, 0, 1])

    @pytest.mark.parametrize("kind", list(CircuitKind))
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_dense_unitary(self, rng, kind, n):
        layout, bases = build_ansatz(kind, n, 2, rng_seed=n)
        theta = rng.uniform(-np.pi, np.pi, layout.n_params)
        state = random_state(rng, n)
        expected = dense_unitary(layout, bases, theta) @ state.amplitudes
        out = apply_circuit(state, layout, bases, theta)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-9)

    def test_norm_conserved(self, rng):
        for trial in range(100):
            kind = list(CircuitKind)[trial % 4]
            n = 1 + trial % 4
            layout, bases = build_ansatz(kind, n, 1 + trial % 3, rng_seed=trial)
            out = apply_circuit(random_state(rng, n), layout, bases, random_init(layout, trial))
            assert abs(out.norm() - 1.0) < 1e-10

    def test_parameter_count_mismatch(self):
        layout, bases = build_ansatz(CircuitKind.C1, 2, 1, rng_seed=0)
        with pytest.raises(InvalidArgumentError):
            apply_circuit(QubitState.zero(2), layout, bases, [0.1])


class TestBuildAnsatz:
    def test_c4_has_no_entanglers(self):
        layout, _ = build_ansatz(CircuitKind.C4, 4, 3, rng_seed=1)
        assert layout.n_params == 12
        assert layout.n_cnots == 0

    def test_c3_full_rotations(self):
        layout, bases = build_ansatz(CircuitKind.C3, 3, 2, rng_seed=1)
        assert layout.n_params == 18
        assert bases.names() == ["X", "Y", "Z"] * 6

    def test_c1_chain(self):
        layout, _ = build_ansatz(CircuitKind.C1, 3, 2, rng_seed=1)
        assert layout.n_params == 6
        assert layout.n_cnots == 4

    def test_c2_reversed_chain(self):
        layout, _ = build_ansatz(CircuitKind.C2, 3, 1, rng_seed=1)
        cnots = [(g.control, g.target) for g in layout.gates if g.kind == GateKind.CNOT]
        assert cnots == [(2, 1), (1, 0)]

    def test_pure_in_arguments(self):
        first = build_ansatz(CircuitKind.C1, 4, 3, rng_seed=5)
        second = build_ansatz(CircuitKind.C1, 4, 3, rng_seed=5)
        assert first == second

    def test_unknown_kind(self):
        with pytest.raises(InvalidArgumentError):
            build_ansatz("C5", 2, 1, rng_seed=0)

    def test_rejects_empty_circuits(self):
        with pytest.raises(InvalidArgumentError):
            build_ansatz(CircuitKind.C1, 0, 1, rng_seed=0)


class TestExpectations:
    def test_ground_state(self):
        np.testing.assert_allclose(expect_z_analytic(QubitState.zero(3)), [1, 1, 1])

    def test_uniform_superposition(self):
        state = prepare_latent_state(np.full(3, np.pi / 2))
        np.testing.assert_allclose(expect_z_analytic(state), 0, atol=1e-10)

    def test_matches_definition(self, rng):
        state = random_state(rng, 3)
        expected = np.zeros(3)
        for x, amp in enumerate(state.amplitudes):
            for i in range(3):
                bit = (x >> (2 - i)) & 1
                expected[i] += (-1) ** bit * abs(amp) ** 2
        np.testing.assert_allclose(expect_z_analytic(state), expected, atol=1e-12)


class TestSampling:
    def test_deterministic_state(self, rng):
        sample = sample_bitstrings(QubitState(2, [0, 0, 0, 1]), 100, rng)
        assert (sample.bitstrings == 1).all()

    def test_single_shot(self, rng):
        sample = sample_bitstrings(QubitState.zero(1), 1, rng)
        assert sample.bitstrings.tolist() == [[0]]

    def test_balanced_state(self, rng):
        sample = sample_bitstrings(prepare_latent_state([np.pi / 2]), 10000, rng)
        assert 0.47 <= sample.bitstrings.mean() <= 0.53

    def test_zero_shots(self, rng):
        with pytest.raises(InvalidArgumentError):
            sample_bitstrings(QubitState.zero(1), 0, rng)

    def test_seeded(self):
        state = prepare_latent_state([1.0, 2.0])
        a = sample_bitstrings(state, 50, np.random.default_rng(3))
        b = sample_bitstrings(state, 50, np.random.default_rng(3))
        np.testing.assert_array_equal(a.bitstrings, b.bitstrings)

    @pytest.mark.parametrize(
        "strings, expected",
        [(["00", "00"], [1, 1]), (["01", "10"], [0, 0]), (["0", "0", "1", "1", "1"], [-0.2])],
    )
    def test_expectations_from_sample(self, strings, expected):
        np.testing.assert_allclose(expect_z_from_sample(ShotSample.from_strings(strings)), expected)

    def test_empty_sample(self):
        with pytest.raises(InvalidArgumentError):
            expect_z_from_sample(ShotSample(np.zeros((0, 2), dtype=np.uint8)))

    @pytest.mark.parametrize("shots", [100, 10000])
    def test_sampled_expectations_converge(self, rng, shots):
        errors = []
        for seed in range(20):
            layout, bases = build_ansatz(CircuitKind.C1, 3, 2, rng_seed=seed)
            theta = random_init(layout, seed)
            z = rng.uniform(-np.pi, np.pi, (1, 3))
            analytic = circuit_expectations(layout, bases, theta, z)
            sampled = circuit_expectations(layout, bases, theta, z, shots=shots, rng=rng)
            errors.append(np.abs(sampled - analytic).mean())
        assert np.mean(errors) < 5 / np.sqrt(shots)


class TestGradients:
    def test_forward_diff_flat_at_zero(self):
        layout, bases = single_rx()
        assert abs(grad_g_q_forward_diff(layout, bases, [0.0], [0.0], h=H)[0, 0]) < 10 * H

    def test_forward_diff_slope(self):
        layout, bases = single_rx()
        grad = grad_g_q_forward_diff(layout, bases, [np.pi / 3], [0.0], h=H)
        assert abs(grad[0, 0] + np.sin(np.pi / 3)) < 5 * H

    def test_forward_diff_rejects_bad_step(self):
        layout, bases = single_rx()
        with pytest.raises(InvalidArgumentError):
            grad_g_q_forward_diff(layout, bases, [0.0], [0.0], h=0.0)

    def test_param_shift_is_exact(self):
        layout, bases = single_rx()
        grad = grad_g_q_param_shift(layout, bases, [np.pi / 3], [0.0])
        assert abs(grad[0, 0] + np.sin(np.pi / 3)) < 1e-10
        assert abs(grad_g_q_param_shift(layout, bases, [0.0], [0.0])[0, 0]) < 1e-10

    def test_forward_diff_against_central_difference(self, rng):
        layout, bases = build_ansatz(CircuitKind.C1, 2, 2, rng_seed=3)
        theta = random_init(layout, 3)
        z = rng.uniform(-np.pi, np.pi, 2)
        step = H / 10
        central = np.zeros((2, layout.n_params))
        for m in range(layout.n_params):
            e = np.zeros(layout.n_params)
            e[m] = step
            up = circuit_expectations(layout, bases, theta + e, z)[0]
            down = circuit_expectations(layout, bases, theta - e, z)[0]
            central[:, m] = (up - down) / (2 * step)
        forward = grad_g_q_forward_diff(layout, bases, theta, z, h=H)
        np.testing.assert_allclose(forward, central, atol=10 * H)

    @pytest.mark.parametrize("kind", list(CircuitKind))
    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_methods_agree(self, rng, kind, n, depth):
        layout, bases = build_ansatz(kind, n, depth, rng_seed=depth)
        theta = random_init(layout, n)
        zs = rng.uniform(-np.pi, np.pi, (2, n))
        _, forward = jacobian_forward_diff(layout, bases, theta, zs, h=H)
        shifted = jacobian_param_shift(layout, bases, theta, zs)
        np.testing.assert_allclose(forward, shifted, atol=10 * H)

    def test_fine_step_agreement(self, rng):
        layout, bases = build_ansatz(CircuitKind.C2, 3, 2, rng_seed=9)
        theta = random_init(layout, 9)
        z = rng.uniform(-np.pi, np.pi, 3)
        np.testing.assert_allclose(
            grad_g_q_forward_diff(layout, bases, theta, z, h=1e-5),
            grad_g_q_param_shift(layout, bases, theta, z),
            atol=1e-4,
        )

    def test_latent_jacobian(self, rng):
        layout, bases = build_ansatz(CircuitKind.C3, 3, 1, rng_seed=2)
        theta = random_init(layout, 2)
        zs = rng.uniform(-np.pi, np.pi, (4, 3))
        values, forward = jacobian_forward_diff(layout, bases, theta, zs, h=H, wrt=WRT_LATENT)
        shifted = jacobian_param_shift(layout, bases, theta, zs, wrt=WRT_LATENT)
        assert forward.shape == (4, 3, 3)
        np.testing.assert_allclose(values, circuit_expectations(layout, bases, theta, zs))
        np.testing.assert_allclose(forward, shifted, atol=10 * H)

    def test_sampled_param_shift_is_unbiased(self):
        layout, bases = single_rx()
        theta, z = [np.pi / 3], [0.4]
        exact = grad_g_q_param_shift(layout, bases, theta, z)[0, 0]
        rng = np.random.default_rng(11)
        draws = np.array([
            grad_g_q_param_shift(layout, bases, theta, z, shots=1000, rng=rng)[0, 0]
            for _ in range(200)
        ])
        stderr = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - exact) <= 3 * stderr


class TestIdentityBlocks:
    @pytest.mark.parametrize("kind", list(CircuitKind))
    @pytest.mark.parametrize("depth", [2, 4])
    def test_even_depth_is_identity(self, rng, kind, depth):
        layout, bases = build_ansatz(kind, 4, depth, rng_seed=1, identity_blocks=True)
        theta = identity_block_init(layout, bases, rng_seed=1)
        zs = rng.uniform(-np.pi, np.pi, (10, 4))
        values = circuit_expectations(layout, bases, theta, zs)
        assert np.abs(values - np.cos(zs)).max() < 1e-9

    def test_odd_depth_keeps_last_layer_random(self):
        layout, bases = build_ansatz(CircuitKind.C1, 3, 3, rng_seed=4, identity_blocks=True)
        theta = identity_block_init(layout, bases, rng_seed=4)
        np.testing.assert_allclose(theta[3:6], -theta[[2, 1, 0]])
        assert all(source is None for source in layout.mirror_of[6:])
        assert np.all(np.abs(theta) <= np.pi)

    def test_depth_one_is_plain_random(self):
        layout, bases = build_ansatz(CircuitKind.C1, 3, 1, rng_seed=4)
        theta = identity_block_init(layout, bases, rng_seed=4)
        assert np.all((theta > -np.pi) & (theta <= np.pi))

    def test_random_init_covers_half_open_interval(self):
        layout, _ = build_ansatz(CircuitKind.C2, 8, 40, rng_seed=1)
        theta = random_init(layout, 1)
        assert np.all((theta > -np.pi) & (theta <= np.pi))
        assert theta.min() < -2.5 and theta.max() > 2.5

    def test_needs_mirrored_layout(self):
        layout, bases = build_ansatz(CircuitKind.C1, 3, 2, rng_seed=4)
        with pytest.raises(InvalidArgumentError):
            identity_block_init(layout, bases, rng_seed=4)
