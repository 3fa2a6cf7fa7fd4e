import numpy as np
import pytest
from conftest import constant_critic, linear_critic, random_network

from qanogan.config import AnsatzConfig, CriticConfig, GeneratorConfig, TrainConfig
from qanogan.data import Dataset
from qanogan.enums import (
    Activation,
    CircuitKind,
    GeneratorVariant,
    GradientMode,
    GradientTarget,
    InitStrategy,
)
from qanogan.exceptions import ContractViolationError, InvalidArgumentError
from qanogan.gan import (
    ClassicalGenerator,
    GanModel,
    Trainer,
    critic_loss,
    critic_loss_and_gradients,
    generator_loss,
    gradient_penalty,
    load_checkpoint,
    sample_latent,
    save_checkpoint,
)
from qanogan.gan.generators import BODY, THETA, UPSCALING
from qanogan.gan.model import CRITIC
from qanogan.nn import DenseLayer, DenseNetwork, backward, forward


def quantum_config(n=3, m=4, depth=1, kind=CircuitKind.C1, **kwargs):
    return GeneratorConfig(
        variant=GeneratorVariant.QUANTUM,
        latent_dim=n,
        data_dim=m,
        ansatz=AnsatzConfig(circuit_kind=kind, depth=depth, **kwargs),
    )


def build_model(generator_config, seed=0, hidden=(4,), **train):
    train.setdefault("progress", False)
    critic_config = CriticConfig(hidden=list(hidden), activation=Activation.LEAKY_RELU)
    return GanModel.build(generator_config, critic_config, TrainConfig(**train), seed)


def normal_rows(rng, n, dim, center=0.5, spread=0.05):
    return Dataset(np.clip(rng.normal(center, spread, (n, dim)), 0, 1), np.zeros(n, dtype=bool))


def generator_objective(model, zs):
    return -float(np.mean(model.critic(model.generate(zs))))


def analytic_generator_grads(model, zs, mode=GradientMode.PARAM_SHIFT):
    m = zs.shape[0]
    generated = model.generator.forward(zs, target=GradientTarget.PARAMETERS, mode=mode)
    _, cache = forward(model.critic, generated.outputs)
    _, upstream = backward(model.critic, cache, np.full((m, 1), -1.0 / m))
    grads, _ = generated.backward(upstream)
    return grads


class TestLatents:
    def test_quantum_range(self, rng):
        zs = sample_latent(GeneratorVariant.QUANTUM, 4, 500, rng)
        assert zs.shape == (500, 4)
        assert np.all((zs > -np.pi) & (zs < np.pi))

    def test_classical_range(self, rng):
        zs = sample_latent(GeneratorVariant.CLASSICAL, 4, 500, rng)
        assert np.all((zs > 0) & (zs < 1))

    def test_seeded(self):
        a = sample_latent(GeneratorVariant.QUANTUM, 3, 8, np.random.default_rng(5))
        b = sample_latent(GeneratorVariant.QUANTUM, 3, 8, np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)

    def test_empty_batch(self, rng):
        with pytest.raises(InvalidArgumentError):
            sample_latent(GeneratorVariant.QUANTUM, 3, 0, rng)


class TestGeneratorForward:
    def test_upscaled_outputs_in_unit_interval(self, rng):
        model = build_model(quantum_config(n=3, m=5))
        out = model.generate(sample_latent(GeneratorVariant.QUANTUM, 3, 50, rng))
        assert out.shape == (50, 5)
        assert np.all((out > 0) & (out < 1))

    def test_identity_blocks_feed_cos_z(self, rng):
        model = build_model(
            quantum_config(n=3, m=4, depth=2, init_strategy=InitStrategy.IDENTITY_BLOCK)
        )
        zs = sample_latent(GeneratorVariant.QUANTUM, 3, 10, rng)
        np.testing.assert_allclose(
            model.generate(zs), model.generator.upscaling(np.cos(zs)), atol=1e-9
        )

    def test_without_upscaling(self, rng):
        config = GeneratorConfig(latent_dim=6, data_dim=6, use_upscaling=False)
        model = build_model(config)
        out = model.generate(sample_latent(GeneratorVariant.QUANTUM, 6, 20, rng))
        assert out.shape == (20, 6)
        assert np.all(np.abs(out) <= 1)
        assert set(model.parameters()) == {CRITIC, THETA}

    def test_rescaled_expectations(self, rng):
        config = GeneratorConfig(
            latent_dim=3, data_dim=3, use_upscaling=False, rescale_expectations=True
        )
        model = build_model(config)
        out = model.generate(sample_latent(GeneratorVariant.QUANTUM, 3, 20, rng))
        assert np.all((out >= 0) & (out <= 1))

    def test_classical_body(self, rng):
        config = GeneratorConfig(
            variant=GeneratorVariant.CLASSICAL, latent_dim=3, data_dim=5, classical_body=[4, 6]
        )
        model = build_model(config)
        out = model.generate(sample_latent(GeneratorVariant.CLASSICAL, 3, 7, rng))
        assert out.shape == (7, 5)
        assert set(model.parameters()) == {CRITIC, BODY, UPSCALING}

    def test_latent_dimension_mismatch(self):
        model = build_model(quantum_config(n=3))
        with pytest.raises(InvalidArgumentError):
            model.generate(np.zeros((2, 4)))


class TestLosses:
    def test_unit_gradient_critic_has_no_penalty(self, rng):
        critic = linear_critic([1.0, 0.0])
        x, x_g = rng.uniform(size=(5, 2)), rng.uniform(size=(5, 2))
        assert gradient_penalty(critic, x, x_g, rng.uniform(size=5)) == pytest.approx(0.0)

    def test_constant_critic_penalty(self, rng):
        critic = constant_critic(2, 0.3)
        x, x_g = rng.uniform(size=(5, 2)), rng.uniform(size=(5, 2))
        assert gradient_penalty(critic, x, x_g, rng.uniform(size=5)) == pytest.approx(1.0)

    def test_doubled_critic_penalty(self, rng):
        critic = linear_critic([2.0, 0.0])
        x = rng.uniform(size=(4, 2))
        eps = rng.uniform(size=4)
        assert gradient_penalty(critic, x, x, eps) == pytest.approx(1.0)
        assert critic_loss(critic, x, x, eps, penalty_weight=10) == pytest.approx(10.0)

    def test_constant_critic_loss(self, rng):
        critic = constant_critic(3, 0.7)
        x, x_g = rng.uniform(size=(6, 3)), rng.uniform(size=(6, 3))
        eps = rng.uniform(size=6)
        assert critic_loss(critic, x, x_g, eps, 0) == pytest.approx(0.0)
        assert critic_loss(critic, x, x_g, eps, 10) == pytest.approx(10.0)

    def test_hand_computed_critic_loss(self):
        critic = linear_critic([3.0, 4.0], 0.5)
        # D(x_g) - D(x) = 4.5 - 3.5; the input gradient has norm 5
        loss = critic_loss(critic, [[1.0, 0.0]], [[0.0, 1.0]], [0.3], penalty_weight=10)
        assert loss == pytest.approx(1.0 + 10 * 16)

    def test_empty_batch(self):
        with pytest.raises(InvalidArgumentError):
            critic_loss(constant_critic(2, 0), np.zeros((0, 2)), np.zeros((0, 2)), [], 10)

    def test_generator_loss(self):
        assert generator_loss(constant_critic(2, 0.4), np.zeros((3, 2))) == pytest.approx(-0.4)
        x_g = np.full((5, 2), 0.5)
        assert generator_loss(linear_critic([1.0, 1.0]), x_g) == pytest.approx(-1.0)

    @pytest.mark.parametrize("penalty_weight", [0.0, 10.0])
    def test_critic_gradients_match_finite_differences(self, rng, penalty_weight):
        critic = random_network(rng, [3, 5, 4, 1], Activation.LEAKY_RELU)
        x, x_g = rng.uniform(size=(6, 3)), rng.uniform(size=(6, 3))
        eps = rng.uniform(size=6)
        result = critic_loss_and_gradients(critic, x, x_g, eps, penalty_weight)
        assert result.loss == pytest.approx(critic_loss(critic, x, x_g, eps, penalty_weight))

        params = critic.flat_parameters()
        numeric = np.zeros_like(params)
        for k in range(params.size):
            e = np.zeros_like(params)
            e[k] = 1e-6
            critic.set_flat_parameters(params + e)
            up = critic_loss(critic, x, x_g, eps, penalty_weight)
            critic.set_flat_parameters(params - e)
            down = critic_loss(critic, x, x_g, eps, penalty_weight)
            numeric[k] = (up - down) / 2e-6
        critic.set_flat_parameters(params)
        np.testing.assert_allclose(result.gradients, numeric, atol=1e-5)


class TestGradients:
    @pytest.mark.parametrize("mode", [GradientMode.PARAM_SHIFT, GradientMode.FORWARD_DIFF])
    @pytest.mark.parametrize("n, depth", [(2, 1), (3, 2), (4, 2)])
    def test_theta_gradient_matches_pipeline_differences(self, rng, mode, n, depth):
        model = build_model(quantum_config(n=n, m=5, depth=depth), seed=n)
        zs = sample_latent(GeneratorVariant.QUANTUM, n, 8, rng)
        grads = analytic_generator_grads(model, zs, mode)

        theta = model.generator.theta.copy()
        numeric = np.zeros_like(theta)
        for k in range(theta.size):
            e = np.zeros_like(theta)
            e[k] = 1e-6
            model.generator.set_parameters(THETA, theta + e)
            up = generator_objective(model, zs)
            model.generator.set_parameters(THETA, theta - e)
            down = generator_objective(model, zs)
            numeric[k] = (up - down) / 2e-6
        model.generator.set_parameters(THETA, theta)
        np.testing.assert_allclose(grads[THETA], numeric, atol=1e-3)

    def test_upscaling_gradient_matches_differences(self, rng):
        model = build_model(quantum_config(n=3, m=4))
        zs = sample_latent(GeneratorVariant.QUANTUM, 3, 6, rng)
        grads = analytic_generator_grads(model, zs)
        upscaling = model.generator.upscaling
        params = upscaling.flat_parameters()
        numeric = np.zeros_like(params)
        for k in range(params.size):
            e = np.zeros_like(params)
            e[k] = 1e-6
            upscaling.set_flat_parameters(params + e)
            up = generator_objective(model, zs)
            upscaling.set_flat_parameters(params - e)
            down = generator_objective(model, zs)
            numeric[k] = (up - down) / 2e-6
        upscaling.set_flat_parameters(params)
        np.testing.assert_allclose(grads[UPSCALING], numeric, atol=1e-6)

    def test_forward_differences_need_analytic_expectations(self, rng):
        model = build_model(quantum_config())
        with pytest.raises(InvalidArgumentError):
            model.generator.forward(
                np.zeros((1, 3)), target=GradientTarget.PARAMETERS, shots=10, rng=rng,
                mode=GradientMode.FORWARD_DIFF,
            )


class TestTrainingSteps:
    def test_critic_step_leaves_generator(self, rng):
        model = build_model(quantum_config(n=3, m=3), batch_size=8)
        before = model.generator.parameters()
        critic_before = model.critic.flat_parameters()
        Trainer(model, model.train_config).train_critic_step(rng.uniform(size=(8, 3)))
        for group, values in model.generator.parameters().items():
            np.testing.assert_array_equal(values, before[group])
        assert not np.array_equal(model.critic.flat_parameters(), critic_before)
        assert model.critic_steps == 1

    def test_generator_step_leaves_critic(self):
        model = build_model(quantum_config(n=3, m=3), batch_size=8)
        critic_before = model.critic.flat_parameters()
        theta_before = model.generator.theta.copy()
        Trainer(model, model.train_config).train_generator_step()
        np.testing.assert_array_equal(model.critic.flat_parameters(), critic_before)
        assert not np.array_equal(model.generator.theta, theta_before)
        assert model.generator_steps == 1

    def test_generator_step_without_upscaling(self):
        config = GeneratorConfig(latent_dim=3, data_dim=3, use_upscaling=False)
        model = build_model(config, batch_size=4)
        Trainer(model, model.train_config).train_generator_step()
        assert set(model.optimizers) == {CRITIC, THETA}
        assert model.optimizers[THETA].t == 1

    def test_critic_step_seeded(self, rng):
        batch = rng.uniform(size=(8, 3))
        results = []
        for _ in range(2):
            model = build_model(quantum_config(n=3, m=3), seed=4, batch_size=8)
            Trainer(model, model.train_config).train_critic_step(batch)
            results.append(model.critic.flat_parameters())
        np.testing.assert_array_equal(results[0], results[1])

    def test_balanced_critic_gradient_is_small(self):
        # real and generated rows from the same law: the difference term averages out
        generator = ClassicalGenerator(2)
        critic = DenseNetwork([DenseLayer([[0.5, -0.5]], [0.0])])
        model = GanModel(generator, critic, TrainConfig(penalty_weight=0.0))
        rng = np.random.default_rng(8)
        grads = []
        for _ in range(200):
            x = rng.uniform(size=(16, 2))
            x_g = model.generate(rng.uniform(size=(16, 2)))
            grads.append(critic_loss_and_gradients(critic, x, x_g, np.zeros(16), 0.0).gradients)
        grads = np.asarray(grads)
        stderr = grads.std(axis=0, ddof=1) / np.sqrt(len(grads))
        assert np.all(np.abs(grads.mean(axis=0)) <= 3 * stderr + 1e-12)

    def test_generator_loss_decreases_after_step(self):
        improved = 0
        for seed in range(10):
            model = build_model(quantum_config(n=3, m=3), seed=seed, learning_rate=0.001)
            zs = sample_latent(GeneratorVariant.QUANTUM, 3, 64, np.random.default_rng(seed))
            before = model.generator_loss(zs)
            Trainer(model, model.train_config).train_generator_step(zs)
            improved += model.generator_loss(zs) < before
        assert improved >= 8


class TestTrain:
    def test_zero_iterations_keep_initialization(self, rng):
        model = build_model(quantum_config(n=3, m=3), total_generator_iters=0)
        before = model.parameters()
        history = Trainer(model, model.train_config).train(normal_rows(rng, 50, 3))
        assert len(history) == 0
        for group, values in model.parameters().items():
            np.testing.assert_array_equal(values, before[group])

    def test_step_counts(self, rng):
        model = build_model(
            quantum_config(n=3, m=3), total_generator_iters=4, n_critic=3, batch_size=8
        )
        history = Trainer(model, model.train_config).train(normal_rows(rng, 50, 3))
        assert model.generator_steps == 4
        assert model.critic_steps == 12
        assert list(history.to_frame()["iteration"]) == [1, 2, 3, 4]

    def test_rejects_anomalous_rows(self, rng):
        model = build_model(quantum_config(n=3, m=3))
        data = Dataset(rng.uniform(size=(10, 3)), [False] * 9 + [True])
        with pytest.raises(ContractViolationError):
            Trainer(model, model.train_config).train(data)

    def test_rejects_feature_mismatch(self, rng):
        model = build_model(quantum_config(n=3, m=3))
        with pytest.raises(InvalidArgumentError):
            Trainer(model, model.train_config).train(normal_rows(rng, 10, 4))

    def test_deterministic_history(self, rng):
        data = normal_rows(rng, 60, 3)
        frames = []
        for _ in range(2):
            model = build_model(
                quantum_config(n=3, m=3), seed=2, total_generator_iters=3, batch_size=8
            )
            frames.append(Trainer(model, model.train_config).train(data).to_frame())
        columns = ["critic_loss", "generator_loss", "wasserstein_estimate"]
        np.testing.assert_array_equal(frames[0][columns].to_numpy(), frames[1][columns].to_numpy())

    def test_callbacks_and_periodic_checkpoints(self, rng, tmp_path):
        model = build_model(
            quantum_config(n=3, m=3), total_generator_iters=4, batch_size=8, checkpoint_every=2
        )
        seen = []
        Trainer(model, model.train_config).train(
            normal_rows(rng, 30, 3),
            callbacks=[lambda m, record: seen.append(record.iteration)],
            checkpoint_dir=tmp_path,
        )
        assert seen == [1, 2, 3, 4]
        assert sorted(p.name for p in tmp_path.iterdir()) == ["iter_000002", "iter_000004"]
        restored = load_checkpoint(tmp_path / "iter_000004").model
        np.testing.assert_array_equal(restored.generator.theta, model.generator.theta)

    @pytest.mark.slow
    def test_wasserstein_estimate_shrinks(self):
        rng = np.random.default_rng(0)
        data = Dataset(
            np.clip(rng.normal([0.85, 0.15], 0.03, (500, 2)), 0, 1), np.zeros(500, dtype=bool)
        )
        config = GeneratorConfig(variant=GeneratorVariant.CLASSICAL, latent_dim=2, data_dim=2)
        model = build_model(
            config, hidden=(8,), learning_rate=0.02, total_generator_iters=400, batch_size=32
        )
        history = Trainer(model, model.train_config).train(data).to_frame()
        w = history["wasserstein_estimate"].abs().to_numpy()
        quarter = len(w) // 4
        assert w[:quarter].mean() > w[-quarter:].mean()


class TestCheckpoint:
    @pytest.mark.parametrize("variant", list(GeneratorVariant))
    def test_round_trip_generates_identically(self, rng, tmp_path, variant):
        if variant == GeneratorVariant.QUANTUM:
            config = quantum_config(n=3, m=4, depth=2, init_strategy=InitStrategy.IDENTITY_BLOCK)
        else:
            config = GeneratorConfig(
                variant=variant, latent_dim=3, data_dim=4, classical_body=[5]
            )
        model = build_model(config, seed=3)
        model.critic_steps, model.generator_steps = 10, 2
        restored = load_checkpoint(save_checkpoint(model, tmp_path / "ckpt")).model
        zs = sample_latent(variant, 3, 5, rng)
        np.testing.assert_array_equal(restored.generate(zs), model.generate(zs))
        x = rng.uniform(size=(5, 4))
        np.testing.assert_array_equal(restored.critic(x), model.critic(x))
        assert (restored.critic_steps, restored.generator_steps) == (10, 2)
