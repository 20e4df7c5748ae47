import math

import numpy as np
import pytest

from qwell import (AdamState, ConfigurationError, EnergyParam, ParameterGradient,
                   TrainingConfig, TrainingDivergedError, ZeroWavefunctionError,
                   adam_step, init_network, norm_integral_values, preset,
                   sample_wavefunction, train)
from qwell.training import TrainedModel


def tiny_net(seed=0):
    return init_network([1, 4, 1], seed)


def zero_gradient_for(net, energy_trainable=False):
    return ParameterGradient(
        [np.zeros_like(w) for w in net.weights],
        [np.zeros_like(b) for b in net.biases],
        0.0 if energy_trainable else None,
    )


class TestAdamStep:
    def test_zero_gradient_leaves_parameters_unchanged(self):
        net = tiny_net()
        energy = EnergyParam.trainable(1.5)
        state = AdamState.fresh(net, True)
        cfg = TrainingConfig(epochs=1)
        state, new_net, new_energy = adam_step(state, net, energy,
                                               zero_gradient_for(net, True), cfg)
        for old, new in zip(net.weights, new_net.weights):
            assert np.array_equal(old, new)
        assert new_energy.value == 1.5
        assert state.step_count == 1

    def test_first_step_matches_hand_computed_value(self):
        # scalar parameter 1.0 with gradient 2.0: at t=1 the bias-corrected
        # moments give m_hat = g and sqrt(v_hat) = |g|, so the step is
        # lr * g / (|g| + eps) ~ lr
        net = tiny_net()
        energy = EnergyParam.trainable(1.0)
        state = AdamState.fresh(net, True)
        cfg = TrainingConfig(epochs=1, learning_rate=1e-3)
        grads = zero_gradient_for(net, True)
        grads.energy_grad = 2.0
        _, _, new_energy = adam_step(state, net, energy, grads, cfg)
        expected = 1.0 - 1e-3 * 2.0 / (2.0 + 1e-8)
        assert new_energy.value == pytest.approx(expected, abs=1e-15)
        assert new_energy.value == pytest.approx(0.999, abs=1e-8)

    def test_two_steps_accumulate_moments(self):
        net = tiny_net()
        energy = EnergyParam.trainable(1.0)
        state = AdamState.fresh(net, True)
        cfg = TrainingConfig(epochs=1)
        grads = zero_gradient_for(net, True)
        grads.energy_grad = 0.5
        state, net2, energy = adam_step(state, net, energy, grads, cfg)
        state, _, energy = adam_step(state, net2, energy, grads, cfg)
        assert state.step_count == 2
        assert state.m_energy > 0.0
        assert state.v_energy > 0.0

    def test_shape_mismatch_is_an_internal_error(self):
        net = tiny_net()
        energy = EnergyParam.fixed(1.0)
        state = AdamState.fresh(net, False)
        cfg = TrainingConfig(epochs=1)
        bad = zero_gradient_for(net)
        bad.weight_grads[0] = np.zeros((2, 2))
        with pytest.raises(RuntimeError):
            adam_step(state, net, energy, bad, cfg)

    def test_fixed_energy_never_updated(self):
        net = tiny_net()
        energy = EnergyParam.fixed(math.pi**2)
        state = AdamState.fresh(net, False)
        cfg = TrainingConfig(epochs=1)
        grads = zero_gradient_for(net)
        for g in grads.weight_grads:
            g += 1.0
        _, _, new_energy = adam_step(state, net, energy, grads, cfg)
        assert new_energy.value == math.pi**2
        assert new_energy.mode == "fixed"


class TestTrainingConfig:
    @pytest.mark.parametrize("kwargs", [
        {"epochs": 0},
        {"learning_rate": 0.0},
        {"learning_rate": -1.0},
        {"adam_beta1": 1.0},
        {"adam_beta2": -0.1},
        {"adam_epsilon": 0.0},
        {"log_interval": 0},
    ])
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            TrainingConfig(**kwargs)


class TestTrain:
    def test_fixed_energy_is_conserved_bit_exactly(self):
        prob = preset("infinite-well")
        cfg = TrainingConfig(epochs=120, seed=0, log_interval=40)
        model = train(prob, cfg)
        assert model.energy.value == math.pi**2
        assert all(rec.energy == math.pi**2 for rec in model.history)

    def test_history_epochs_and_monotonicity(self):
        prob = preset("infinite-well")
        cfg = TrainingConfig(epochs=1000, seed=1, log_interval=300)
        model = train(prob, cfg)
        assert [rec.epoch for rec in model.history] == [0, 300, 600, 900, 1000]
        assert model.history[-1].total < model.history[0].total

    def test_reproducible_histories(self):
        prob = preset("finite-well")
        cfg = TrainingConfig(epochs=150, seed=3, log_interval=50)
        a = train(prob, cfg)
        b = train(prob, cfg)
        assert len(a.history) == len(b.history)
        for ra, rb in zip(a.history, b.history):
            assert (ra.epoch, ra.energy, ra.l_pde, ra.l_norm, ra.total) == \
                   (rb.epoch, rb.energy, rb.l_pde, rb.l_norm, rb.total)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_carries_last_good_record(self):
        prob = preset("infinite-well")
        cfg = TrainingConfig(epochs=400, seed=0, learning_rate=1e155, log_interval=1)
        with pytest.raises(TrainingDivergedError) as excinfo:
            train(prob, cfg)
        err = excinfo.value
        assert err.last_record is not None
        assert math.isfinite(err.last_record.total)
        assert len(err.history) >= 1

    def test_finite_well_default_protocol_reaches_reported_range(self):
        # 5000 epochs with the default seed lands the trained energy in the
        # empirically reported band; full convergence needs longer (see the
        # acceptance suite)
        prob = preset("finite-well")
        model = train(prob, TrainingConfig(epochs=5000, seed=43, log_interval=1000))
        assert 1.60 <= model.history[-1].energy <= 1.85
        assert model.history[-1].total < model.history[0].total

    def test_energy_moves_smoothly_and_stays_finite(self):
        # trainable-energy run: per-epoch energy steps stay well under 0.1
        prob = preset("finite-well")
        cfg = TrainingConfig(epochs=300, seed=5, log_interval=1)
        model = train(prob, cfg)
        energies = np.array([rec.energy for rec in model.history])
        assert np.all(np.isfinite(energies))
        assert np.max(np.abs(np.diff(energies))) < 0.1
        totals = np.array([rec.total for rec in model.history])
        assert np.all(np.isfinite(totals))


class TestSampleWavefunction:
    def test_normalization_and_boundaries(self):
        prob = preset("infinite-well")
        model = train(prob, TrainingConfig(epochs=800, seed=0, log_interval=400))
        table = sample_wavefunction(model, 101)
        xs, psi = table[:, 0], table[:, 1]
        assert xs[0] == 0.0 and xs[-1] == 1.0
        assert psi[0] == 0.0 and psi[-1] == 0.0
        integral = norm_integral_values(psi, xs[1] - xs[0])
        assert abs(integral - 1.0) < 1e-10
        # canonical sign: positive at the peak
        assert psi[np.argmax(np.abs(psi))] > 0.0

    def test_needs_at_least_two_points(self):
        prob = preset("infinite-well")
        model = train(prob, TrainingConfig(epochs=5, seed=0))
        with pytest.raises(ConfigurationError):
            sample_wavefunction(model, 1)

    def test_zero_wavefunction_rejected(self):
        prob = preset("infinite-well")
        net = init_network([1, 8, 1], 0)
        weights = [np.zeros_like(w) for w in net.weights]
        biases = [np.zeros_like(b) for b in net.biases]
        from qwell.network import MlpNetwork
        dead = MlpNetwork(net.layer_sizes, tuple(weights), tuple(biases), 0)
        model = TrainedModel(dead, prob.energy_init, (), prob,
                             TrainingConfig(epochs=1))
        with pytest.raises(ZeroWavefunctionError):
            sample_wavefunction(model, 50)
