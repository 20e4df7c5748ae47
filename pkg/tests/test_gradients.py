import numpy as np
import pytest

from qwell import (BoundaryEnvelope, ConfigurationError, EnergyParam,
                   MlpNetwork, PiecewisePotential, ProblemSpec, gradient_check,
                   init_network, loss_gradients, make_grid, preset, residuals)
from qwell.losses import _trial_forward
from qwell.problems import CollocationGrid


def small_problem(energy=None):
    return ProblemSpec(
        name="gradcheck",
        domain=(0.0, 1.0),
        potential=PiecewisePotential(((0.4, 0.7, 3.0),), 0.0),
        envelope=BoundaryEnvelope(0.0, 1.0),
        energy_init=energy or EnergyParam.trainable(2.0),
        layer_sizes=(1, 8, 1),
        n_collocation=20,
    )


def test_all_gradients_match_finite_differences():
    prob = small_problem()
    net = init_network([1, 8, 1], 0)
    grid = make_grid(prob.domain, 20)
    report = gradient_check(net, prob.energy_init, prob, grid)
    assert report  # one entry per group
    assert max(report.values()) < 1e-5


def test_gradients_match_with_nonunit_lambda():
    prob = small_problem()
    net = init_network([1, 8, 1], 2)
    grid = make_grid(prob.domain, 20)
    report = gradient_check(net, prob.energy_init, prob, grid, lambda_norm=2.5)
    assert max(report.values()) < 1e-5


def test_energy_gradient_matches_hand_derived_formula():
    # at fixed psi, dL_pde/dE = mean(2 r_i psi_i)
    prob = preset("finite-well")
    grid = make_grid(prob.domain, 120)
    net = init_network([1, 16, 1], 9)
    energy = EnergyParam.trainable(1.3)
    _, grads = loss_gradients(net, energy, prob, grid)
    r = residuals(net, energy, prob, grid)
    psi = _trial_forward(net, prob, grid)[0]
    expected = float(np.mean(2.0 * r * psi))
    assert abs(grads.energy_grad - expected) < 1e-12


def test_fixed_energy_has_no_gradient():
    prob = preset("infinite-well")
    grid = make_grid(prob.domain, 50)
    net = init_network([1, 8, 1], 1)
    _, grads = loss_gradients(net, prob.energy_init, prob, grid)
    assert grads.energy_grad is None


def test_zero_network_gradient_values():
    prob = small_problem()
    grid = make_grid(prob.domain, 20)
    net = init_network([1, 8, 1], 0)
    weights = list(net.weights)
    biases = list(net.biases)
    weights[-1] = np.zeros_like(weights[-1])
    biases[-1] = np.zeros_like(biases[-1])
    net = MlpNetwork(net.layer_sizes, tuple(weights), tuple(biases), 0)
    breakdown, grads = loss_gradients(net, prob.energy_init, prob, grid)
    assert breakdown.l_pde == 0.0
    assert breakdown.l_norm == 1.0
    assert grads.energy_grad == 0.0


def test_gradient_shapes_match_network():
    prob = small_problem()
    grid = make_grid(prob.domain, 20)
    net = init_network([1, 8, 1], 5)
    _, grads = loss_gradients(net, prob.energy_init, prob, grid)
    for g, w in zip(grads.weight_grads, net.weights):
        assert g.shape == w.shape
        assert np.all(np.isfinite(g))
    for g, b in zip(grads.bias_grads, net.biases):
        assert g.shape == b.shape
        assert np.all(np.isfinite(g))


def test_empty_grid_rejected():
    prob = small_problem()
    net = init_network([1, 8, 1], 0)
    empty = CollocationGrid(np.array([]), 0.0)
    with pytest.raises(ConfigurationError):
        loss_gradients(net, prob.energy_init, prob, empty)


def test_sign_symmetry_of_losses():
    # negating the output layer flips psi -> -psi and leaves both losses as-is
    prob = preset("barrier")
    grid = make_grid(prob.domain, 80)
    net = init_network([1, 12, 1], 7)
    from qwell import total_loss
    base = total_loss(net, prob.energy_init, prob, grid)
    weights = list(net.weights)
    biases = list(net.biases)
    weights[-1] = -weights[-1]
    biases[-1] = -biases[-1]
    flipped_net = MlpNetwork(net.layer_sizes, tuple(weights), tuple(biases), 7)
    flipped = total_loss(flipped_net, prob.energy_init, prob, grid)
    assert flipped.l_pde == base.l_pde
    assert flipped.l_norm == base.l_norm
    assert flipped.total == base.total
