"""Central-difference verification of the hand-written parameter gradients."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .losses import loss_gradients, total_loss
from .network import EnergyParam, MlpNetwork, ParameterGradient
from .problems import CollocationGrid, ProblemSpec


def finite_difference_gradients(net: MlpNetwork, energy: EnergyParam,
                                problem: ProblemSpec, grid: CollocationGrid,
                                lambda_norm: float = 1.0, h: float = 1e-6
                                ) -> ParameterGradient:
    """Gradient of the total loss by central differences over every parameter.

    Intended for small networks only: two loss evaluations per parameter.
    """
    def loss_with(weights, biases, e_value):
        candidate = MlpNetwork(net.layer_sizes, tuple(weights), tuple(biases), net.seed)
        e = replace(energy, value=e_value)
        return total_loss(candidate, e, problem, grid, lambda_norm).total

    weights = list(net.weights)
    biases = list(net.biases)
    weight_grads = []
    for layer, w in enumerate(weights):
        grad = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            plus = [a.copy() for a in weights]
            minus = [a.copy() for a in weights]
            plus[layer][idx] += h
            minus[layer][idx] -= h
            grad[idx] = (loss_with(plus, biases, energy.value)
                         - loss_with(minus, biases, energy.value)) / (2.0 * h)
        weight_grads.append(grad)
    bias_grads = []
    for layer, b in enumerate(biases):
        grad = np.zeros_like(b)
        for idx in np.ndindex(b.shape):
            plus = [a.copy() for a in biases]
            minus = [a.copy() for a in biases]
            plus[layer][idx] += h
            minus[layer][idx] -= h
            grad[idx] = (loss_with(weights, plus, energy.value)
                         - loss_with(weights, minus, energy.value)) / (2.0 * h)
        bias_grads.append(grad)

    energy_grad = None
    if energy.is_trainable:
        energy_grad = (loss_with(weights, biases, energy.value + h)
                       - loss_with(weights, biases, energy.value - h)) / (2.0 * h)
    return ParameterGradient(weight_grads, bias_grads, energy_grad)


def _group_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(analytic))), float(np.max(np.abs(numeric))), 1e-12)
    return float(np.max(np.abs(analytic - numeric))) / scale


def gradient_check(net: MlpNetwork, energy: EnergyParam, problem: ProblemSpec,
                   grid: CollocationGrid, lambda_norm: float = 1.0,
                   h: float = 1e-6) -> dict[str, float]:
    """Per-group relative error between analytic and central-difference gradients.

    The error for a group is ||analytic - numeric||_inf / max(||analytic||_inf,
    ||numeric||_inf).  Keys: 'layer{i}.weights', 'layer{i}.biases', 'energy'.
    """
    _, analytic = loss_gradients(net, energy, problem, grid, lambda_norm)
    numeric = finite_difference_gradients(net, energy, problem, grid, lambda_norm, h)
    report = {}
    for i, (ga, gn) in enumerate(zip(analytic.weight_grads, numeric.weight_grads)):
        report[f"layer{i}.weights"] = _group_error(ga, gn)
    for i, (ga, gn) in enumerate(zip(analytic.bias_grads, numeric.bias_grads)):
        report[f"layer{i}.biases"] = _group_error(ga, gn)
    if energy.is_trainable:
        report["energy"] = _group_error(np.array([analytic.energy_grad]),
                                        np.array([numeric.energy_grad]))
    return report
