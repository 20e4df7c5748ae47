"""Full-batch Adam training of the network weights and the energy parameter."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, TrainingDivergedError, ZeroWavefunctionError
from .losses import loss_gradients, norm_integral_values, total_loss
from .network import (EnergyParam, MlpNetwork, ParameterGradient,
                      forward_jet_batch, init_network)
from .problems import ProblemSpec, envelope_arrays, make_grid


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 5000
    learning_rate: float = 1e-3
    lambda_norm: float = 1.0
    seed: int = 43
    log_interval: int = 500
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.learning_rate <= 0.0:
            raise ConfigurationError("learning_rate must be positive")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ConfigurationError("Adam betas must lie in [0, 1)")
        if self.adam_epsilon <= 0.0:
            raise ConfigurationError("adam_epsilon must be positive")
        if self.log_interval < 1:
            raise ConfigurationError("log_interval must be >= 1")


@dataclass
class AdamState:
    """First/second moment accumulators shaped like (weights, biases, energy)."""

    m_weights: list[np.ndarray]
    v_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_biases: list[np.ndarray]
    m_energy: float | None
    v_energy: float | None
    step_count: int = 0

    @classmethod
    def fresh(cls, net: MlpNetwork, trainable_energy: bool) -> "AdamState":
        return cls(
            m_weights=[np.zeros_like(w) for w in net.weights],
            v_weights=[np.zeros_like(w) for w in net.weights],
            m_biases=[np.zeros_like(b) for b in net.biases],
            v_biases=[np.zeros_like(b) for b in net.biases],
            m_energy=0.0 if trainable_energy else None,
            v_energy=0.0 if trainable_energy else None,
        )


@dataclass(frozen=True)
class TrainingRecord:
    epoch: int
    energy: float
    l_pde: float
    l_norm: float
    total: float


@dataclass(frozen=True)
class TrainedModel:
    network: MlpNetwork
    energy: EnergyParam
    history: tuple[TrainingRecord, ...]
    problem: ProblemSpec
    config: TrainingConfig


def adam_step(state: AdamState, net: MlpNetwork, energy: EnergyParam,
              grads: ParameterGradient, cfg: TrainingConfig
              ) -> tuple[AdamState, MlpNetwork, EnergyParam]:
    """One Adam update of every weight, bias, and (when trainable) the energy.

    Standard update with bias correction:
    m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
    p <- p - lr * m/(1-b1^t) / (sqrt(v/(1-b2^t)) + eps).
    """
    for g, w in zip(grads.weight_grads, net.weights):
        if g.shape != w.shape:
            raise RuntimeError(f"gradient shape {g.shape} does not match weights {w.shape}")
    for g, b in zip(grads.bias_grads, net.biases):
        if g.shape != b.shape:
            raise RuntimeError(f"gradient shape {g.shape} does not match biases {b.shape}")
    if energy.is_trainable and grads.energy_grad is None:
        raise RuntimeError("trainable energy but no energy gradient supplied")

    b1, b2, eps, lr = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon, cfg.learning_rate
    t = state.step_count + 1
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t

    def update(m, v, g, p):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        return m, v, p - lr * (m / c1) / (np.sqrt(v / c2) + eps)

    new_mw, new_vw, new_w = [], [], []
    for m, v, g, w in zip(state.m_weights, state.v_weights, grads.weight_grads, net.weights):
        m, v, w = update(m, v, g, w)
        new_mw.append(m)
        new_vw.append(v)
        new_w.append(w)
    new_mb, new_vb, new_b = [], [], []
    for m, v, g, b in zip(state.m_biases, state.v_biases, grads.bias_grads, net.biases):
        m, v, b = update(m, v, g, b)
        new_mb.append(m)
        new_vb.append(v)
        new_b.append(b)

    new_energy = energy
    m_e, v_e = state.m_energy, state.v_energy
    if energy.is_trainable:
        m_e, v_e, e_val = update(state.m_energy, state.v_energy, grads.energy_grad, energy.value)
        new_energy = EnergyParam.trainable(float(e_val))

    new_state = AdamState(new_mw, new_vw, new_mb, new_vb, m_e, v_e, t)
    new_net = MlpNetwork(net.layer_sizes, tuple(new_w), tuple(new_b), net.seed)
    return new_state, new_net, new_energy


def train(problem: ProblemSpec, cfg: TrainingConfig) -> TrainedModel:
    """Full-batch training on the problem's collocation grid.

    History records the state after 0, log_interval, 2*log_interval, ...
    updates plus the final epoch.  Deterministic under (seed, config); a
    non-finite loss aborts with the last good record attached.
    """
    grid = make_grid(problem.domain, problem.n_collocation)
    net = init_network(problem.layer_sizes, cfg.seed)
    energy = replace(problem.energy_init)
    state = AdamState.fresh(net, energy.is_trainable)
    history: list[TrainingRecord] = []

    def record(epoch: int, breakdown) -> TrainingRecord:
        rec = TrainingRecord(epoch, energy.value, breakdown.l_pde, breakdown.l_norm,
                             breakdown.total)
        history.append(rec)
        return rec

    for epoch in range(cfg.epochs):
        breakdown, grads = loss_gradients(net, energy, problem, grid, cfg.lambda_norm)
        if not math.isfinite(breakdown.total):
            raise TrainingDivergedError(
                f"non-finite loss at epoch {epoch}",
                last_record=history[-1] if history else None,
                history=history,
            )
        if epoch % cfg.log_interval == 0:
            record(epoch, breakdown)
        state, net, energy = adam_step(state, net, energy, grads, cfg)

    final = total_loss(net, energy, problem, grid, cfg.lambda_norm)
    if not math.isfinite(final.total):
        raise TrainingDivergedError(
            f"non-finite loss at epoch {cfg.epochs}",
            last_record=history[-1] if history else None,
            history=history,
        )
    record(cfg.epochs, final)
    return TrainedModel(net, energy, tuple(history), problem, cfg)


def sample_wavefunction(model: TrainedModel, n: int) -> np.ndarray:
    """(x, psi) table on an n-point uniform grid, unit-normalized.

    psi is rescaled to trapezoid norm 1 and sign-flipped so the value at the
    point of largest |psi| is positive (the equation fixes psi only up to a
    constant, so this is the canonical representative for plotting).
    """
    if n < 2:
        raise ConfigurationError("wavefunction sample needs at least 2 points")
    grid = make_grid(model.problem.domain, n)
    (nv, _, _), _ = forward_jet_batch(model.network, grid.points)
    bv, _, _ = envelope_arrays(model.problem.envelope, grid.points)
    psi = bv * nv
    integral = norm_integral_values(psi, grid.spacing)
    if integral < 1e-12:
        raise ZeroWavefunctionError(f"wavefunction norm {integral:.3e} is numerically zero")
    psi = psi / math.sqrt(integral)
    if psi[np.argmax(np.abs(psi))] < 0.0:
        psi = -psi
    return np.column_stack([grid.points, psi])
