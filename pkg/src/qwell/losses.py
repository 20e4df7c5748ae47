"""Equation-residual loss, normalization penalty, and their exact gradients.

The training objective is

    L = mean_i [psi''(x_i) + (E - V(x_i)) psi(x_i)]^2
        + lambda_norm * (trapezoid(psi^2) - 1)^2

with psi = B N the envelope-times-network trial function.  The penalty pins
the wavefunction amplitude: the homogeneous equation alone is solved by any
scaling of a solution, including zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .network import (EnergyParam, MlpNetwork, ParameterGradient,
                      backward_jet_batch, forward_jet_batch)
from .problems import (CollocationGrid, ProblemSpec, envelope_arrays,
                       potential_values)


@dataclass(frozen=True)
class LossBreakdown:
    """The two loss components, their weighting, and the exact weighted sum."""

    l_pde: float
    l_norm: float
    lambda_norm: float
    total: float

    @classmethod
    def build(cls, l_pde: float, l_norm: float, lambda_norm: float) -> "LossBreakdown":
        return cls(l_pde, l_norm, lambda_norm, l_pde + lambda_norm * l_norm)


def trapezoid_weights(n: int) -> np.ndarray:
    """Quadrature weights 1/2, 1, ..., 1, 1/2 (multiply by the spacing)."""
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def residuals_from_values(psi: np.ndarray, psi_dd: np.ndarray, energy_value: float,
                          v: np.ndarray) -> np.ndarray:
    """r_i = psi''(x_i) + (E - V(x_i)) psi(x_i), for arrays sampled on a grid."""
    return psi_dd + (energy_value - v) * psi


def pde_loss(residuals: np.ndarray) -> float:
    """Mean of squared residuals."""
    r = np.asarray(residuals, dtype=float)
    if r.size == 0:
        raise ConfigurationError("residual sequence is empty")
    return float(np.mean(r * r))


def norm_integral_values(psi: np.ndarray, spacing: float) -> float:
    """Trapezoidal estimate of the norm integral from sampled psi values."""
    psi = np.asarray(psi, dtype=float)
    if psi.size < 2:
        raise ConfigurationError("norm integral needs at least 2 samples")
    return float(spacing * np.sum(trapezoid_weights(psi.size) * psi * psi))


def norm_loss(integral: float) -> float:
    """(integral - 1)^2; equals 1 for the trivial zero wavefunction."""
    return (integral - 1.0) ** 2


def _trial_forward(net: MlpNetwork, problem: ProblemSpec, grid: CollocationGrid):
    """Batched psi and psi'' on the grid, keeping the pieces the backward pass needs."""
    xs = grid.points
    (nv, nd1, nd2), cache = forward_jet_batch(net, xs)
    bv, bd1, bd2 = envelope_arrays(problem.envelope, xs)
    psi = bv * nv
    psi_dd = bd2 * nv + 2.0 * bd1 * nd1 + bv * nd2
    return psi, psi_dd, (nv, nd1, nd2), (bv, bd1, bd2), cache


def residuals(net: MlpNetwork, energy: EnergyParam, problem: ProblemSpec,
              grid: CollocationGrid) -> np.ndarray:
    """Equation residual at every collocation point for the trial wavefunction."""
    psi, psi_dd, _, _, _ = _trial_forward(net, problem, grid)
    v = potential_values(problem.potential, grid.points)
    return residuals_from_values(psi, psi_dd, energy.value, v)


def norm_integral(net: MlpNetwork, problem: ProblemSpec, grid: CollocationGrid) -> float:
    """Trapezoidal integral of psi^2 over the domain."""
    psi, _, _, _, _ = _trial_forward(net, problem, grid)
    return norm_integral_values(psi, grid.spacing)


def _evaluate(net: MlpNetwork, energy: EnergyParam, problem: ProblemSpec,
              grid: CollocationGrid, lambda_norm: float, with_grad: bool):
    if len(grid.points) == 0:
        raise ConfigurationError("collocation grid is empty")

    psi, psi_dd, _, (bv, bd1, bd2), cache = _trial_forward(net, problem, grid)
    v = potential_values(problem.potential, grid.points)
    r = residuals_from_values(psi, psi_dd, energy.value, v)
    l_pde = pde_loss(r)
    integral = norm_integral_values(psi, grid.spacing)
    l_norm = norm_loss(integral)
    breakdown = LossBreakdown.build(l_pde, l_norm, lambda_norm)
    if not with_grad:
        return breakdown, None

    n = len(grid.points)
    # dL/dr_i = 2 r_i / n feeds both the psi'' slot and, via (E - V), the psi slot
    r_bar = (2.0 / n) * r
    quad = grid.spacing * trapezoid_weights(n)
    psi_bar = r_bar * (energy.value - v) + lambda_norm * 2.0 * (integral - 1.0) * quad * 2.0 * psi
    psi_dd_bar = r_bar
    # trial assembly psi = B N, psi'' = B''N + 2B'N' + BN'' pulled back to the net jet
    bar_v = psi_bar * bv + psi_dd_bar * bd2
    bar_d1 = psi_dd_bar * 2.0 * bd1
    bar_d2 = psi_dd_bar * bv
    weight_grads, bias_grads = backward_jet_batch(net, cache, bar_v, bar_d1, bar_d2)
    energy_grad = float(np.sum(r_bar * psi)) if energy.is_trainable else None
    return breakdown, ParameterGradient(weight_grads, bias_grads, energy_grad)


def total_loss(net: MlpNetwork, energy: EnergyParam, problem: ProblemSpec,
               grid: CollocationGrid, lambda_norm: float = 1.0) -> LossBreakdown:
    """Weighted sum of the residual loss and the normalization penalty."""
    return _evaluate(net, energy, problem, grid, lambda_norm, with_grad=False)[0]


def loss_gradients(net: MlpNetwork, energy: EnergyParam, problem: ProblemSpec,
                   grid: CollocationGrid, lambda_norm: float = 1.0
                   ) -> tuple[LossBreakdown, ParameterGradient]:
    """Loss breakdown plus its exact gradient w.r.t. all parameters and E.

    The reverse pass runs through the full second-order jet computation: the
    residual depends on the parameters through psi, psi'' and (in trainable
    mode) E.  The breakdown is bit-identical to :func:`total_loss` on the
    same inputs; ``energy_grad`` is None in fixed mode.
    """
    breakdown, grads = _evaluate(net, energy, problem, grid, lambda_norm, with_grad=True)
    return breakdown, grads
