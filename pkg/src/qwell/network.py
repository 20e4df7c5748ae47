"""Fully-connected tanh network with exact second-order input derivatives.

The network is evaluated as a jet (N, N', N'') propagated forward through
every layer, so the second derivative entering the equation residual is
exact rather than approximated.  Parameter gradients of any scalar loss are
obtained by a hand-written reverse pass through the same jet computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass
class SecondOrderJet:
    """A value with its first and second derivatives w.r.t. the scalar input."""

    value: float
    d1: float
    d2: float

    def __add__(self, other: "SecondOrderJet") -> "SecondOrderJet":
        return SecondOrderJet(self.value + other.value, self.d1 + other.d1, self.d2 + other.d2)

    def __mul__(self, other: "SecondOrderJet") -> "SecondOrderJet":
        # product rule through second order: (uv)'' = u''v + 2u'v' + uv''
        return SecondOrderJet(
            self.value * other.value,
            self.d1 * other.value + self.value * other.d1,
            self.d2 * other.value + 2.0 * self.d1 * other.d1 + self.value * other.d2,
        )


def identity_jet(x: float) -> SecondOrderJet:
    """Seed jet of the input variable itself: (x, 1, 0)."""
    return SecondOrderJet(float(x), 1.0, 0.0)


@dataclass(frozen=True)
class MlpNetwork:
    """Parameters of a scalar-to-scalar MLP, tanh hidden layers, linear output.

    ``weights[l]`` has shape (layer_sizes[l+1], layer_sizes[l]); ``biases[l]``
    has length layer_sizes[l+1].  Treat the arrays as immutable: optimizer
    steps return a new network.
    """

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    seed: int

    @property
    def n_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


@dataclass
class ParameterGradient:
    """Gradient of a scalar loss w.r.t. every network parameter and the energy.

    ``energy_grad`` is None when the energy is held fixed.
    """

    weight_grads: list[np.ndarray]
    bias_grads: list[np.ndarray]
    energy_grad: float | None = None


@dataclass
class EnergyParam:
    """Energy eigenvalue parameter, either held fixed or trained."""

    mode: str  # "fixed" | "trainable"
    value: float

    def __post_init__(self):
        if self.mode not in ("fixed", "trainable"):
            raise ConfigurationError(f"unknown energy mode {self.mode!r}")

    @classmethod
    def fixed(cls, value: float) -> "EnergyParam":
        return cls("fixed", float(value))

    @classmethod
    def trainable(cls, value: float) -> "EnergyParam":
        return cls("trainable", float(value))

    @property
    def is_trainable(self) -> bool:
        return self.mode == "trainable"


def init_network(layer_sizes: list[int] | tuple[int, ...], seed: int) -> MlpNetwork:
    """Glorot-uniform weights, zero biases, deterministic under ``seed``."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 3:
        raise ConfigurationError("layer_sizes needs at least one hidden layer")
    if sizes[0] != 1 or sizes[-1] != 1:
        raise ConfigurationError("network must map a scalar to a scalar (sizes 1 ... 1)")
    if any(s < 1 for s in sizes):
        raise ConfigurationError(f"layer sizes must be positive, got {sizes}")

    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpNetwork(sizes, tuple(weights), tuple(biases), int(seed))


def forward_jet_batch(net: MlpNetwork, xs: np.ndarray):
    """Propagate the jets (x, 1, 0) through the network for every point in ``xs``.

    Returns ((N, N', N'') arrays of shape (n,), cache) where the cache holds
    the per-layer intermediates needed by :func:`backward_jet_batch`.
    """
    xs = np.asarray(xs, dtype=float)
    v = xs[:, None]
    d1 = np.ones_like(v)
    d2 = np.zeros_like(v)
    last = len(net.weights) - 1
    cache = []
    for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
        zv = v @ w.T + b
        zd1 = d1 @ w.T
        zd2 = d2 @ w.T
        if layer < last:
            t = np.tanh(zv)
            u = 1.0 - t * t  # sech^2, the tanh derivative
            cache.append((v, d1, d2, t, u, zd1, zd2))
            v = t
            d1 = u * zd1
            # chain rule for f = tanh(a): f'' = (1-t^2) a'' - 2 t (1-t^2) a'^2
            d2 = u * zd2 - 2.0 * t * u * zd1 * zd1
        else:
            cache.append((v, d1, d2, None, None, None, None))
            v, d1, d2 = zv, zd1, zd2
    return (v[:, 0], d1[:, 0], d2[:, 0]), cache


def forward_jet(net: MlpNetwork, x: float) -> SecondOrderJet:
    """Exact (N(x), N'(x), N''(x)) at a single point."""
    (v, d1, d2), _ = forward_jet_batch(net, np.array([float(x)]))
    return SecondOrderJet(float(v[0]), float(d1[0]), float(d2[0]))


def backward_jet_batch(net: MlpNetwork, cache, bar_v: np.ndarray, bar_d1: np.ndarray,
                       bar_d2: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Reverse pass: cotangents on the output jet -> parameter gradients.

    ``bar_v``, ``bar_d1``, ``bar_d2`` are dL/dN, dL/dN', dL/dN'' per point.
    Returns (weight_grads, bias_grads) summed over the batch.
    """
    n_layers = len(net.weights)
    zbar_v = np.asarray(bar_v, dtype=float)[:, None]
    zbar_d1 = np.asarray(bar_d1, dtype=float)[:, None]
    zbar_d2 = np.asarray(bar_d2, dtype=float)[:, None]
    weight_grads: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    bias_grads: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]

    for layer in range(n_layers - 1, -1, -1):
        av, ad1, ad2 = cache[layer][:3]
        w = net.weights[layer]
        # the affine map touches all three jet slots with the same weights
        weight_grads[layer] = zbar_v.T @ av + zbar_d1.T @ ad1 + zbar_d2.T @ ad2
        bias_grads[layer] = zbar_v.sum(axis=0)
        if layer == 0:
            break
        obar_v = zbar_v @ w
        obar_d1 = zbar_d1 @ w
        obar_d2 = zbar_d2 @ w
        # pull the cotangents back through the previous tanh jet:
        #   o_v = t,  o_d1 = u z1,  o_d2 = u z2 - 2 t u z1^2   (u = 1 - t^2)
        _, _, _, t, u, zd1, zd2 = cache[layer - 1]
        tu = t * u
        zbar_v = (obar_v * u
                  - 2.0 * tu * (obar_d1 * zd1 + obar_d2 * zd2)
                  - 2.0 * u * (u - 2.0 * t * t) * obar_d2 * zd1 * zd1)
        zbar_d1 = obar_d1 * u - 4.0 * tu * obar_d2 * zd1
        zbar_d2 = obar_d2 * u
    return weight_grads, bias_grads
