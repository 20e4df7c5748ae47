"""Domains, piecewise potentials, boundary envelopes, and the built-in presets.

The trial wavefunction is psi(x) = B(x) N(x) with B(x) = (b - x)(x - a),
so Dirichlet conditions at the domain ends hold exactly for any network.
Energies and potentials are dimensionless (units with 2m/hbar^2 = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .network import EnergyParam, MlpNetwork, SecondOrderJet, forward_jet


@dataclass(frozen=True)
class PiecewisePotential:
    """Piecewise-constant potential: sorted segments (x_lo, x_hi, v) plus a default.

    Segments are closed on the left and open on the right; the last segment is
    closed on both ends, so every x gets exactly one value.
    """

    segments: tuple[tuple[float, float, float], ...]
    default_value: float = 0.0

    def __post_init__(self):
        prev_hi = -math.inf
        for lo, hi, _ in self.segments:
            if not lo < hi:
                raise ConfigurationError(f"segment ({lo}, {hi}) is empty or inverted")
            if lo < prev_hi:
                raise ConfigurationError("potential segments must be sorted and non-overlapping")
            prev_hi = hi


def potential_eval(p: PiecewisePotential, x: float) -> float:
    """Value of the potential at a single point."""
    n_seg = len(p.segments)
    for i, (lo, hi, v) in enumerate(p.segments):
        closed_right = i == n_seg - 1
        if lo <= x < hi or (closed_right and x == hi):
            return v
    return p.default_value


def potential_values(p: PiecewisePotential, xs: np.ndarray) -> np.ndarray:
    """Vectorized potential evaluation with the same endpoint rule."""
    xs = np.asarray(xs, dtype=float)
    out = np.full(xs.shape, p.default_value)
    n_seg = len(p.segments)
    for i, (lo, hi, v) in enumerate(p.segments):
        mask = (xs >= lo) & (xs < hi)
        if i == n_seg - 1:
            mask |= xs == hi
        out[mask] = v
    return out


@dataclass(frozen=True)
class BoundaryEnvelope:
    """The prefactor B(x) = (b - x)(x - a), zero exactly at both boundaries."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ConfigurationError(f"envelope needs a < b, got ({self.a}, {self.b})")


def envelope_jet(env: BoundaryEnvelope, x: float) -> SecondOrderJet:
    """B(x) with derivatives: B' = a + b - 2x, B'' = -2."""
    return SecondOrderJet((env.b - x) * (x - env.a), env.a + env.b - 2.0 * x, -2.0)


def envelope_arrays(env: BoundaryEnvelope, xs: np.ndarray):
    """(B, B', B'') evaluated on an array of points."""
    xs = np.asarray(xs, dtype=float)
    return (env.b - xs) * (xs - env.a), env.a + env.b - 2.0 * xs, np.full(xs.shape, -2.0)


def trial_jet(env: BoundaryEnvelope, net: MlpNetwork, x: float) -> SecondOrderJet:
    """Jet of the trial wavefunction psi = B N at a single point."""
    return envelope_jet(env, x) * forward_jet(net, x)


@dataclass(frozen=True)
class CollocationGrid:
    """Uniform grid over the domain, endpoints included."""

    points: np.ndarray
    spacing: float

    def __len__(self) -> int:
        return len(self.points)


def make_grid(domain: tuple[float, float], n: int) -> CollocationGrid:
    """n uniformly spaced points covering [a, b] inclusive."""
    a, b = float(domain[0]), float(domain[1])
    if n < 2:
        raise ConfigurationError(f"grid needs at least 2 points, got {n}")
    if not a < b:
        raise ConfigurationError(f"domain needs a < b, got ({a}, {b})")
    return CollocationGrid(np.linspace(a, b, int(n)), (b - a) / (int(n) - 1))


@dataclass(frozen=True)
class ProblemSpec:
    """A complete eigenvalue problem: domain, potential, envelope, energy mode."""

    name: str
    domain: tuple[float, float]
    potential: PiecewisePotential
    envelope: BoundaryEnvelope
    energy_init: EnergyParam
    layer_sizes: tuple[int, ...] = (1, 20, 20, 1)
    n_collocation: int = 100

    def __post_init__(self):
        if (self.envelope.a, self.envelope.b) != tuple(self.domain):
            raise ConfigurationError("envelope must coincide with the domain boundaries")
        if self.n_collocation < 2:
            raise ConfigurationError("n_collocation must be at least 2")


PRESET_NAMES = ("infinite-well", "finite-well", "barrier")


def preset(name: str) -> ProblemSpec:
    """One of the three built-in benchmark problems.

    infinite-well: V = 0 on [0, 1], walls encoded by the envelope, E fixed
    at pi^2.  finite-well: V = 20 for |x| > 1 on [-3, 3], E trained from 1.0.
    barrier: V = 10 on [0, 1] inside [-2.5, 2.5], E trained from 5.0.
    """
    if name == "infinite-well":
        return ProblemSpec(
            name="infinite-well",
            domain=(0.0, 1.0),
            potential=PiecewisePotential(segments=(), default_value=0.0),
            envelope=BoundaryEnvelope(0.0, 1.0),
            energy_init=EnergyParam.fixed(math.pi ** 2),
            layer_sizes=(1, 20, 20, 1),
            n_collocation=100,
        )
    if name == "finite-well":
        return ProblemSpec(
            name="finite-well",
            domain=(-3.0, 3.0),
            potential=PiecewisePotential(segments=((-1.0, 1.0, 0.0),), default_value=20.0),
            envelope=BoundaryEnvelope(-3.0, 3.0),
            energy_init=EnergyParam.trainable(1.0),
            layer_sizes=(1, 40, 40, 1),
            n_collocation=200,
        )
    if name == "barrier":
        return ProblemSpec(
            name="barrier",
            domain=(-2.5, 2.5),
            potential=PiecewisePotential(segments=((0.0, 1.0, 10.0),), default_value=0.0),
            envelope=BoundaryEnvelope(-2.5, 2.5),
            energy_init=EnergyParam.trainable(5.0),
            layer_sizes=(1, 40, 40, 1),
            n_collocation=200,
        )
    raise ConfigurationError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
