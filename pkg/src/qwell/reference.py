"""Classical solvers used as independent ground truth for the network results.

Three routes that share no code with the network path: finite-difference
diagonalization of the Hamiltonian (Sturm bisection + inverse iteration),
the transcendental quantization condition of the finite square well, and
the analytic infinite-well eigenstates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .losses import norm_integral_values
from .problems import CollocationGrid, PiecewisePotential, potential_values

_EIG_TOL = 1e-10
_INVIT_TOL = 1e-10
_INVIT_MAX_STEPS = 100


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Symmetric tridiagonal matrix stored as its diagonal and off-diagonal."""

    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self):
        if len(self.off_diagonal) != len(self.diagonal) - 1:
            raise ConfigurationError("off-diagonal must be one shorter than the diagonal")

    @property
    def dimension(self) -> int:
        return len(self.diagonal)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diagonal * x
        y[:-1] += self.off_diagonal * x[1:]
        y[1:] += self.off_diagonal * x[:-1]
        return y


@dataclass(frozen=True)
class EigenResult:
    """One eigenpair: energy plus the unit-normalized sampled eigenfunction."""

    eigenvalue: float
    eigenvector: np.ndarray
    grid: CollocationGrid


def fd_hamiltonian(potential: PiecewisePotential, domain: tuple[float, float],
                   n: int) -> TridiagonalMatrix:
    """Central-difference discretization of -d^2/dx^2 + V on n interior points.

    Dirichlet boundaries are implicit: h = (b - a)/(n + 1), the diagonal holds
    2/h^2 + V(x_i), the off-diagonal -1/h^2.
    """
    if n < 3:
        raise ConfigurationError(f"finite-difference grid needs n >= 3, got {n}")
    a, b = float(domain[0]), float(domain[1])
    h = (b - a) / (n + 1)
    x = a + h * np.arange(1, n + 1)
    diagonal = 2.0 / h ** 2 + potential_values(potential, x)
    off_diagonal = np.full(n - 1, -1.0 / h ** 2)
    return TridiagonalMatrix(diagonal, off_diagonal)


def sturm_count_below(m: TridiagonalMatrix, sigma: float) -> int:
    """Number of eigenvalues strictly below sigma (sign changes of the LDL^T pivots)."""
    d = m.diagonal
    e = m.off_diagonal
    count = 0
    q = d[0] - sigma
    if q < 0.0:
        count += 1
    for i in range(1, len(d)):
        if q == 0.0:
            q = -1e-300  # treat an exact zero pivot as infinitesimally negative
        q = (d[i] - sigma) - e[i - 1] * e[i - 1] / q
        if q < 0.0:
            count += 1
    return count


def _gershgorin_bounds(m: TridiagonalMatrix) -> tuple[float, float]:
    d = m.diagonal
    r = np.zeros(len(d))
    if len(d) > 1:
        r[:-1] += np.abs(m.off_diagonal)
        r[1:] += np.abs(m.off_diagonal)
    lo = float(np.min(d - r))
    hi = float(np.max(d + r))
    pad = max(1.0, abs(lo), abs(hi)) * 1e-12 + _EIG_TOL
    return lo - pad, hi + pad


def lowest_eigenvalues(m: TridiagonalMatrix, k: int) -> list[float]:
    """The k smallest eigenvalues by Sturm counting + bisection, ascending.

    Each eigenvalue is bracketed to absolute width 1e-10 (or one ulp of the
    bracket endpoints, whichever is coarser).
    """
    if k < 1 or k > m.dimension:
        raise ConfigurationError(f"k must be in [1, {m.dimension}], got {k}")
    lo0, hi0 = _gershgorin_bounds(m)
    if sturm_count_below(m, hi0) < k:
        raise RuntimeError("Sturm bracket failure: fewer eigenvalues than expected "
                           "inside the Gershgorin bounds")
    out = []
    for j in range(1, k + 1):
        lo, hi = lo0, hi0
        while hi - lo > _EIG_TOL:
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:  # bracket narrower than one ulp
                break
            if sturm_count_below(m, mid) >= j:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return out


def _solve_shifted(diag_shifted: np.ndarray, off: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (tridiagonal) T y = rhs by LU with partial pivoting.

    Pivoting introduces one extra superdiagonal of fill-in; needed because
    inverse iteration solves against a nearly singular shift.
    """
    n = len(diag_shifted)
    d = diag_shifted.astype(float).copy()      # main diagonal
    u1 = np.concatenate([off.astype(float), [0.0]])  # first superdiagonal
    u2 = np.zeros(n)                            # fill-in superdiagonal
    lower = off.astype(float).copy()            # subdiagonal being eliminated
    y = rhs.astype(float).copy()

    tiny = np.finfo(float).tiny
    for i in range(n - 1):
        if abs(lower[i]) > abs(d[i]):
            d[i], lower[i] = lower[i], d[i]
            u1[i], d[i + 1] = d[i + 1], u1[i]
            if i + 1 < n - 1:
                u2[i], u1[i + 1] = u1[i + 1], u2[i]
            y[i], y[i + 1] = y[i + 1], y[i]
        if d[i] == 0.0:
            d[i] = tiny
        factor = lower[i] / d[i]
        d[i + 1] -= factor * u1[i]
        if i + 1 < n - 1:
            u1[i + 1] -= factor * u2[i]
        y[i + 1] -= factor * y[i]
    if d[n - 1] == 0.0:
        d[n - 1] = tiny

    x = np.zeros(n)
    x[n - 1] = y[n - 1] / d[n - 1]
    if n > 1:
        x[n - 2] = (y[n - 2] - u1[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (y[i] - u1[i] * x[i + 1] - u2[i] * x[i + 2]) / d[i]
    return x


def eigenvector_for(m: TridiagonalMatrix, eigenvalue: float,
                    domain: tuple[float, float] | None = None) -> EigenResult:
    """Eigenvector by inverse iteration with the shifted matrix.

    Converged when successive normalized iterates differ by < 1e-10 (up to
    sign).  The returned eigenvector is padded with the boundary zeros,
    trapezoid-normalized over the grid, and sign-canonicalized (positive at
    its largest-|psi| point).  ``domain`` defaults to [0, 1]-style index
    coordinates when not given.
    """
    n = m.dimension
    diag_shifted = m.diagonal - eigenvalue
    rng = np.random.default_rng(1234)  # fixed start vector: deterministic output
    vec = rng.standard_normal(n)
    vec /= np.linalg.norm(vec)
    for _ in range(_INVIT_MAX_STEPS):
        new = _solve_shifted(diag_shifted, m.off_diagonal, vec)
        norm = np.linalg.norm(new)
        if norm == 0.0 or not np.isfinite(norm):
            raise RuntimeError("inverse iteration produced a degenerate iterate")
        new /= norm
        if min(np.linalg.norm(new - vec), np.linalg.norm(new + vec)) < _INVIT_TOL:
            vec = new
            break
        vec = new
    else:
        raise RuntimeError(f"inverse iteration did not converge in {_INVIT_MAX_STEPS} steps")

    if domain is None:
        domain = (0.0, 1.0)
    a, b = float(domain[0]), float(domain[1])
    h = (b - a) / (n + 1)
    points = a + h * np.arange(n + 2)
    points[-1] = b  # exact endpoint
    full = np.concatenate([[0.0], vec, [0.0]])
    full /= math.sqrt(norm_integral_values(full, h))
    if full[np.argmax(np.abs(full))] < 0.0:
        full = -full
    return EigenResult(float(eigenvalue), full, CollocationGrid(points, h))


def finite_well_even_levels(v0: float, half_width: float) -> list[float]:
    """Even-parity bound energies of the infinite-domain finite square well.

    Solves sqrt(E) tan(sqrt(E) a) = sqrt(v0 - E) for E in (0, v0) by
    bisection on each tangent branch, ascending.
    """
    if v0 <= 0.0 or half_width <= 0.0:
        raise ConfigurationError("well depth and half-width must be positive")
    a = float(half_width)
    k_max = math.sqrt(v0)

    def f(k: float) -> float:
        return k * math.tan(k * a) - math.sqrt(max(v0 - k * k, 0.0))

    levels = []
    branch = 0
    while True:
        lo = branch * math.pi / a
        hi = min((branch * math.pi + 0.5 * math.pi) / a, k_max)
        if lo >= k_max:
            break
        nudge = 1e-12 * max(1.0, hi)
        lo_eval, hi_eval = lo + nudge, hi - nudge
        if hi_eval <= lo_eval or f(hi_eval) <= 0.0:
            branch += 1
            continue  # the branch top sits below the crossing: no root here
        while hi_eval - lo_eval > 1e-14 * max(1.0, hi_eval):
            mid = 0.5 * (lo_eval + hi_eval)
            if mid == lo_eval or mid == hi_eval:
                break
            if f(mid) < 0.0:
                lo_eval = mid
            else:
                hi_eval = mid
        k_root = 0.5 * (lo_eval + hi_eval)
        levels.append(k_root * k_root)
        branch += 1
    return levels


def finite_well_even_state(v0: float, half_width: float, energy: float,
                           xs: np.ndarray) -> np.ndarray:
    """Sampled analytic even eigenfunction for one level of the finite well.

    cos(kx) inside, matched decaying exponential outside, normalized over the
    whole real line.
    """
    k = math.sqrt(energy)
    kappa = math.sqrt(v0 - energy)
    a = float(half_width)
    amp = math.cos(k * a) * math.exp(kappa * a)
    # integral of the unnormalized state: inside a + sin(2ka)/2k, outside cos^2(ka)/kappa
    norm_sq = a + math.sin(2.0 * k * a) / (2.0 * k) + math.cos(k * a) ** 2 / kappa
    scale = 1.0 / math.sqrt(norm_sq)
    xs = np.asarray(xs, dtype=float)
    inside = np.abs(xs) <= a
    psi = np.where(inside, np.cos(k * xs), amp * np.exp(-kappa * np.abs(xs)))
    return scale * psi


def infinite_well_exact(n: int, n_points: int = 101) -> tuple[float, np.ndarray]:
    """Energy n^2 pi^2 and samples of sqrt(2) sin(n pi x) on [0, 1]."""
    if n < 1:
        raise ConfigurationError(f"quantum number must be >= 1, got {n}")
    energy = float(n) ** 2 * math.pi ** 2
    xs = np.linspace(0.0, 1.0, n_points)
    psi = math.sqrt(2.0) * np.sin(n * math.pi * xs)
    return energy, np.column_stack([xs, psi])
