"""Neural-network solver for 1D quantum well eigenstates.

A tanh network times an exact-boundary envelope is trained against the
stationary Schrodinger residual plus a normalization penalty; classical
finite-difference and transcendental solvers provide independent ground
truth.
"""

from .errors import ConfigurationError, TrainingDivergedError, ZeroWavefunctionError
from .gradcheck import finite_difference_gradients, gradient_check
from .losses import (LossBreakdown, loss_gradients, norm_integral,
                     norm_integral_values, norm_loss, pde_loss, residuals,
                     residuals_from_values, total_loss)
from .network import (EnergyParam, MlpNetwork, ParameterGradient,
                      SecondOrderJet, forward_jet, forward_jet_batch,
                      identity_jet, init_network)
from .problems import (BoundaryEnvelope, CollocationGrid, PiecewisePotential,
                       ProblemSpec, envelope_jet, make_grid, potential_eval,
                       potential_values, preset, trial_jet)
from .reference import (EigenResult, TridiagonalMatrix, eigenvector_for,
                        fd_hamiltonian, finite_well_even_levels,
                        finite_well_even_state, infinite_well_exact,
                        lowest_eigenvalues, sturm_count_below)
from .training import (AdamState, TrainedModel, TrainingConfig,
                       TrainingRecord, adam_step, sample_wavefunction, train)

__version__ = "0.1.0"
