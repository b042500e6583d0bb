"""Gate-noise effects on a quantum spectral simulation of 1D scalar convection.

Modules
-------
field        periodic grids, Fourier transforms, exact transport, initial conditions
quantum      state vectors, density matrices, QFT and the Rz evolution layer
channels     Kraus noise channels and noisy density-matrix time stepping
transition   analytic/empirical transition matrices, Hamming profiles, shots, readout
discovery    sparse regression of the effective PDE right-hand side
solver       pseudo-spectral RK4 solver and error maps
"""

from ._kernels import BACKEND
from .channels import make_channel, simulate_noisy
from .discovery import RegressionConfig, SnapshotDataset, SparseModel, TermLibrary, discover
from .field import GridField, ProblemSpec, eval_reference_profile, exact_solution, make_grid
from .quantum import simulate_ideal
from .solver import SolverConfig, coverage_within, error_map, solve_effective
from .transition import analytic_matrix, effective_p, empirical_matrix, fit_p

__version__ = "0.1.0"
