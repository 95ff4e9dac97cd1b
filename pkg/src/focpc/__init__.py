"""Fractional optimal control with Caputo dynamics and Riemann-Liouville costs.

Modules
-------
special_functions  gamma, Mittag-Leffler and alpha-exponential functions
grid               uniform time grids and grid functions
frac_operators     discretised fractional integrals/derivatives and identity checks
fde_solver         Caputo IVP and adjoint terminal-value solvers
pmp                problem model, Hamiltonian maximisation, forward-backward sweep
resource_example   analytic benchmark with a bang-bang optimum
cli                ``focpc`` command-line driver
"""

from focpc.errors import ConvergenceError, DivergenceError, DomainError, FocpError, PreconditionError
from focpc.grid import GridFunction, TimeGrid
from focpc.pmp import Box, FiniteSet, ProblemSpec, SweepOptions, SweepResult, forward_backward_sweep
from focpc.special_functions import MLParams, alpha_exponential, gamma, mittag_leffler

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ConvergenceError",
    "DivergenceError",
    "DomainError",
    "FiniteSet",
    "FocpError",
    "GridFunction",
    "MLParams",
    "PreconditionError",
    "ProblemSpec",
    "SweepOptions",
    "SweepResult",
    "TimeGrid",
    "alpha_exponential",
    "forward_backward_sweep",
    "gamma",
    "mittag_leffler",
]
