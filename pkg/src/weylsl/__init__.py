"""Inverse Sturm-Liouville problems from samples of the Weyl function.

The solver recovers the potential ``q`` and the Robin constants ``h``, ``H``
of ``-y'' + q y = lambda y`` on ``[0, pi]`` through Neumann series of Bessel
functions and a Fourier-Legendre form of the Gelfand-Levitan equation.  A
direct integrator is included to generate and check spectral data.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DivisionGuardError,
    IllConditionedInputError,
    IncompleteSpectrumError,
    InvalidInputError,
    PreconditionError,
    ReconstructionQualityError,
    SingularSystemError,
    StageError,
    UnderdeterminedSystemError,
    WeylslError,
)
from .potentials import PotentialSpec, catalog, tabulated  # noqa: E402
from .weyl_system import NSBFHead, WeylSample, auto_truncate, density_check, solve_truncated  # noqa: E402
from .spectral import SpectralData, find_eigenvalues, norming_constants, shift_spectrum  # noqa: E402
from .gelfand_levitan import extract_H, extract_q, solve_beta  # noqa: E402
from .pipeline import (  # noqa: E402
    PotentialResult,
    SolverOptions,
    adapt_analytic_bc,
    adapt_partial_potential,
    adapt_two_spectra,
    adapt_variable_h,
    run_inverse,
    run_synthetic,
)
