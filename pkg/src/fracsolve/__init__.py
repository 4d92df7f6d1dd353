"""Solver library for 1-D semilinear multi-term time-fractional
integro-differential initial-boundary value problems."""

__version__ = "0.1.0"

from .problems import (FractionalOrders, ProblemSpec, ValidationReport,
                       example_9_1, example_9_2, residual_oracle,
                       validate_hypotheses)
from .scheme import (ConvolutionWeights, Grid, HistoryBuffer, SchemeError,
                     SolutionField, TridiagonalSystem, advance, assemble_step,
                     build_grid, caputo_history_sum, convolution_weights,
                     eliminate_ghosts, max_abs_error, richardson, thomas_solve)
from .special import (GLWeights, PositivityReport, caputo_oracle, digamma_fn,
                      gamma_fn, gl_weights, kernel_N, mittag_leffler,
                      nu_hat_gamma, nu_star, omega, positivity_report,
                      threshold_T1, threshold_T2, weakly_singular_conv)

__all__ = [name for name in dir() if not name.startswith("_")]
