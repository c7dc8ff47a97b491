"""Stationary solutions of the duplication/substitution balance equations."""
from .continuum import (ContinuumSolution, ContinuumSource, ScaledParams,
                        continuum_residual, continuum_stationary,
                        continuum_tail_amplitude, monodisperse_source,
                        nondimensionalize, uniform_density_source)
from .discrete import (StationarySolution, TransitionSystem, backward_substitution,
                       boundary_value_monoscale, build_transition_system,
                       iterate_balance, matrix_limit, quoted_eigenvalue_formula,
                       solve_by_iteration, stationary_exact_monoscale,
                       stationary_monoscale, stationary_powerlaw,
                       tail_asymptote_monoscale)
from .fitting import TailFit, fit_power_law_tail
from .tails import (RateEstimate, TailEstimate, estimate_rates, random_peak_stats,
                    tail_estimate)
