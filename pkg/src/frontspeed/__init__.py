"""Direction-dependent front speeds in periodic reaction-diffusion media."""

__version__ = "0.1.0"

from .core import (Direction, GridSpec, PeriodicCell, PeriodicMedium, ScalarField, TensorField,
                   VectorField, directions_on_circle, evaluate_periodic, sample_field)
from .eigen import (EigenOperatorSpec, EigenResult, assemble, find_lambda0, golden_section,
                    linear_speed, principal_eigenpair)
from .errors import (ConfigError, EigenSolverError, FrontNotFoundError, FrontspeedError,
                     NumericalError)
from .fronts import (FrontTrace, WaveProfile, decay_rate, extract_profile, measure_speed,
                     track_front)
from .nonlinearity import (Nonlinearity, check_assumptions, make_ignition, make_ignition_approx,
                           make_kpp, make_monostable)
from .simulate import GridPlan, InitialData, SimState, comparison_run, plan_grid, run, step
from .studies import SpeedCurve, continuity_report, ignition_approx_study, scan_directions
from .validate import (SpreadingReport, SupersolutionSpec, check_supersolution, choose_lambda,
                       ignition_lower_bound_check, uniform_spreading_check)
