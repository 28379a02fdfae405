"""Dynamic facility location over time-varying distances.

Solvers for the clustering model where clients must be assigned to open
facilities at every time step and pay for opening facilities, connection
distances, and reassignments between consecutive steps.  Includes the LP
relaxations with randomized rounding for both opening-cost modes, exact
brute-force oracles, a per-snapshot static baseline, instance generators,
and a CLI harness (``dynfl``).
"""

from .model import (COST_TOL, CostBreakdown, DimensionMismatchError, DynflError,
                    InfeasibleSolutionError, Instance, InvalidInstanceError, Mode,
                    ParseError, Solution, default_sentinel, evaluate_cost,
                    read_instance, read_solution, validate, write_instance,
                    write_solution)
from .lp import (CertificateErrors, LinearProgram, LpSolution, LpStatus,
                 PivotLimitError, Relation, certificate_errors, lp_text, solve_lp,
                 write_lp_text)
from .relaxation import (FractionalSolution, LpConsistencyError, VariableIndex,
                         build_lp_fixed, build_lp_hourly, check_fact2,
                         extract_fractional, solve_relaxation)
from .rounding import (IntervalPartition, RetryBudgetExceededError, ThresholdDraw,
                       assign_fixed, assign_hourly, draw_count, open_schedule,
                       partition_all, partition_intervals, round_fixed,
                       round_hourly, sample_facilities_fixed, sample_thresholds,
                       sampling_rate)
from .exact import (SizeGuardError, exact_fixed, exact_hourly, optimal_assignment,
                    static_baseline)
from .generators import (GeneratorSpec, gen_classroom, gen_crossing,
                         gen_random_walk, gen_setcover_gadget)
from .harness import TrialReport, bound_factor, run_trials, trial_rngs

__version__ = "0.1.0"
