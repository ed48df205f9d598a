"""Return times, repetition times and LZ76 complexity along orbits of interval maps."""

__version__ = "0.1.0"

from .maps import (Branch, IntervalMap, IntervalUnion, Orbit, image_of_union, iterate,
                   log_derivative_sum, make_builtin_map, orbit, parse_map_spec,
                   sample_initial_point)
from .symbolic import (Partition, SymbolSequence, TransitionMatrix, cylinder_return_time,
                       cylinder_return_time_bruteforce, encode_orbit, generate_bernoulli_word,
                       natural_partition, return_ratio_series)
from .series import ReturnRow, ReturnSeries, emit_csv, read_csv
from .recurrence import (ball_set_return, empirical_ball_measure, point_return_time,
                         repetition_time, scan_scales)
from .estimators import (AggregateEstimate, Estimate, dimension_ensemble,
                         dimension_from_point_returns, entropy_ow, entropy_ow_from_series,
                         fit_loglog, hofbauer_crosscheck, local_dimension_from_measure,
                         lyapunov_birkhoff, lyapunov_ensemble, lyapunov_from_ball_returns)
from .complexity import complexity_rate, lz76_parse, repetition_bound_check
from .experiment import ExperimentConfig, run_experiment

