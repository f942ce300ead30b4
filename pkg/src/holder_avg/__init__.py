"""Learning average-Hölder smooth functions on finite metric spaces."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.0.0"

from .bracketing import (Bracket, BracketParams, BracketReport, bracket_count_log,
                         bracket_for_function, bracketing_entropy_bound, verify_bracket)
from .errors import (ConsistencyError, HolderAvgError, InfeasibleExtensionError,
                     ParameterError, SmoothnessError)
from .experiments import (GeneratorSpec, SweepResult, gen_example1, gen_example2,
                          gen_grid_uniform, gen_lowerbound, lowerbound_trial, risk_sweep)
from .kernels import backend, set_backend, use_backend
from .learner import (Hypothesis, LabeledSample, LearnerConfig, choose_gamma,
                      concentration_bound, empirical_risk, learn, sample_size_bound,
                      slope_concentration_trial, true_risk_estimate)
from .metric import (MetricAccessor, Net, VoronoiPartition, diameter, greedy_covering_number,
                     greedy_net, snowflake_distance, voronoi)
from .pmse import PmseModel, pmse_eval, pmse_extend_all, pmse_fit
from .smoothness import (DiscreteMeasure, SlopeProfile, average_slope, beta_slope,
                         empirical_average_slope, harmonic_number, slope_profile,
                         weak_average_slope, weak_mean)
