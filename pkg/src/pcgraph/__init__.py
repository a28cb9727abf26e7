"""Partial correlation graphs for continuous-time MCAR processes."""
from .errors import (EstimationError, InvalidModelError, NotCausalError, NumericalError,
                     PCGraphError, SingularMatrixError)
from .mcar import (MCARModel, autocovariance, check_causal, companion, g_coefficients,
                   inverse_spectral_density, spectral_density, stationary_state_covariance)
from .graphs import (MixedGraph, UndirectedGraph, augment, ch_set, collider_connected, dis_set,
                     m_separated, markov_check, neighbours, separates)
from .partialcorr import (IndexSets, PartialCorrelationOracle, SpectralGrid, concentration_edges,
                          default_grid, graphoid_report, is_partially_uncorrelated)
from .builder import (local_causality_graph, ou_causality_graph, ou_edge_test, pc_graph,
                      sampled_var1_pc_graph, subset_checks, synthesize_model)
from .simulate import SampledSeries, sample_autocovariance, simulate
from .estimate import (estimate_pc_graph, folded_density, lag_window_estimate, periodogram,
                       rescale_highfreq, smoothed_periodogram)

__version__ = "0.1.0"
