"""Collaborative content delivery for public transport: workload synthesis,
closed-form cost/QoE modeling, and trace-driven stash simulation."""

__version__ = "0.1.0"

from .analytics import (RequestSet, SourceCounts, entropy_cdf, jaccard,
                        similarity_matrix, source_entropy)
from .model import (CostParams, ModelParams, NetworkParams, ObjectivePoint,
                    ObjectiveWeights, completion_time_miss, expected_completion,
                    expected_completion_min, expected_hit_rate, h_argmin,
                    h_metric, h_min_formula, stash_cost, system_cost, user_cost,
                    x_optimal)
from .sim import (Classification, RunMetrics, SimParams, SplitPolicy, StashState,
                  classify, compare_scenarios, process_request, resolve_split, run)
from .workload import (ClassConfig, ContentCatalog, ContentClass, ContentItem,
                       Request, SizeParams, Trace, ViewParams, WorkloadConfig,
                       ZipfParams, expected_unique, generate_trace, sample_rank,
                       sample_size, sample_view_ratio, zipf_pmf)

__all__ = [name for name in dir() if not name.startswith("_")]
