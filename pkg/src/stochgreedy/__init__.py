"""Online weighted bipartite matching with free disposal.

Stochastic greedy matchers with exact and sampled expectation engines, an
excess-accounting verifier, and the lambda certificate search.
"""

from .instance import (AssignmentTrace, Instance, OfflineMatching, allocation_value, gain,
                       load_instance, offline_optimum, pad_with_dummies, pos_part, save_instance)
from .distributions import DiscreteDistribution, max_convolve
from .policy import AdvertiserMeta, AlgoParams, Branch, PolicyTable, StepDecision, Variant
from .expectation import enumerate_exact, mc_estimate, propagate
from .matchers import RunConfig, RunReport, expected_value, run_greedy, sample_run
from .analysis import decompose, run_mechanism, verify_bounds
from .certificates import (LambdaParams, competitive_ratio, impossibility_scan, lambda_opt_terms,
                           lambda_terms, maximize)
from .generators import GeneratorSpec, generate
from .harness import emit_plot_data, run_suite
from .kernels import BACKEND

__version__ = "0.1.0"
