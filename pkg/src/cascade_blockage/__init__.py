"""Multiplicative-cascade blockage model for wireless networks.

Analytic Laplace transforms of interference under correlated blockage,
best-beam and beam-switch coverage for sector-beam receivers, and a Monte
Carlo simulator that checks every analytic result.
"""

from .analytic import (AnalyticSolver, CoverageCurve, FixedPoint, box_lt, coverage,
                       coverage_curve, db_to_linear, half_plane_lt_finite,
                       half_plane_lt_infinite, independent_lt, lc_lt, linear_to_db,
                       periodic_lt, total_lt)
from .beams import (BeamConfig, JointLTEvaluator, best_beam_coverage,
                    conditional_switch_coverage, random_beam_coverage, shared_depth)
from .blockage import (BlockageTree, TreeBatch, attenuation, blockage_count,
                       independent_penetration, sample_tree)
from .geometry import CascadeGeometry, normalize_angle
from .montecarlo import (Estimate, Realization, RealizationBatch, estimate_conditional,
                         estimate_coverage, interference, sample_interference,
                         sample_realization, simulate_beam_coverage)
from .params import (CascadeError, DivergentRegimeError, InvalidParameters,
                     IterationBudgetExhausted, ModelParams, NegligibleConditioningEvent)

__version__ = "0.1.0"
