"""Peierls barriers and Aubry-Mather minimizers for monotone lattice models."""

from .action import (EstimateConstants, estimate_constants, lipschitz_constant, periodic_action,
                     periodic_gradient, periodic_hessian, residual, segment_action)
from .barrier import (BarrierProfile, ClassificationResult, EstimateReport, LimitReport,
                      barrier_irrational, barrier_profile, barrier_rational, classify,
                      near_periodicity_defect, robustness_sweep, verify_difference_estimate)
from .diophantine import (GOLDEN_MEAN, SILVER_ROOT, Convergent, Rational, RotationTarget,
                          convergents, diophantine_bound, holder_exponent_data)
from .kernels import BACKEND, set_backend
from .lattice import (Order, PeriodicConfiguration, Window, birkhoff_defect, compare,
                      hull_function_samples, translate)
from .potential import (CosineSeries, LocalPotential, OnsitePotential, PerturbedPotential,
                        check_conditions, from_descriptor, make_fk, make_twist)
from .solver import (MinimizerResult, NeighborPair, SolverOptions, minimize_constrained,
                     minimize_periodic, minmax_combine, neighbor_pair)

__version__ = "0.1.0"
