"""Numerical laboratory for skew-product endomorphisms f(x, y) = (l x, y + phi(x)) of the torus."""

from .circle_maps import ExpandingBase, Itinerary, backward_orbit, itinerary_distance, periodic_points
from .cohomology import (DichotomyReport, LivsicResult, Obstructed, Special, chain_sum, classify,
                         livsic_obstruction, solve_coboundary, solve_twisted, twisted_chain_sum)
from .ergodicity import (Observable, birkhoff_average, conjugated_witness_observable, correlation_sequence,
                         ergodicity_score, invariant_witness_value, standard_observables)
from .errors import SkewLabError
from .fourier import CircleFunction, parse_function, sup_norm
from .inverse_limit import (LinearModel, branch_inverse, cylinder_measure_estimate, itinerary_orbit,
                            reindex_itinerary)
from .system import Perturbation, SkewSystem, build_system, iterate
from .unstable import (AccessibilityWitness, CertifiedValue, NotFound, accessibility_witness, eta_estimate,
                       grow_unstable_leaf, h_value)

__version__ = "0.1.0"
