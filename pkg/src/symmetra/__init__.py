"""Lie point symmetry toolkit for third-order dispersive evolution
equations with two spatial directions.

The exact layer (expr, fields, prolong, linsolve, detsolve, liealg,
reduce, flows) works over Laurent polynomials with rational
coefficients; the numeric layer (phase, numverify) cross-checks the
exact results on grids and orbits.  catalog holds the named generators,
closed-form solutions, and optimal-system lists; tables diffs all of it
against the embedded reference displays.
"""

from .expr import (Expression, KernelError, JetCapError, var, param, jet,
                   const, opaque, opaque_field, exp_of, exp_atom, ln_of,
                   spow)
from .parser import parse, ParseError
from .fields import (VectorField, FCandidate, DispersionProfile,
                     PDEProblem)
from .prolong import (AnsatzSpec, apply_prolonged, symmetry_defect,
                      determining_equations)
from .detsolve import (SymmetryBasis, InfiniteFamily, find_symmetries,
                       verify_table)
from .liealg import (LieAlgebra, Representative, structure_constants,
                     identify_algebra, adjoint_equivalent,
                     optimal_system_check, qzk_normalize, ClosureError,
                     NOT_FOUND)
from .reduce import (ReducedODE, ReductionError, invariants_of,
                     reduce_by_pair, first_integral,
                     closed_form_solutions, verify_solution)
from .phase import (PhaseSystem, StationaryPoint, Trajectory, classify,
                    stationary_points, closed_form_stationary, integrate,
                    detect_periodic, summarize, parameter_sweep)
from .numverify import (Grid, TravellingProfile, residual, flow_check,
                        catalog_residuals, full_verification,
                        travelling_profile_from_orbit)
from .catalog import (FAMILY_KINDS, problem_for, generators_for,
                      optimal_reps, solution_catalog)
from .tables import (load_reference, reference_ids, check_table,
                     check_all, computed_commutators, computed_adjoint,
                     computed_generators, computed_classification,
                     computed_optimal, family_algebra)

__version__ = '0.1.0'

__all__ = [
    'Expression', 'KernelError', 'JetCapError', 'var', 'param', 'jet',
    'const', 'opaque', 'exp_of', 'exp_atom', 'ln_of', 'spow',
    'parse', 'ParseError',
    'VectorField', 'FCandidate', 'DispersionProfile', 'PDEProblem',
    'opaque_field',
    'AnsatzSpec', 'apply_prolonged', 'symmetry_defect',
    'SymmetryBasis', 'InfiniteFamily', 'find_symmetries', 'verify_table',
    'determining_equations',
    'LieAlgebra', 'Representative', 'structure_constants',
    'identify_algebra', 'adjoint_equivalent', 'optimal_system_check',
    'qzk_normalize', 'ClosureError', 'NOT_FOUND',
    'ReducedODE', 'ReductionError', 'invariants_of', 'reduce_by_pair',
    'first_integral', 'closed_form_solutions', 'verify_solution',
    'PhaseSystem', 'StationaryPoint', 'Trajectory', 'classify',
    'stationary_points', 'closed_form_stationary', 'integrate',
    'detect_periodic', 'summarize', 'parameter_sweep',
    'Grid', 'TravellingProfile', 'residual', 'flow_check',
    'catalog_residuals', 'full_verification',
    'travelling_profile_from_orbit',
    'FAMILY_KINDS', 'problem_for', 'generators_for', 'optimal_reps',
    'solution_catalog',
    'load_reference', 'reference_ids', 'check_table', 'check_all',
    'computed_commutators', 'computed_adjoint', 'computed_generators',
    'computed_classification', 'computed_optimal', 'family_algebra',
    '__version__',
]
