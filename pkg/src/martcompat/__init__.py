"""Compatibility structures of martensitic phase transformations.

Rank-one connections between wells, plastic junctions between habit plates
closed by slip, rigidity and local stability of those junctions, and
two-well corner feasibility, for cubic-to-orthorhombic transformations.
"""

from .compat import (IncompatibilityAngle, RankOneSolution, TwinSolution,
                     find_twin_axis, incompatibility_angle,
                     rank_one_connections, twin_solutions, two_fold_axes)
from .crystal import (HabitPlate, SlipSystem, Variant, bcc_slip_systems,
                      cubic_point_group, habit_plate_map, habit_plates,
                      variants)
from .errors import (DegenerateDenominator, HypothesisFailed,
                     MartcompatError, MiddleEigenvalueError, NoBranch,
                     NoTwinAxis, OrderingFailed, OrthogonalityFailed)
from .junction import (PlasticJunction, RigidityReport, SeparationReport,
                       ShearSolution, StabilityResult, WedgeGeometry,
                       build_vii_wedges, case_junction, closed_form_cases,
                       dislocation_density_norm, eta_xi,
                       find_plastic_junctions, junction_normal_closed_form,
                       local_rigidity, necessary_conditions,
                       nonrigid_family_check, scan_junctions,
                       separation_margin, solve_shear_amounts,
                       stability_check)
from .linalg import (DEFAULT_TOLERANCES, Tolerances, cofactor, polar,
                     rank_le_one, rotation_angle_deg, rotation_axis_angle,
                     sym_eigen)
from .twowell import (KqcCoordinates, TwinParams, TwoWellFeasibility,
                      kqc_membership, twin_params, two_well_bc_feasible,
                      two_well_bc_feasible_complement, twodim_hull_check)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
