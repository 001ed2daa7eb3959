"""viewplan: minimum-length 3D Dubins airplane inspection tours.

The pipeline: approximate each target's visibility volume as a closed
triangular mesh, sample candidate vehicle configurations per volume, build
an asymmetric cost matrix (exact 3D paths, a pitch-limited lower bound, or
constant-altitude planar paths), reduce the one-per-cluster tour problem
to an ATSP, solve it, and stitch the chosen configurations into flyable
3D paths.
"""

from .dubins import (Configuration, DubinsPath2, DubinsPath3, ModifiedDubinsPath,
                     VehicleParams, plan_2d, plan_3d, plan_3d_lengths,
                     plan_modified_2d, sample_path)
from .errors import InfeasibleError, ValidationError
from .geom import (Polygon2, TriMesh, element_area, load_obj, polygon_area,
                   polygon_perimeter, save_obj, slice_mesh, tangent_angle,
                   uniform_perimeter_points)
from .sampling import (ClusterSamples, SamplingParams, optimized_altitude,
                       sample_edge_3d, sample_entry_pose, sample_global_weighted_face,
                       sample_overhead, sample_random_face)
from .scenario import (ExperimentConfig, ScenarioParams, TrialRecord,
                       generate_city, place_targets, plan_with_algorithm,
                       run_experiment, validate_scenario)
from .tour import (ClusterGraph, Tour, bisect_angle_approx, build_graph,
                   extract_tour, modified_euclidean, noon_bean, plan_metspn,
                   solve_atsp, solve_dtspn)
from .visibility import (Environment, ExtrudedObject, SensorParams, Target,
                         build_visibility_mesh, decimate_mesh, line_of_sight,
                         mesh_z_extent, points_in_mesh, visibility_predicate)

__version__ = "0.1.0"
