"""Checkerboard target centre measurement in unordered point clouds.

Template matching in 3D: a synthetic checkerboard template is registered to
a scan with point-to-plane ICP and refined with a two-term coloured ICP; the
measured centre is the template centre moved through the final transform.
"""

from .cloud import PointCloud, take, with_attributes
from .harness import (
    CellStats,
    SweepConfig,
    TrialConfig,
    TrialRecord,
    default_icp_params,
    noise_seed,
    read_results,
    run_sweep,
    run_trial,
    trial_seed,
    write_results,
)
from .io import PointCloudFormatError, read_point_cloud, write_point_cloud
from .neighbours import NeighbourIndex, build_index, nearest, radius_neighbours
from .normals import estimate_normals, fit_plane
from .pipeline import MeasureConfig, MeasureReport, PipelineError, measure_target
from .preprocess import (
    Aabb,
    PlaneModel,
    binarize_intensity,
    crop_aabb,
    intensity_to_colour,
    otsu_threshold,
    ransac_plane,
    remove_outliers,
    resize_template,
    stretch_intensity,
    voxel_downsample,
)
from .registration import (
    ColouredIcpParams,
    ColourGradientField,
    IcpParams,
    RegistrationResult,
    colour_score,
    coloured_icp,
    coloured_icp_multiscale,
    compute_colour_gradients,
    icp_point_to_plane,
)
from .synth import (
    CheckerboardSpec,
    NoiseSpec,
    Perturbation,
    add_noise,
    generate_checkerboard,
    perturbation_to_transform,
)
from .transforms import (
    RigidTransform,
    apply_transform,
    compose,
    invert,
    rotation_about_axis,
    target_centre,
)

__version__ = "0.1.0"
