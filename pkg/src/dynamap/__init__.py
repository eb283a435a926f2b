"""Diffusion-map analysis for data whose similarity kernel changes over a parameter space.

The library builds per-parameter diffusion operators, compares points and
whole graphs across parameters through spectral distance formulas, rotates
every parameter's embedding into a common coordinate system, and supports
second-level (graph-of-graphs and historical) embeddings. A CLI named
``dynamap`` wraps the pipelines.
"""

from .datasets import (
    CubeFamily,
    SensorSpec,
    TorusSpec,
    pinched_torus_family,
    sample_torus,
    standard_map_orbits,
    synthetic_cube_family,
)
from .distances import (
    GramMatrix,
    asymptotic_diffusion_distance,
    asymptotic_distance_map,
    asymptotic_global_distance,
    diffusion_distance,
    diffusion_distance_map,
    diffusion_distance_matrix,
    direct_diffusion_distance,
    direct_global_distance,
    global_diffusion_distance,
    global_distance_matrix,
    gram_matrix,
    subgraph_diffusion_distance,
)
from .embeddings import (
    DiffusionEmbedding,
    RotationOperator,
    canonical_subgraph_basis,
    common_embedding,
    diffusion_map,
    reference_subgraph_basis,
    rotation,
    subgraph_rotation,
    truncation_residuals,
)
from .exceptions import (
    CalibrationError,
    ConnectivityError,
    CorrespondenceError,
    DegeneracyError,
    DynamapError,
    InputError,
    NumericalError,
)
from .kernels import KernelMatrix, PointCloud, calibrate_epsilon, gaussian_kernel
from .metagraph import (
    EXPONENTIAL,
    INNER_PRODUCT,
    MEDIAN,
    HistoricalGraph,
    MetaGraph,
    Trajectory,
    historical_embedding,
    historical_kernel,
    meta_embedding,
    meta_kernel,
)
from .operators import (
    DiffusionMatrix,
    SpectralDecomposition,
    diffusion_matrix,
    graph_laplacian,
    kernel_power_row,
    spectral_decomposition,
    transition_matrix,
    truncate,
)
from .sampling import ConvergenceReport, RateEstimate, convergence_study

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "ConnectivityError",
    "ConvergenceReport",
    "CorrespondenceError",
    "CubeFamily",
    "DegeneracyError",
    "DiffusionEmbedding",
    "DiffusionMatrix",
    "DynamapError",
    "EXPONENTIAL",
    "GramMatrix",
    "HistoricalGraph",
    "INNER_PRODUCT",
    "InputError",
    "KernelMatrix",
    "MEDIAN",
    "MetaGraph",
    "NumericalError",
    "PointCloud",
    "RateEstimate",
    "RotationOperator",
    "SensorSpec",
    "SpectralDecomposition",
    "TorusSpec",
    "Trajectory",
    "asymptotic_diffusion_distance",
    "asymptotic_distance_map",
    "asymptotic_global_distance",
    "calibrate_epsilon",
    "canonical_subgraph_basis",
    "common_embedding",
    "convergence_study",
    "diffusion_distance",
    "diffusion_distance_map",
    "diffusion_distance_matrix",
    "diffusion_map",
    "diffusion_matrix",
    "direct_diffusion_distance",
    "direct_global_distance",
    "gaussian_kernel",
    "global_diffusion_distance",
    "global_distance_matrix",
    "gram_matrix",
    "graph_laplacian",
    "historical_embedding",
    "historical_kernel",
    "kernel_power_row",
    "meta_embedding",
    "meta_kernel",
    "pinched_torus_family",
    "reference_subgraph_basis",
    "rotation",
    "sample_torus",
    "spectral_decomposition",
    "standard_map_orbits",
    "subgraph_diffusion_distance",
    "subgraph_rotation",
    "synthetic_cube_family",
    "transition_matrix",
    "truncate",
    "truncation_residuals",
]
