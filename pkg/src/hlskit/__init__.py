"""Hausdorff leaf spaces of discretized codimension-one foliations."""

from .config import DEFAULTS
from .convergence import WarpSequence, check_density_condition, iff_audit, run_convergence
from .errors import (
    DisconnectedError,
    HlsError,
    NotSegmentLike,
    OracleCapError,
    SearchBudgetError,
    StructuralError,
)
from .foliation import (
    TANGENTIAL,
    TRANSVERSE,
    Edge,
    FoliatedComplex,
    HlsSpace,
    WarpSpec,
    check_complex,
    fuse_leaves,
    glue_complexes,
    hls,
    merge_vertices,
    segment_parameter,
    validate_complex,
    warp,
)
from .generators import (
    generate,
    kronecker_torus,
    product_ibundle,
    realization_pairs,
    realization_regions,
    realize_graph,
    reeb_annulus,
    star_block,
)
from .gh import (
    Correspondence,
    GhEstimate,
    correspondence,
    gh_estimate,
    gh_exact,
    gh_heuristic,
    gromov_net_bound,
    lower_bounds,
)
from .graph import (
    MetricGraph,
    ball_measure,
    extract_graph,
    glue_graphs,
    matched_points,
    measure_ball_check,
    sample_graph,
)
from .metric import (
    FiniteMetricSpace,
    WeightedGraphSpace,
    eps_net,
    find_isometry,
    geodesic_metric,
    k_net,
    validate_metric,
)
from .quotient import QuotientResult, collapse_subset, disjoint_union, glue, orbit_quotient, orbits, quotient_metric

__version__ = "0.1.0"
