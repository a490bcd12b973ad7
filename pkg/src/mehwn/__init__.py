"""Delay-to-distance simulation and analytical bounds for duty-cycled wireless networks.

The package samples random-connection-model networks on a bounded region,
measures cluster and lattice-component statistics, floods messages through
per-slot clusters to estimate the delay-to-distance ratio, and evaluates
the closed-form lower and upper bounds that bracket it.
"""

__version__ = "0.1.0"

from .bounds import (  # noqa: F401
    BoundsReport,
    ModelParams,
    SeriesControl,
    build_bounds_report,
    expected_global_diameter_upper,
    expected_link_delay,
    expected_size_upper,
    gamma_lower,
    gamma_upper,
    link_delay_pmf,
    occupation_probability,
    size_prob_upper,
    wang_gamma_upper,
    wang_size_approx,
)
from .config import NetworkConfig  # noqa: F401
from .errors import (  # noqa: F401
    ConfigError,
    DivergentSeriesError,
    EstimationError,
    ModelViolationError,
    ParameterError,
)
from .geometry import (  # noqa: F401
    Cluster,
    InstantaneousGraph,
    PointSet,
    Region,
    activate,
    build_instantaneous_graph,
    cluster_extent_x,
    clusters,
    detect_percolation,
    rotate_frame,
    sample_ppp,
    shortest_path_hops,
    thin,
)
from .lattice import (  # noqa: F401
    EdgeOccupancy,
    Lattice,
    LatticeComponent,
    build_lattice,
    component_diameter,
    connected_components,
    map_cluster_to_component,
    neighboring_vertices,
    occupy_edges,
    point_in_component_area,
)
from .simulator import (  # noqa: F401
    DelayTrialResult,
    FloodState,
    KappaEstimate,
    component_statistics,
    estimate_kappa,
    gamma_experiment,
    run_flood_trial,
    select_pairs,
)
