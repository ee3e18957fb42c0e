"""Maximum weighted clique search on binding interaction graphs, driven by a
simulated Gaussian boson sampler with threshold detectors.

The functional core lives in :mod:`gbsdock.graphs`, :mod:`gbsdock.docking`,
:mod:`gbsdock.gbs`, :mod:`gbsdock.samplers`, :mod:`gbsdock.solvers`, and the
experiment layer in :mod:`gbsdock.instances` / :mod:`gbsdock.harness`.
Scikit-learn style wrappers are in :mod:`gbsdock.estimators`; the command
line entry point is ``gbsdock`` (see :mod:`gbsdock.cli`).
"""

__version__ = "0.1.0"

from .exceptions import (
    DegenerateDistributionError,
    EncodingError,
    InstanceGenerationError,
    NumericalError,
    ValidationError,
)
from .graphs import (
    WeightedGraph,
    as_vertex_set,
    clique_weight,
    complete_graph,
    degree,
    degrees,
    from_edges,
    graph_from_dict,
    graph_to_dict,
    induced_subgraph,
    is_clique,
    laplacian,
    load_graph,
    max_weighted_clique_bruteforce,
    max_weighted_clique_with_runner_up,
    save_graph,
    to_dimacs,
)
from .docking import (
    BindingInteractionGraph,
    PharmacophoreLabel,
    PharmacophorePoint,
    PotentialTable,
    build_binding_interaction_graph,
    build_labeled_distance_graph,
    default_potential,
    load_points,
    load_potential,
    save_points,
)
from .gbs import (
    Encoding,
    GaussianState,
    apply_loss,
    build_encoding,
    hafnian,
    mean_clicks,
    mean_photon_number,
    state_from_encoding,
    threshold_probability,
    tune_c_for_clicks,
    vacuum_probability,
    vacuum_state,
)
from .samplers import (
    SampleBatch,
    classical_baseline,
    estimate_moments,
    load_batch,
    sample_postselected,
    sample_threshold_chain,
    save_batch,
)
from .solvers import (
    SolveResult,
    greedy_shrink,
    hybrid_pipeline,
    local_search,
    random_search,
    save_solve_result,
)
from .instances import (
    PlantedInstance,
    generate_planted_instance,
    load_instance,
    save_instance,
)
from .harness import (
    ExperimentConfig,
    load_config,
    resolve_instance,
    run_figure3,
    run_figure4,
    run_figure5_6,
    run_noise_study,
    save_config,
    wilson_interval,
)
from .estimators import BindingGraphBuilder, GBSCliqueSearch

__all__ = [
    "__version__",
    "ValidationError",
    "NumericalError",
    "EncodingError",
    "DegenerateDistributionError",
    "InstanceGenerationError",
    "WeightedGraph",
    "from_edges",
    "complete_graph",
    "as_vertex_set",
    "induced_subgraph",
    "is_clique",
    "clique_weight",
    "degree",
    "degrees",
    "laplacian",
    "max_weighted_clique_bruteforce",
    "max_weighted_clique_with_runner_up",
    "graph_to_dict",
    "graph_from_dict",
    "save_graph",
    "load_graph",
    "to_dimacs",
    "PharmacophoreLabel",
    "PharmacophorePoint",
    "PotentialTable",
    "BindingInteractionGraph",
    "build_labeled_distance_graph",
    "build_binding_interaction_graph",
    "default_potential",
    "load_potential",
    "load_points",
    "save_points",
    "Encoding",
    "GaussianState",
    "hafnian",
    "build_encoding",
    "state_from_encoding",
    "apply_loss",
    "vacuum_state",
    "vacuum_probability",
    "threshold_probability",
    "mean_clicks",
    "mean_photon_number",
    "tune_c_for_clicks",
    "SampleBatch",
    "sample_threshold_chain",
    "sample_postselected",
    "classical_baseline",
    "estimate_moments",
    "save_batch",
    "load_batch",
    "SolveResult",
    "random_search",
    "greedy_shrink",
    "local_search",
    "hybrid_pipeline",
    "save_solve_result",
    "PlantedInstance",
    "generate_planted_instance",
    "save_instance",
    "load_instance",
    "ExperimentConfig",
    "save_config",
    "load_config",
    "resolve_instance",
    "run_figure3",
    "run_figure4",
    "run_figure5_6",
    "run_noise_study",
    "wilson_interval",
    "GBSCliqueSearch",
    "BindingGraphBuilder",
]
