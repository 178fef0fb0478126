"""Subspace metrics, spectral perturbation bounds, and graph null-space analysis."""

from .bounds import (
    BoundEntry,
    BoundReport,
    IndexPartition,
    KappaPolicy,
    bound_davis_kahan,
    bound_full_main,
    bound_simplified,
    bound_tilde_free,
    dsp_between,
    evaluate_bounds,
    hat_partition,
    search_closest_invariant,
)
from .errors import SpecboundError
from .experiments import (
    ExperimentConfig,
    add_intercluster_edges,
    audit_random_matrices,
    reproduce_pipeline,
    synth_clustered_graph,
)
from .graphs import (
    QCut,
    WeightedGraph,
    align_basis,
    best_q_cut,
    components,
    coupling,
    coupling_sandwich,
    external_degree,
    laplacian,
    laplacian_diff_bound_check,
    max_external_degree,
    null_basis,
    nullspace_bound_known_base,
    nullspace_bound_known_perturbed,
    residual_identity_check,
)
from .setdist import (
    PointMultiset,
    SetPartitionResult,
    diam,
    hausdorff,
    sep,
    sep_preserving_check,
    sep_preserving_partition,
)
from .spectral import (
    NormalEigenSystem,
    bauer_fike_gap,
    coupling_matrix,
    decompose_normal,
    residual_norms,
)
from .subspace import (
    OrthonormalFrame,
    complement_frame,
    dsp_complement,
    dsp_overlap,
    dsp_projector,
    orthonormalize,
)

__version__ = "0.1.0"

__all__ = [
    "BoundEntry",
    "BoundReport",
    "ExperimentConfig",
    "IndexPartition",
    "KappaPolicy",
    "NormalEigenSystem",
    "OrthonormalFrame",
    "PointMultiset",
    "QCut",
    "SetPartitionResult",
    "SpecboundError",
    "WeightedGraph",
    "add_intercluster_edges",
    "align_basis",
    "audit_random_matrices",
    "bauer_fike_gap",
    "best_q_cut",
    "bound_davis_kahan",
    "bound_full_main",
    "bound_simplified",
    "bound_tilde_free",
    "complement_frame",
    "components",
    "coupling",
    "coupling_matrix",
    "coupling_sandwich",
    "decompose_normal",
    "diam",
    "dsp_between",
    "dsp_complement",
    "dsp_overlap",
    "dsp_projector",
    "evaluate_bounds",
    "external_degree",
    "hat_partition",
    "hausdorff",
    "laplacian",
    "laplacian_diff_bound_check",
    "max_external_degree",
    "null_basis",
    "nullspace_bound_known_base",
    "nullspace_bound_known_perturbed",
    "orthonormalize",
    "reproduce_pipeline",
    "residual_identity_check",
    "residual_norms",
    "search_closest_invariant",
    "sep",
    "sep_preserving_check",
    "sep_preserving_partition",
    "synth_clustered_graph",
]
