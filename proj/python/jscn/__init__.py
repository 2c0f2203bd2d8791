"""Joint spectral convolutional network for cross-domain recommendation.

Thin python surface over the C++ core: per-domain spectral graph
convolutions on user-item bipartite graphs, jointly trained with a BPR
ranking loss and an adaptive cross-domain alignment of shared users.
"""

from ._core import (
    BipartiteDomain,
    DatasetBundle,
    DomainParameters,
    DomainSpectrum,
    EmbeddingSet,
    EvalReport,
    GradCheckReport,
    InputError,
    Laplacian,
    LossBreakdown,
    ModelHyperparams,
    NumericalError,
    SharedUserIndex,
    SyntheticSpec,
    TrainConfig,
    TrainResult,
    Triple,
    TripleBatch,
    align_shared_users,
    build_feedback_matrix,
    build_laplacian,
    cross_domain_loss,
    eigendecompose,
    evaluate,
    filter_min_interactions,
    forward,
    generate_synthetic,
    in_domain_loss,
    init_parameters,
    load_bundle,
    load_ratings_edges,
    map_at_k,
    map_to_invariant,
    predict_scores,
    rank_items_for_user,
    recall_at_k,
    regularization,
    run_gradcheck,
    sample_triples,
    save_bundle,
    spectral_conv_layer,
    total_loss,
    train,
)

__all__ = [
    "BipartiteDomain",
    "DatasetBundle",
    "DomainParameters",
    "DomainSpectrum",
    "EmbeddingSet",
    "EvalReport",
    "GradCheckReport",
    "InputError",
    "Laplacian",
    "LossBreakdown",
    "ModelHyperparams",
    "NumericalError",
    "SharedUserIndex",
    "SyntheticSpec",
    "TrainConfig",
    "TrainResult",
    "Triple",
    "TripleBatch",
    "align_shared_users",
    "build_feedback_matrix",
    "build_laplacian",
    "cross_domain_loss",
    "eigendecompose",
    "evaluate",
    "filter_min_interactions",
    "forward",
    "generate_synthetic",
    "in_domain_loss",
    "init_parameters",
    "load_bundle",
    "load_ratings_edges",
    "map_at_k",
    "map_to_invariant",
    "predict_scores",
    "rank_items_for_user",
    "recall_at_k",
    "regularization",
    "run_gradcheck",
    "sample_triples",
    "save_bundle",
    "spectral_conv_layer",
    "total_loss",
    "train",
]
