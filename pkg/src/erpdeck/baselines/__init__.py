"""Classical decoders: LDA family, Bayesian LDA and xDAWN + tangent space."""

from .linear import (
    LinearScorer,
    fit_blda,
    fit_elastic_net,
    fit_linear_svm,
    fit_shrinkage_lda,
    fit_swlda,
    ledoit_wolf,
)
from .pipelines import (
    CLASSICAL,
    CLASSICAL_IDS,
    BldaPipeline,
    ClassicalPipeline,
    RiemannPipeline,
    ShrinkageLdaPipeline,
    SwldaPipeline,
    XdawnTsEnPipeline,
    XdawnTsSvmPipeline,
)
from .riemann import (
    TangentSpace,
    Xdawn,
    airm_distance,
    augmented_covariances,
    fit_xdawn,
    log_euclidean_mean,
    riemann_mean,
    tangent_vectors,
    ts_features,
    upper_vec,
)
