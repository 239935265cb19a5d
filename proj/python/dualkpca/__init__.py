"""Kernel PCA through its dual objective, with Huber and eps-insensitive variants."""

from ._dualkpca import (
    DataError,
    KpcaModel,
    MODEL_FORMAT,
    NumericError,
    ParseError,
    SingularityError,
    ToleranceNotReached,
    UsageError,
    center_gram,
    check_critical_point,
    controlled_spectrum_gram,
    dca_solve,
    dual_cost,
    dual_residual,
    fit,
    grad_pi,
    gram,
    kpca_dense_eig,
    lbfgs_solve,
    load_model,
    pi,
    project_l1_ball,
    prox_psi_star,
    rsvd,
    sigma_rule,
    synth_gaussian,
)

__version__ = "0.1.0"
