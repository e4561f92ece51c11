"""Side-information discriminant analysis (SILD), its multilinear extension
(MSIDA) and within-class covariance normalization (WCCN) for pair
verification with cosine scoring."""

from .evaluation import (CvReport, RocCurve, best_threshold_accuracy, kfold_evaluate,
                         roc_curve)
from .msida import MsidaModel, fit_msida, mode_scatters, project_tensor
from .numerics import (NotPositiveDefiniteError, cholesky_lower, regularize, sym_eig,
                       two_step_generalized_eig)
from .pairs import Dataset, PairSet, assign_folds, difference_vectors
from .scoring import ScoredPair, cosine, model_score, score_pairs, ssc_score
from .sild import SildModel, fit_sild, pair_scatter, project
from .synth import SynthConfig, generate_synthetic
from .tensor import fold, mode_product, unfold, vectorize
from .wccn import (METHODS, PipelineConfig, VerificationModel, WccnStack, compose,
                   fit_method, fit_pipeline, wccn_factor, within_covariance_projected)

__version__ = "0.1.0"
