"""Feature selection toolkit: PCA reduction, grey wolf wrapper selection,
SVM/k-NN classification, and evaluation statistics."""

from .bench import (ComparisonAggregate, ComparisonRow, GaParams,
                    OptimizerSpec, PsoParams, compare_selectors,
                    run_optimizer, select_with, test_functions)
from .classify import (ConfusionMatrix, KnnConfig, KnnModel, McNemarResult,
                       Metrics, RocCurve, RocResult, SvmConfig, SvmModel,
                       chi_square_sf, confusion, fit_classifier, mcnemar,
                       metrics, predict, rbf_kernel, roc_ova, train_knn,
                       train_svm)
from .cli import EvalReport, PipelineConfig, run_pipeline
from .dataspace import (LabeledFeatureSet, SplitSpec, concat_features,
                        load_feature_set, merge_rows, save_feature_set, split,
                        synth_dataset)
from .errors import DataError, NumericalError
from .gwo import (FeatureMask, GwoConfig, WolfPack, binarize, gwo_step,
                  init_pack, optimize, select_features, selection_fitness)
from .pca import (PcaModel, StandardizationParams, fit_pca, jacobi_eigh,
                  load_pca_model, save_pca_model, standardize, transform)

__version__ = "0.1.0"
