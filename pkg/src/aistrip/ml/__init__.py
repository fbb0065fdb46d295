"""Classifiers, evaluation, importance, and grid search."""
from aistrip.ml.gnb import GaussianNB
from aistrip.ml.metrics import EvalReport, confusion_matrix, evaluate, roc_auc_ovr
from aistrip.ml.models import DEFAULT_PARAMS, FAMILIES, SMOTE_MODES, TrainedModel, fit_pipeline, make_model, train
from aistrip.ml.search import DEFAULT_GRIDS, CvResult, GridError, cross_validate, expand_grid, grid_search
from aistrip.ml.svm import SVM
from aistrip.ml.tree import DecisionTree, RandomForest, gini_importance

__all__ = [
    "GaussianNB", "SVM", "DecisionTree", "RandomForest", "TrainedModel",
    "EvalReport", "evaluate", "confusion_matrix", "roc_auc_ovr", "gini_importance",
    "CvResult", "GridError", "grid_search", "cross_validate", "expand_grid",
    "DEFAULT_GRIDS", "DEFAULT_PARAMS", "FAMILIES", "SMOTE_MODES", "make_model", "fit_pipeline", "train",
]
