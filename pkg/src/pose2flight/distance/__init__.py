from .features import CLASS_LABELS_CM, FEATURE_DIM, DistanceFeatures, build_features, view_onehot
from .network import (
    DegenerateDataset,
    DistanceEstimate,
    DistanceModel,
    UninitializedModel,
    continuous_distance,
    load_model,
    save_model,
    softmax,
    train,
)
from .synthetic import generate_synthetic_dataset, load_dataset, project_features, save_dataset

__all__ = [
    "CLASS_LABELS_CM",
    "FEATURE_DIM",
    "DistanceFeatures",
    "build_features",
    "view_onehot",
    "DegenerateDataset",
    "DistanceEstimate",
    "DistanceModel",
    "UninitializedModel",
    "continuous_distance",
    "load_model",
    "save_model",
    "softmax",
    "train",
    "generate_synthetic_dataset",
    "load_dataset",
    "project_features",
    "save_dataset",
]
