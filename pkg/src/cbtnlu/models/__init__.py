from .common import (CnnBatch, FeatureCache, FnnHead, GruBatch,
                     build_bow_features, build_cnn_features,
                     build_gru_features, collate_cnn, collate_gru)
from .gated_cnn import GatedCnn, GatedCnnConfig
from .gru_classifier import GruClassifier, GruClassifierConfig
from .linear_bow import (LinearBowParams, linear_proba, linear_score,
                         make_linear, sgd_instance)
from .baselines import chance_predict, majority_predict
from .train import (EpochRecord, TrainConfig, TrainResult, train_binary,
                    train_linear)
from .bundle import Predictor, load_bundle, save_bundle

__all__ = [
    "CnnBatch", "EpochRecord", "FeatureCache", "FnnHead", "GatedCnn",
    "GatedCnnConfig", "GruBatch", "GruClassifier", "GruClassifierConfig",
    "LinearBowParams", "Predictor", "TrainConfig", "TrainResult",
    "build_bow_features", "build_cnn_features", "build_gru_features",
    "chance_predict", "collate_cnn", "collate_gru",
    "linear_proba", "linear_score", "load_bundle",
    "majority_predict", "make_linear", "save_bundle", "sgd_instance",
    "train_binary", "train_linear",
]
