"""The weak LSTM filter, the Kusuri DNN, embeddings and training."""

from .embeddings import EmbeddingFormatError, EmbeddingTable, load_embeddings, write_embeddings
from .networks import (
    KUSURI,
    WEAK,
    ModelParams,
    Predictor,
    char_encode,
    encode_batch,
    forward_kusuri,
    forward_weak,
    init_kusuri,
    init_weak,
    loss_and_grads,
    predict_proba,
)
from .training import (
    EpochRecord,
    TrainConfig,
    TrainResult,
    build_weak_training_set,
    load_model,
    save_model,
    train,
    train_accuracy,
)

__all__ = [
    "KUSURI",
    "WEAK",
    "EmbeddingFormatError",
    "EmbeddingTable",
    "EpochRecord",
    "ModelParams",
    "Predictor",
    "TrainConfig",
    "TrainResult",
    "build_weak_training_set",
    "char_encode",
    "encode_batch",
    "forward_kusuri",
    "forward_weak",
    "init_kusuri",
    "init_weak",
    "load_embeddings",
    "load_model",
    "loss_and_grads",
    "predict_proba",
    "save_model",
    "train",
    "train_accuracy",
    "write_embeddings",
]
