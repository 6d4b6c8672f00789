"""Minimal float64 building blocks with hand-written reverse-mode gradients."""

from .checkpoint import CheckpointError, dump_checkpoint, read_checkpoint
from .functional import bce_loss, masked_softmax, sigmoid, softmax, tanh
from .gradcheck import finite_diff_gradients, max_relative_error, relative_error
from .layers import (
    NonFiniteError,
    attention,
    attention_backward,
    attention_forward,
    bidirectional_backward,
    bidirectional_forward,
    bidirectional_run,
    dense,
    dense_backward,
    dense_forward,
    gru_backward,
    gru_forward,
    gru_step,
    init_attention,
    init_dense,
    init_gru,
    init_lstm,
    lstm_backward,
    lstm_forward,
    lstm_step,
)
from .optim import AdamState, adam_step, clip_by_global_norm

__all__ = [
    "AdamState",
    "CheckpointError",
    "NonFiniteError",
    "adam_step",
    "attention",
    "attention_backward",
    "attention_forward",
    "bce_loss",
    "bidirectional_backward",
    "bidirectional_forward",
    "bidirectional_run",
    "clip_by_global_norm",
    "dense",
    "dense_backward",
    "dense_forward",
    "dump_checkpoint",
    "finite_diff_gradients",
    "gru_backward",
    "gru_forward",
    "gru_step",
    "init_attention",
    "init_dense",
    "init_gru",
    "init_lstm",
    "lstm_backward",
    "lstm_forward",
    "lstm_step",
    "masked_softmax",
    "max_relative_error",
    "read_checkpoint",
    "relative_error",
    "sigmoid",
    "softmax",
    "tanh",
]
