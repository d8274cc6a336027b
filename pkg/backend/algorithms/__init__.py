from .encoder_decoder import (
    AttentionUnit,
    ResidualBlock,
    DownsampleUnit,
    ForwardCache,
    BackwardResult,
    validate_model_config,
    param_shapes,
    init_params,
    time_embed,
    channel_attention,
    decode_frames,
    forward,
    backward,
    batch_gradients
)
from .preprocessing import standardize_run, shift_labels, sample_window
from .voting_predictor import window_count, window_starts, majority_vote, predict_run
from .trainer import schedule_for, prepare_run, frame_accuracy, train

__all__ = [
    'AttentionUnit',
    'ResidualBlock',
    'DownsampleUnit',
    'ForwardCache',
    'BackwardResult',
    'validate_model_config',
    'param_shapes',
    'init_params',
    'time_embed',
    'channel_attention',
    'decode_frames',
    'forward',
    'backward',
    'batch_gradients',
    'standardize_run',
    'shift_labels',
    'sample_window',
    'window_count',
    'window_starts',
    'majority_vote',
    'predict_run',
    'schedule_for',
    'prepare_run',
    'frame_accuracy',
    'train'
]
