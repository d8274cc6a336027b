from .tensor_ops import (
    Function,
    Conv3d,
    Relu,
    Identity,
    Dense,
    GlobalPool,
    Sigmoid,
    ChannelScale,
    as_tensor,
    output_extent,
    softmax,
    softmax_xent,
    ensure_finite
)
from .optimizer import AdamW, adamw_step, adamw_update, lr_at, validate_schedule

__all__ = [
    'Function',
    'Conv3d',
    'Relu',
    'Identity',
    'Dense',
    'GlobalPool',
    'Sigmoid',
    'ChannelScale',
    'as_tensor',
    'output_extent',
    'softmax',
    'softmax_xent',
    'ensure_finite',
    'AdamW',
    'adamw_step',
    'adamw_update',
    'lr_at',
    'validate_schedule'
]
