from . import (
    generate,
    train,
    predict,
    evaluate,
    saliency,
    report
)

__all__ = [
    'generate',
    'train',
    'predict',
    'evaluate',
    'saliency',
    'report'
]
