"""
資料模型模組
"""
# 先導入基礎模型（沒有相依性的）
from .task import REST, TaskEvent, TaskDesign, RoiSpec, Phantom, RunData
from .network import ModelConfig, ModelWeights
from .optimization import OptState, ScheduleConfig
from .training import TrainConfig, EpochRecord, TrainHistory, Prediction
from .evaluation import (
    ConfusionMatrix,
    ClassScores,
    RocCurve,
    TransitionSummary,
    RunMetrics,
    MetricsReport
)
from .saliency import SaliencyMap, GlmResult, ContrastMap, PeakSeries

# 最後導入依賴其他模型的側車
from .manifest import GENERATOR_VERSION, RunManifest, WeightsManifest, MapSidecar

__all__ = [
    'REST',
    'TaskEvent',
    'TaskDesign',
    'RoiSpec',
    'Phantom',
    'RunData',
    'ModelConfig',
    'ModelWeights',
    'OptState',
    'ScheduleConfig',
    'TrainConfig',
    'EpochRecord',
    'TrainHistory',
    'Prediction',
    'ConfusionMatrix',
    'ClassScores',
    'RocCurve',
    'TransitionSummary',
    'RunMetrics',
    'MetricsReport',
    'SaliencyMap',
    'GlmResult',
    'ContrastMap',
    'PeakSeries',
    'GENERATOR_VERSION',
    'RunManifest',
    'WeightsManifest',
    'MapSidecar'
]
