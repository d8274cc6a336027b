"""
評估指標資料模型
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from dataclasses_json import dataclass_json


@dataclass
class ConfusionMatrix:
    """K×K 混淆矩陣（列 = 真實，欄 = 預測）"""
    counts: np.ndarray

    @property
    def n_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total) if self.total else 0.0


@dataclass
class ClassScores:
    """各狀態的 recall（各狀態準確率）、precision、F1"""
    recall: np.ndarray
    precision: np.ndarray
    f1: np.ndarray
    recall_undefined: np.ndarray  # 真實標籤中未出現的類別
    precision_undefined: np.ndarray  # 從未被預測的類別

    @property
    def macro_recall(self) -> float:
        return float(np.mean(self.recall))

    @property
    def macro_precision(self) -> float:
        return float(np.mean(self.precision))

    @property
    def macro_f1(self) -> float:
        return float(np.mean(self.f1))


@dataclass
class RocCurve:
    """單一狀態的 one-vs-rest ROC"""
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    def points(self) -> List[List[float]]:
        return [[float(f), float(t)] for f, t in zip(self.fpr, self.tpr)]


@dataclass_json
@dataclass
class TransitionSummary:
    """狀態轉換時間偏差摘要"""
    lags: List[int] = field(default_factory=list)
    median_abs_lag: Optional[float] = None
    within_two_frames: Optional[float] = None


@dataclass_json
@dataclass
class RunMetrics:
    """單一 run 的評估結果（可序列化為 JSON）"""
    run_id: str
    condition_names: List[str]
    n_frames: int
    accuracy: float
    confusion: List[List[int]]
    recall: List[float]
    precision: List[float]
    f1: List[float]
    recall_undefined: List[bool]
    precision_undefined: List[bool]
    macro_recall: float
    macro_precision: float
    macro_f1: float
    auc: List[Optional[float]]
    roc_points: List[List[List[float]]]
    hrf_pcc: Dict[str, Optional[float]]
    segment_accuracy: List[float]
    transitions: TransitionSummary
    truth: List[int]
    pred: List[int]


@dataclass_json
@dataclass
class MetricsReport:
    """多 run 評估報告；aggregate 為跨 run 的 mean / sd"""
    runs: List[RunMetrics] = field(default_factory=list)
    aggregate: Dict[str, Dict[str, List[Optional[float]]]] = field(default_factory=dict)
    aggregate_axis: str = "runs"
    n_segments: int = 4
