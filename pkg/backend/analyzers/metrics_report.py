"""
單一 run 的完整評估與跨 run 彙總
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import DegenerateInputError, ShapeError
from ..models import MetricsReport, Prediction, RunMetrics, TaskDesign
from .classification_metrics import class_scores, confusion, roc_auc
from .sequence_metrics import hrf_similarity, segment_accuracy, transition_lag

logger = logging.getLogger(__name__)

PER_CLASS_KEYS = ("recall", "f1", "auc")


class RunEvaluator:
    """以同一個 HRF 與分段數評估多個 run"""

    def __init__(self, hrf: np.ndarray, n_segments: int = 4):
        self.hrf = np.asarray(hrf, dtype=np.float64)
        self.n_segments = n_segments

    def evaluate(self, prediction: Prediction, truth: np.ndarray, design: TaskDesign,
                 run_id: str = "run") -> RunMetrics:
        """
        計算單一 run 的所有指標

        Args:
            prediction: 投票推論結果
            truth: 與預測同一時間基準（已位移）的真實標籤
            design: 刺激時序（提供狀態名稱與 T）
            run_id: 報告中的 run 名稱

        Returns:
            RunMetrics
        """
        truth = np.asarray(truth, dtype=np.int64)
        pred = np.asarray(prediction.labels, dtype=np.int64)
        if pred.shape != truth.shape:
            raise ShapeError(f"{run_id}：預測長度 {pred.shape} 與真實長度 {truth.shape} 不符")
        n_classes = prediction.mean_probs.shape[1]
        names = (list(design.conditions) if design.n_conditions == n_classes
                 else [f"class{k}" for k in range(n_classes)])

        cm = confusion(pred, truth, n_classes)
        scores = class_scores(cm)

        auc: List[Optional[float]] = []
        roc_points: List[List[List[float]]] = []
        for k in range(n_classes):
            try:
                curve = roc_auc(prediction.mean_probs[:, k], truth == k)
            except DegenerateInputError:
                logger.warning("%s：狀態 %s 只有單一類別，ROC 無定義", run_id, names[k])
                auc.append(None)
                roc_points.append([])
                continue
            auc.append(curve.auc)
            roc_points.append(curve.points())

        return RunMetrics(
            run_id=run_id,
            condition_names=names,
            n_frames=int(truth.size),
            accuracy=cm.accuracy,
            confusion=cm.counts.tolist(),
            recall=scores.recall.tolist(),
            precision=scores.precision.tolist(),
            f1=scores.f1.tolist(),
            recall_undefined=scores.recall_undefined.tolist(),
            precision_undefined=scores.precision_undefined.tolist(),
            macro_recall=scores.macro_recall,
            macro_precision=scores.macro_precision,
            macro_f1=scores.macro_f1,
            auc=auc,
            roc_points=roc_points,
            hrf_pcc=hrf_similarity(pred, truth, design, self.hrf),
            segment_accuracy=segment_accuracy(pred, truth, min(self.n_segments, truth.size)),
            transitions=transition_lag(pred, truth),
            truth=truth.tolist(),
            pred=pred.tolist(),
        )

    def report(self, items: Sequence[Tuple[Prediction, np.ndarray, TaskDesign, str]]) -> MetricsReport:
        """評估多個 (prediction, truth, design, run_id) 並附上跨 run 彙總"""
        runs = [self.evaluate(pred, truth, design, run_id) for pred, truth, design, run_id in items]
        return MetricsReport(runs=runs, aggregate=aggregate_runs(runs), n_segments=self.n_segments)


def evaluate_run(prediction: Prediction, truth: np.ndarray, design: TaskDesign, hrf: np.ndarray,
                 run_id: str = "run", n_segments: int = 4) -> RunMetrics:
    return RunEvaluator(hrf, n_segments).evaluate(prediction, truth, design, run_id)


def _mean_sd(values: Sequence[Optional[float]]) -> Tuple[Optional[float], Optional[float]]:
    defined = [v for v in values if v is not None]
    if not defined:
        return None, None
    sd = float(np.std(defined, ddof=1)) if len(defined) > 1 else 0.0
    return float(np.mean(defined)), sd


def aggregate_runs(runs: Sequence[RunMetrics]) -> Dict[str, Dict[str, List[Optional[float]]]]:
    """
    跨 run 的 mean 與樣本標準差（無定義的值不納入）

    Returns:
        指標 -> {"mean": [...], "sd": [...]}；逐類別指標依類別順序，
        hrf_pcc 依非 rest 狀態順序，accuracy / macro_f1 為單一元素
    """
    if not runs:
        return {}
    aggregate: Dict[str, Dict[str, List[Optional[float]]]] = {}

    for key in PER_CLASS_KEYS:
        columns = zip(*[getattr(run, key) for run in runs])
        pairs = [_mean_sd(column) for column in columns]
        aggregate[key] = {"mean": [p[0] for p in pairs], "sd": [p[1] for p in pairs]}

    names = list(runs[0].hrf_pcc.keys())
    pairs = [_mean_sd([run.hrf_pcc.get(name) for run in runs]) for name in names]
    aggregate["hrf_pcc"] = {"mean": [p[0] for p in pairs], "sd": [p[1] for p in pairs]}

    for key in ("accuracy", "macro_f1"):
        mean, sd = _mean_sd([getattr(run, key) for run in runs])
        aggregate[key] = {"mean": [mean], "sd": [sd]}
    return aggregate
