"""
分類指標：混淆矩陣、各狀態 recall / precision / F1、one-vs-rest ROC
"""
import logging

import numpy as np
from sklearn.metrics import auc, confusion_matrix, roc_curve

from ..exceptions import DegenerateInputError, LabelError, ShapeError
from ..models import ClassScores, ConfusionMatrix, RocCurve

logger = logging.getLogger(__name__)


def confusion(pred: np.ndarray, truth: np.ndarray, n_classes: int) -> ConfusionMatrix:
    """
    K×K 混淆矩陣，counts[truth[i], pred[i]] 逐幀累加

    Args:
        pred: 預測標籤
        truth: 真實標籤
        n_classes: K

    Returns:
        ConfusionMatrix
    """
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ShapeError(f"預測長度 {pred.shape} 與真實長度 {truth.shape} 不符")
    for name, labels in (("預測", pred), ("真實", truth)):
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            raise LabelError(f"{name}標籤超出範圍 [0, {n_classes}): {labels.min()}..{labels.max()}")
    counts = (confusion_matrix(truth, pred, labels=np.arange(n_classes)).astype(np.int64)
              if pred.size else np.zeros((n_classes, n_classes), dtype=np.int64))
    return ConfusionMatrix(counts)


def class_scores(cm: ConfusionMatrix) -> ClassScores:
    """
    各狀態 recall（各狀態準確率）、precision 與 F1

    空列（真實未出現）或空欄（從未預測）的分數定義為 0 並標記。
    """
    counts = cm.counts.astype(np.float64)
    diag = np.diag(counts)
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)

    recall_undefined = rows == 0
    precision_undefined = cols == 0
    recall = np.divide(diag, rows, out=np.zeros_like(diag), where=~recall_undefined)
    precision = np.divide(diag, cols, out=np.zeros_like(diag), where=~precision_undefined)
    denom = recall + precision
    f1 = np.divide(2 * recall * precision, denom, out=np.zeros_like(diag), where=denom > 0)

    if recall_undefined.any():
        logger.warning("真實標籤中未出現的類別: %s（recall 記為 0）",
                       np.flatnonzero(recall_undefined).tolist())
    if precision_undefined.any():
        logger.warning("從未被預測的類別: %s（precision 記為 0）",
                       np.flatnonzero(precision_undefined).tolist())
    return ClassScores(recall=recall, precision=precision, f1=f1,
                       recall_undefined=recall_undefined,
                       precision_undefined=precision_undefined)


def roc_auc(scores: np.ndarray, truth_indicator: np.ndarray) -> RocCurve:
    """
    one-vs-rest ROC 曲線與梯形法 AUC

    sklearn 的 roc_curve 保留所有不重複分數（由高至低）作為門檻，點由 (0,0) 單調走到 (1,1)。
    AUC 等於 P(score⁺ > score⁻) + ½P(平手)。

    Args:
        scores: 每幀屬於該類的機率
        truth_indicator: 每幀是否屬於該類

    Returns:
        RocCurve
    """
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(truth_indicator).astype(bool)
    if scores.shape != positive.shape:
        raise ShapeError(f"分數長度 {scores.shape} 與標記長度 {positive.shape} 不符")
    n_pos = int(positive.sum())
    n_neg = int(positive.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateInputError(f"ROC 需要正負樣本各至少一個（正 {n_pos}，負 {n_neg}）")

    fpr, tpr, thresholds = roc_curve(positive.astype(np.int64), scores, pos_label=1,
                                     drop_intermediate=False)
    thresholds = np.r_[np.inf, thresholds[1:]]
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=float(auc(fpr, tpr)))
