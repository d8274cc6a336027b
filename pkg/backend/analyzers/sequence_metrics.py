"""
時間序列指標：PCC、HRF 卷積序列相似度、分段準確率、狀態轉換偏差
"""
import logging
from typing import Dict, List, Optional

import numpy as np

from ..exceptions import DegenerateInputError, ShapeError
from ..models import REST, TaskDesign, TransitionSummary

logger = logging.getLogger(__name__)


def pcc(a: np.ndarray, b: np.ndarray) -> float:
    """
    Pearson 相關係數

    Args:
        a, b: 等長（≥ 2）且非常數的序列

    Returns:
        [-1, 1] 的相關係數
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ShapeError(f"PCC 需要等長且長度 ≥ 2 的序列，收到 {a.shape} 與 {b.shape}")
    ac = a - a.mean()
    bc = b - b.mean()
    saa = float(ac @ ac)
    sbb = float(bc @ bc)
    if np.ptp(a) == 0 or np.ptp(b) == 0 or saa == 0 or sbb == 0:
        raise DegenerateInputError("PCC 輸入為常數序列")
    return float(np.clip((ac @ bc) / np.sqrt(saa * sbb), -1.0, 1.0))


def hrf_similarity(pred_labels: np.ndarray, true_labels: np.ndarray, design: TaskDesign,
                   hrf: np.ndarray) -> Dict[str, Optional[float]]:
    """
    各非 rest 狀態：預測與真實指示序列分別與 HRF 卷積後的 PCC

    卷積後任一序列為常數（例如從未預測或從未出現）時結果無定義，記為 None。

    Args:
        pred_labels: 預測標籤（長度 T）
        true_labels: 真實標籤（長度 T）
        design: 提供 T 與狀態名稱
        hrf: canonical_hrf 的輸出

    Returns:
        狀態名稱 -> PCC 或 None
    """
    pred_labels = np.asarray(pred_labels)
    true_labels = np.asarray(true_labels)
    if pred_labels.shape != (design.n_frames,) or true_labels.shape != (design.n_frames,):
        raise ShapeError(f"標籤長度 {pred_labels.shape} / {true_labels.shape} 與設計幀數 {design.n_frames} 不符")

    result: Dict[str, Optional[float]] = {}
    for condition, name in enumerate(design.conditions):
        if condition == REST:
            continue
        pred_series = np.convolve((pred_labels == condition).astype(np.float64), hrf)[:design.n_frames]
        true_series = np.convolve((true_labels == condition).astype(np.float64), hrf)[:design.n_frames]
        try:
            result[name] = pcc(pred_series, true_series)
        except DegenerateInputError:
            logger.warning("狀態 %s 的序列相似度無定義（預測或真實序列為常數）", name)
            result[name] = None
    return result


def segment_accuracy(pred: np.ndarray, truth: np.ndarray, n_segments: int) -> List[float]:
    """
    把序列切成 n_segments 段連續區間，計算各段準確率（餘數併入最後一段）

    Returns:
        各段準確率列表
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ShapeError(f"預測長度 {pred.shape} 與真實長度 {truth.shape} 不符")
    length = pred.shape[0]
    if not 1 <= n_segments <= length:
        raise ShapeError(f"分段數 {n_segments} 必須介於 [1, {length}]")
    base = length // n_segments
    bounds = [k * base for k in range(n_segments)] + [length]
    correct = pred == truth
    return [float(correct[lo:hi].mean()) for lo, hi in zip(bounds[:-1], bounds[1:])]


def _change_points(labels: np.ndarray) -> np.ndarray:
    return np.flatnonzero(np.diff(labels) != 0) + 1


def transition_lag(pred: np.ndarray, truth: np.ndarray) -> TransitionSummary:
    """
    每個真實狀態轉換到最近預測轉換的帶號幀差（預測 − 真實，等距取較早者）

    Returns:
        TransitionSummary（沒有轉換時摘要為 None）
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ShapeError(f"預測長度 {pred.shape} 與真實長度 {truth.shape} 不符")
    true_changes = _change_points(truth)
    pred_changes = _change_points(pred)
    if true_changes.size == 0 or pred_changes.size == 0:
        return TransitionSummary()

    lags = []
    for change in true_changes:
        offsets = pred_changes - change
        lags.append(int(offsets[np.argmin(np.abs(offsets))]))
    magnitudes = np.abs(lags)
    return TransitionSummary(lags=lags, median_abs_lag=float(np.median(magnitudes)),
                             within_two_frames=float(np.mean(magnitudes <= 2)))
