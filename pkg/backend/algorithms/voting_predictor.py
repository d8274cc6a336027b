"""
重疊視窗推論與多數決投票
"""
import logging
from typing import List

import numpy as np

from ..exceptions import LabelError, ShapeError
from ..models import ModelConfig, ModelWeights, Prediction, RunData
from .encoder_decoder import forward

logger = logging.getLogger(__name__)


def window_count(n_frames: int, t: int, stride: int = 1) -> int:
    """視窗數 floor((T − t) / s) + 1"""
    if stride < 1:
        raise ShapeError(f"步長必須 ≥ 1，收到 {stride}")
    if n_frames < t:
        raise ShapeError(f"掃描只有 {n_frames} 幀，少於視窗長度 {t}")
    return (n_frames - t) // stride + 1


def window_starts(n_frames: int, t: int, stride: int = 1) -> List[int]:
    return [k * stride for k in range(window_count(n_frames, t, stride))]


def majority_vote(tallies: np.ndarray, mean_probs: np.ndarray) -> int:
    """
    多數決：票數最多者勝；平手時取平均機率較大者，再平手取較小索引

    Args:
        tallies: K 個整數票數
        mean_probs: K 個平均機率

    Returns:
        類別索引
    """
    tallies = np.asarray(tallies)
    mean_probs = np.asarray(mean_probs, dtype=np.float64)
    if tallies.sum() < 1:
        raise LabelError("所有票數皆為 0，無法投票")
    candidates = np.flatnonzero(tallies == tallies.max())
    # argmax 回傳第一個最大值，即較小索引
    return int(candidates[np.argmax(mean_probs[candidates])])


def predict_run(weights: ModelWeights, run: RunData, cfg: ModelConfig, stride: int = 1) -> Prediction:
    """
    以步長 stride 滑動 t 幀視窗推論整個 run

    每個覆蓋到某幀的視窗為該幀投一票（該列 argmax）並貢獻一列機率；
    每幀最終標籤由 majority_vote 決定。stride > 1 時尾端未被覆蓋的幀
    沿用最近一個被覆蓋幀的標籤與平均機率，票數為 0。

    Args:
        weights: 模型權重
        run: 已標準化的 run
        cfg: 模型設定（提供 t）
        stride: 視窗步長

    Returns:
        Prediction
    """
    t = cfg.t
    n_frames = run.n_frames
    starts = window_starts(n_frames, t, stride)

    tallies = np.zeros((n_frames, cfg.n_classes), dtype=np.int64)
    prob_sums = np.zeros((n_frames, cfg.n_classes))
    rows = np.arange(t)
    for start in starts:
        probs, _ = forward(run.volume[start:start + t], weights, cfg)
        tallies[start + rows, np.argmax(probs, axis=1)] += 1
        prob_sums[start:start + t] += probs

    coverage = tallies.sum(axis=1)
    covered = np.flatnonzero(coverage > 0)
    mean_probs = np.zeros_like(prob_sums)
    mean_probs[covered] = prob_sums[covered] / coverage[covered, None]
    labels = np.zeros(n_frames, dtype=np.int64)
    for i in covered:
        labels[i] = majority_vote(tallies[i], mean_probs[i])

    uncovered = np.flatnonzero(coverage == 0)
    if uncovered.size:
        nearest = _nearest_covered(covered, uncovered)
        labels[uncovered] = labels[nearest]
        mean_probs[uncovered] = mean_probs[nearest]

    logger.debug("%s：%d 個視窗（t=%d, s=%d）", run.run_id, len(starts), t, stride)
    return Prediction(labels=labels, mean_probs=mean_probs, tallies=tallies, n_windows=len(starts))


def _nearest_covered(covered: np.ndarray, uncovered: np.ndarray) -> np.ndarray:
    """每個未覆蓋幀最近的已覆蓋幀（等距取前者）"""
    pos = np.searchsorted(covered, uncovered)
    left = covered[np.clip(pos - 1, 0, covered.size - 1)]
    right = covered[np.clip(pos, 0, covered.size - 1)]
    return np.where(np.abs(uncovered - left) <= np.abs(right - uncovered), left, right)
