"""
Guided backpropagation 梯度收集與組平均
"""
import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..algorithms.encoder_decoder import backward, forward
from ..exceptions import ConfigError, LabelError, ShapeError, VolDecodeError
from ..models import ModelConfig, ModelWeights, Prediction, RunData, SaliencyMap

logger = logging.getLogger(__name__)

SEED_POLICIES = ("predicted", "true")


def harvest_frame(cfg: ModelConfig) -> int:
    """每個視窗保留的幀索引 t/2 − 1（t=16 時為第 8 幀）"""
    return max(cfg.t // 2 - 1, 0)


def guided_window(weights: ModelWeights, window: np.ndarray, frame_idx: int, class_idx: int,
                  cfg: ModelConfig) -> np.ndarray:
    """
    在 logits[frame_idx, class_idx] 放 one-hot，以 guided 規則反傳到輸入視窗

    Returns:
        t×D×H×W 梯度
    """
    if not 0 <= frame_idx < cfg.t:
        raise LabelError(f"幀索引 {frame_idx} 超出範圍 [0, {cfg.t})")
    if not 0 <= class_idx < cfg.n_classes:
        raise LabelError(f"類別索引 {class_idx} 超出範圍 [0, {cfg.n_classes})")
    _, cache = forward(window, weights, cfg)
    seed = np.zeros_like(cache.logits)
    seed[frame_idx, class_idx] = 1.0
    return backward(cache, weights, cfg, mode="guided", seed=seed).input_grad


def saliency_run(weights: ModelWeights, run: RunData, prediction: Union[Prediction, np.ndarray],
                 cfg: ModelConfig, seed_policy: str = "predicted",
                 truth: Optional[np.ndarray] = None,
                 frame_range: Optional[Tuple[int, int]] = None) -> SaliencyMap:
    """
    以步長 1 滑動視窗，每個視窗只保留中央幀的 guided 梯度

    種子類別為該 run 幀的預測標籤（seed_policy="predicted"）或真實標籤（"true"）。

    Args:
        weights: 模型權重
        run: 已標準化的 run
        prediction: 該 run 的 Prediction 或逐幀標籤
        cfg: 模型設定
        seed_policy: "predicted" | "true"
        truth: seed_policy="true" 時使用的（已位移）真實標籤
        frame_range: 視窗起點範圍 [start, stop)，預設整個 run

    Returns:
        SaliencyMap，frames[j] 對應 run 第 frame_offset + j 幀
    """
    if seed_policy not in SEED_POLICIES:
        raise ConfigError(f"未知的種子類別策略: {seed_policy}（可用: {', '.join(SEED_POLICIES)}）")
    n_frames, t = run.n_frames, cfg.t
    if n_frames < t:
        raise ShapeError(f"掃描只有 {n_frames} 幀，少於視窗長度 {t}")

    if seed_policy == "predicted":
        labels = prediction.labels if isinstance(prediction, Prediction) else prediction
    else:
        if truth is None:
            raise VolDecodeError("seed_policy=true 需要真實標籤")
        labels = truth
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n_frames,):
        raise ShapeError(f"標籤長度 {labels.shape[0] if labels.ndim else 0} 與 run 幀數 {n_frames} 不符")

    n_starts = n_frames - t + 1
    start, stop = frame_range if frame_range is not None else (0, n_starts)
    stop = min(stop, n_starts)
    if not 0 <= start < stop:
        raise ConfigError(f"視窗起點範圍 [{start}, {stop}) 無效（可用 [0, {n_starts})）")

    keep = harvest_frame(cfg)
    frames = np.empty((stop - start,) + run.grid)
    for j, w in enumerate(range(start, stop)):
        grad = guided_window(weights, run.volume[w:w + t], keep, int(labels[w + keep]), cfg)
        frames[j] = grad[keep]

    logger.info("%s：收集 %d 幀 guided 梯度（視窗起點 %d..%d）", run.run_id, stop - start, start, stop - 1)
    return SaliencyMap(frames=frames, frame_offset=keep + start)


def group_average(maps: Sequence[SaliencyMap]) -> SaliencyMap:
    """逐元素（帶號）平均多個 SaliencyMap"""
    if not maps:
        raise VolDecodeError("group_average 需要至少一個 SaliencyMap")
    first = maps[0]
    for m in maps[1:]:
        if m.frames.shape != first.frames.shape or m.frame_offset != first.frame_offset:
            raise ShapeError(f"SaliencyMap 形狀或起點不一致: {m.frames.shape}@{m.frame_offset} "
                             f"vs {first.frames.shape}@{first.frame_offset}")
    total = np.zeros_like(first.frames)
    for m in maps:
        total += m.frames
    return SaliencyMap(frames=total / len(maps), frame_offset=first.frame_offset)
