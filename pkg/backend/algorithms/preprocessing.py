"""
前處理：逐體素標準化、HRF 標籤位移、隨機時間裁切
"""
import logging
from typing import Tuple

import numpy as np

from ..exceptions import ConfigError, ShapeError
from ..models import REST, RunData

logger = logging.getLogger(__name__)


def standardize_run(run: RunData) -> RunData:
    """
    每個體素的時間序列減去平均並除以標準差（母體標準差）

    變異數為 0 的體素輸出全 0。回傳新的 RunData，原資料不變。
    """
    volume = np.asarray(run.volume, dtype=np.float64)
    if volume.ndim != 4 or volume.shape[0] < 2:
        raise ShapeError(f"標準化需要 T ≥ 2 的 T×D×H×W 資料，收到 {volume.shape}")

    mean = volume.mean(axis=0)
    std = volume.std(axis=0)
    flat = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    safe_std = np.where(flat, 1.0, std)
    standardized = (volume - mean) / safe_std
    standardized[:, flat] = 0.0

    n_flat = int(flat.sum())
    if n_flat:
        logger.warning("%s：%d 個體素變異數為 0，已設為 0", run.run_id, n_flat)
    return RunData(volume=standardized, labels=np.asarray(run.labels).copy(),
                   design=run.design, run_id=run.run_id)


def shift_labels(labels: np.ndarray, shift: int) -> np.ndarray:
    """
    標籤整體往後移 shift 幀，前 shift 幀補 rest

    Args:
        labels: 長度 T
        shift: 0 ≤ shift < T

    Returns:
        長度 T 的新標籤
    """
    labels = np.asarray(labels, dtype=np.int64)
    n_frames = labels.shape[0]
    if not 0 <= shift < n_frames:
        raise ConfigError(f"標籤位移 {shift} 超出範圍 [0, {n_frames})")
    shifted = np.full(n_frames, REST, dtype=np.int64)
    shifted[shift:] = labels[:n_frames - shift]
    return shifted


def sample_window(run: RunData, shifted_labels: np.ndarray, t: int,
                  rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    均勻抽樣起點 [0, T−t]，取出連續 t 幀與對應標籤

    Returns:
        (t×D×H×W 視窗, 長度 t 的標籤)
    """
    n_frames = run.n_frames
    if n_frames < t:
        raise ShapeError(f"掃描只有 {n_frames} 幀，少於視窗長度 {t}")
    start = int(rng.integers(0, n_frames - t + 1))
    return run.volume[start:start + t], np.asarray(shifted_labels)[start:start + t]
