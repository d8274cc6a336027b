"""
典型血流動力反應函數（HRF）與理想反應序列
"""
from typing import Union

import numpy as np
from scipy.stats import gamma

from ..exceptions import ConfigError, LabelError
from ..models import TaskDesign

# 雙 gamma 參數：反應峰與下衝的形狀參數，下衝比例 1/6
PEAK_SHAPE = 6.0
UNDERSHOOT_SHAPE = 16.0
UNDERSHOOT_RATIO = 1.0 / 6.0


def double_gamma(tau: np.ndarray) -> np.ndarray:
    """未正規化的雙 gamma 函數 h(τ)"""
    tau = np.asarray(tau, dtype=np.float64)
    return gamma.pdf(tau, PEAK_SHAPE) - UNDERSHOOT_RATIO * gamma.pdf(tau, UNDERSHOOT_SHAPE)


def canonical_hrf(tr_s: float, duration_s: float = 32.0) -> np.ndarray:
    """
    以 TR 取樣的典型 HRF

    Args:
        tr_s: 每幀秒數
        duration_s: 核長度（秒）

    Returns:
        取樣於 τ = k·tr_s（k = 0..floor(duration_s / tr_s)）且最大值為 1 的核
    """
    if tr_s <= 0:
        raise ConfigError(f"tr_s 必須為正，收到 {tr_s}")
    n_samples = int(np.floor(duration_s / tr_s)) + 1
    kernel = double_gamma(np.arange(n_samples) * tr_s)
    return kernel / kernel.max()


def ideal_response(design: TaskDesign, condition: Union[int, str], hrf: np.ndarray) -> np.ndarray:
    """
    狀態的 boxcar 與 HRF 的線性卷積，截斷為 T 幀

    Args:
        design: 刺激時序
        condition: 狀態索引或名稱
        hrf: canonical_hrf 的輸出

    Returns:
        長度 T 的序列
    """
    if isinstance(condition, str):
        try:
            condition = design.condition_index(condition)
        except KeyError as exc:
            raise LabelError(str(exc)) from exc
    if not 0 <= condition < design.n_conditions:
        raise LabelError(f"狀態索引 {condition} 超出範圍 [0, {design.n_conditions})")
    boxcar = design.indicator(condition)
    return np.convolve(boxcar, np.asarray(hrf, dtype=np.float64))[:design.n_frames]
