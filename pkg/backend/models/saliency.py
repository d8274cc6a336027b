"""
視覺化（guided backprop、GLM）資料模型
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np


@dataclass
class SaliencyMap:
    """
    由 guided backprop 收集的梯度時間序列

    frames[j] 對應 run 中的第 frame_offset + j 幀
    """
    frames: np.ndarray  # n×D×H×W
    frame_offset: int

    @property
    def n_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def grid(self) -> Tuple[int, int, int]:
        return tuple(int(e) for e in self.frames.shape[1:])

    @property
    def frame_indices(self) -> np.ndarray:
        return np.arange(self.n_frames) + self.frame_offset


@dataclass
class GlmResult:
    """逐體素 GLM 結果（不含截距的各狀態圖）"""
    conditions: List[str]  # 非 rest 狀態名稱
    condition_indices: List[int]
    beta: np.ndarray  # n_cond×D×H×W
    t_stat: np.ndarray
    p_value: np.ndarray
    df: int
    intercept: np.ndarray  # D×H×W
    sigma2: np.ndarray  # 殘差變異數 D×H×W
    xtx_inv: np.ndarray  # (XᵀX)⁻¹
    design_matrix: np.ndarray  # n×p，第 0 欄為截距
    frame_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def index_of(self, condition: str) -> int:
        if condition not in self.conditions:
            raise KeyError(f"GLM 結果中沒有狀態: {condition}")
        return self.conditions.index(condition)

    def beta_map(self, condition: str) -> np.ndarray:
        return self.beta[self.index_of(condition)]


@dataclass
class ContrastMap:
    """兩狀態之間的對比圖（β_a − β_b）"""
    name: str
    effect: np.ndarray
    t_stat: np.ndarray
    p_value: np.ndarray
    df: int


@dataclass
class PeakSeries:
    """峰值體素的解碼時間序列與理想反應"""
    condition: str
    polarity: str
    coords: Tuple[int, int, int]
    frame_indices: np.ndarray
    series: np.ndarray
    ideal: np.ndarray
    stimulus: np.ndarray
    pcc: Optional[float]
