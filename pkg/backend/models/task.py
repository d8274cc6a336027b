"""
任務設計與合成資料模型
"""
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from dataclasses_json import dataclass_json

REST = 0  # 休息狀態固定為索引 0


@dataclass_json
@dataclass
class TaskEvent:
    """單一刺激事件（以幀為單位）"""
    condition: int
    onset: int
    duration: int

    @property
    def end(self) -> int:
        return self.onset + self.duration


@dataclass_json
@dataclass
class TaskDesign:
    """一次掃描的刺激時序"""
    tr_s: float
    n_frames: int
    conditions: List[str]  # conditions[0] 為 rest
    events: List[TaskEvent] = field(default_factory=list)
    kind: str = "block"

    @property
    def n_conditions(self) -> int:
        return len(self.conditions)

    def condition_index(self, name: str) -> int:
        """由名稱取得狀態索引"""
        if name not in self.conditions:
            raise KeyError(f"未知的狀態: {name}")
        return self.conditions.index(name)

    def frame_labels(self) -> np.ndarray:
        """
        逐幀標籤

        Returns:
            長度 n_frames 的整數陣列，未被事件覆蓋的幀為 rest
        """
        labels = np.zeros(self.n_frames, dtype=np.int64)
        for event in self.events:
            labels[event.onset:event.end] = event.condition
        return labels

    def indicator(self, condition: int) -> np.ndarray:
        """指定狀態的 0/1 boxcar 序列"""
        series = np.zeros(self.n_frames, dtype=np.float64)
        for event in self.events:
            if event.condition == condition:
                series[event.onset:event.end] = 1.0
        return series

    def frames_of(self, condition: int) -> int:
        return int(sum(e.duration for e in self.events if e.condition == condition))


@dataclass_json
@dataclass
class RoiSpec:
    """單一狀態的橢球活化區"""
    condition: int
    center: Tuple[int, int, int]
    radii: Tuple[float, float, float]
    amplitude: float

    def __post_init__(self):
        self.center = tuple(int(c) for c in self.center)
        self.radii = tuple(float(r) for r in self.radii)


@dataclass_json
@dataclass
class Phantom:
    """合成體模：網格、各狀態 ROI、基線與雜訊"""
    grid: Tuple[int, int, int]
    rois: List[RoiSpec] = field(default_factory=list)
    baseline: float = 100.0
    noise_sd: float = 1.0

    def __post_init__(self):
        self.grid = tuple(int(g) for g in self.grid)

    def roi_mask(self, condition: int, dilation: int = 0) -> np.ndarray:
        """
        取得狀態的 ROI 遮罩

        Args:
            condition: 狀態索引
            dilation: 以 6 鄰域向外擴張的體素層數

        Returns:
            形狀為 grid 的布林陣列
        """
        mask = np.zeros(self.grid, dtype=bool)
        zz, yy, xx = np.indices(self.grid)
        for roi in self.rois:
            if roi.condition != condition:
                continue
            cz, cy, cx = roi.center
            rz, ry, rx = roi.radii
            inside = (((zz - cz) / rz) ** 2 + ((yy - cy) / ry) ** 2
                      + ((xx - cx) / rx) ** 2) <= 1.0
            mask |= inside
        for _ in range(dilation):
            grown = mask.copy()
            for axis in range(3):
                grown |= np.roll(mask, 1, axis=axis) & _not_wrapped(mask.shape, axis, 1)
                grown |= np.roll(mask, -1, axis=axis) & _not_wrapped(mask.shape, axis, -1)
            mask = grown
        return mask


def _not_wrapped(shape, axis: int, shift: int) -> np.ndarray:
    """np.roll 會繞回邊界，排除繞回的那一層"""
    keep = np.ones(shape, dtype=bool)
    index = [slice(None)] * len(shape)
    index[axis] = 0 if shift > 0 else -1
    keep[tuple(index)] = False
    return keep


@dataclass
class RunData:
    """一次掃描：4D BOLD、逐幀標籤與刺激時序"""
    volume: np.ndarray  # T×D×H×W
    labels: np.ndarray  # 長度 T
    design: TaskDesign
    run_id: str = "run"

    @property
    def n_frames(self) -> int:
        return int(self.volume.shape[0])

    @property
    def grid(self) -> Tuple[int, int, int]:
        return tuple(int(e) for e in self.volume.shape[1:])
