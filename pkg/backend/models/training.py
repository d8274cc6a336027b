"""
訓練與推論相關資料模型
"""
from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd
from dataclasses_json import dataclass_json


@dataclass_json
@dataclass
class TrainConfig:
    """訓練協定設定"""
    batch_size: int = 16
    weight_decay: float = 0.05
    epochs: int = 20
    warmup_epochs: int = 2
    window: int = 16  # t
    label_shift: int = 4  # l
    stride: int = 1  # 推論視窗步長 s
    seed: int = 0
    windows_per_run: int = 8  # 每個 epoch 每個 run 抽樣的視窗數
    lr_start: float = 2e-5
    lr_peak: float = 2e-4
    lr_end: float = 0.0
    val_stride: int = 4  # 每個 epoch 驗證時使用的推論步長


@dataclass_json
@dataclass
class EpochRecord:
    """單一 epoch 的紀錄"""
    epoch: int
    loss: float
    val_accuracy: float
    lr: float
    steps: int


@dataclass_json
@dataclass
class TrainHistory:
    """訓練歷程"""
    epochs: List[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.epochs)

    @property
    def losses(self) -> List[float]:
        return [r.loss for r in self.epochs]

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([r.to_dict() for r in self.epochs],
                            columns=['epoch', 'loss', 'val_accuracy', 'lr', 'steps'])


@dataclass
class Prediction:
    """逐幀投票推論結果"""
    labels: np.ndarray  # 長度 T
    mean_probs: np.ndarray  # T×K
    tallies: np.ndarray  # T×K 整數票數
    n_windows: int = 0

    @property
    def coverage(self) -> np.ndarray:
        """每一幀被多少視窗覆蓋"""
        return self.tallies.sum(axis=1)

    @property
    def n_frames(self) -> int:
        return int(self.labels.shape[0])
