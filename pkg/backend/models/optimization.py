"""
最佳化器狀態與學習率排程設定
"""
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from dataclasses_json import dataclass_json


@dataclass
class OptState:
    """AdamW 狀態：每個參數的一階、二階動差與共用步數"""
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0  # τ

    def moments_for(self, name: str, like: np.ndarray):
        """取得（必要時建立）某參數的動差"""
        if name not in self.m:
            self.m[name] = np.zeros_like(like, dtype=np.float64)
            self.v[name] = np.zeros_like(like, dtype=np.float64)
        return self.m[name], self.v[name]


@dataclass_json
@dataclass
class ScheduleConfig:
    """線性暖身 + 餘弦衰減（以 step 為單位）"""
    warmup_steps: int
    total_steps: int
    lr_start: float = 2e-5
    lr_peak: float = 2e-4
    lr_end: float = 0.0
