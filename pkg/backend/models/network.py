"""
編碼器-解碼器模型的設定與權重
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from dataclasses_json import dataclass_json


@dataclass_json
@dataclass
class ModelConfig:
    """模型架構超參數"""
    t: int = 16  # 視窗長度（幀）
    c: int = 16  # 時間嵌入通道數
    stage_widths: List[int] = field(default_factory=lambda: [16, 32])
    blocks_per_stage: int = 1
    n_classes: int = 7  # K
    reduction: int = 4  # 通道注意力縮減比 r
    grid: Tuple[int, int, int] = (20, 24, 20)
    use_relu: bool = True  # 測試用：False 時所有 relu 改為恆等

    def __post_init__(self):
        self.grid = tuple(int(g) for g in self.grid)
        self.stage_widths = [int(w) for w in self.stage_widths]

    @property
    def final_width(self) -> int:
        return self.stage_widths[-1]

    @property
    def frame_features(self) -> int:
        """解碼器每幀分到的特徵數 C_final / t"""
        return self.final_width // self.t


@dataclass
class ModelWeights:
    """所有可學習參數，以固定順序的名稱索引"""
    params: Dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def names(self) -> List[str]:
        return list(self.params.keys())

    def copy(self) -> "ModelWeights":
        return ModelWeights({k: v.copy() for k, v in self.params.items()})

    def n_parameters(self) -> int:
        return int(sum(v.size for v in self.params.values()))

    def flatten(self) -> np.ndarray:
        """依名稱順序串接成一維向量（序列化用）"""
        if not self.params:
            return np.zeros(0)
        return np.concatenate([v.ravel() for v in self.params.values()])

    @classmethod
    def from_flat(cls, vector: np.ndarray,
                  shapes: Dict[str, Tuple[int, ...]]) -> "ModelWeights":
        """
        由一維向量還原權重

        Args:
            vector: flatten() 的輸出
            shapes: 名稱 -> 形狀（順序須與 flatten 時一致）

        Returns:
            ModelWeights
        """
        expected = int(sum(int(np.prod(s)) for s in shapes.values()))
        if vector.size != expected:
            raise ValueError(f"權重向量長度 {vector.size} 與設定需要的 {expected} 不符")
        params = {}
        offset = 0
        for name, shape in shapes.items():
            size = int(np.prod(shape))
            params[name] = np.asarray(vector[offset:offset + size],
                                      dtype=np.float64).reshape(shape).copy()
            offset += size
        return cls(params)

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.params.values())
