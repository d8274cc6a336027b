"""
例外類別定義

所有錯誤皆繼承自 ValueError，呼叫端可沿用 `except ValueError` 的寫法。
"""
from typing import Optional


class VolDecodeError(ValueError):
    """系統所有可預期錯誤的基底類別"""


class ShapeError(VolDecodeError):
    """維度、通道數或輸出尺寸不符"""


class ConfigError(VolDecodeError):
    """模型、訓練或排程設定違反不變條件"""


class LabelError(VolDecodeError):
    """標籤或索引超出範圍"""


class NonFiniteError(VolDecodeError):
    """梯度或損失出現非有限值"""

    def __init__(self, message: str, epoch: Optional[int] = None,
                 batch: Optional[int] = None):
        if epoch is not None:
            message = f"{message}（epoch={epoch}, batch={batch}）"
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class DataFormatError(VolDecodeError):
    """檔案格式、清單或 JSON 結構錯誤"""


class DegenerateInputError(VolDecodeError):
    """輸入退化（常數序列、單一類別、秩不足等）導致結果無定義"""
