"""
AdamW（解耦權重衰減）與線性暖身 + 餘弦衰減學習率排程
"""
import math
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import ConfigError, ShapeError
from ..models import OptState, ScheduleConfig
from .tensor_ops import ensure_finite


def adamw_update(param: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray,
                 tau: int, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, weight_decay: float = 0.05) -> np.ndarray:
    """
    單一參數的 AdamW 更新（就地更新 m、v）

    Args:
        param: 參數
        grad: 梯度
        m, v: 一階、二階動差
        tau: 本次更新後的步數（≥ 1），用於偏差校正
        lr: 學習率

    Returns:
        更新後的參數（新陣列）
    """
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** tau)
    v_hat = v / (1.0 - beta2 ** tau)
    return param - lr * m_hat / (np.sqrt(v_hat) + eps) - lr * weight_decay * param


def adamw_step(param: np.ndarray, grad: np.ndarray, state: OptState, lr: float,
               beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
               weight_decay: float = 0.05, name: str = "param") -> Tuple[np.ndarray, OptState]:
    """
    對單一參數執行一步 AdamW，τ 加 1

    Returns:
        (更新後參數, 狀態)
    """
    params, state = AdamW(beta1, beta2, eps, weight_decay, state).step(
        {name: param}, {name: grad}, lr)
    return params[name], state


class AdamW:
    """多參數共用步數的 AdamW"""

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
                 weight_decay: float = 0.05, state: Optional[OptState] = None):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.state = state if state is not None else OptState()

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray],
             lr: float) -> Tuple[Dict[str, np.ndarray], OptState]:
        """
        更新所有參數

        非有限梯度時整步拒絕，狀態不變。
        """
        for name, grad in grads.items():
            if name not in params:
                raise ShapeError(f"梯度 {name} 沒有對應的參數")
            if grad.shape != params[name].shape:
                raise ShapeError(f"參數 {name} 形狀 {params[name].shape} 與梯度 {grad.shape} 不符")
            ensure_finite(grad, f"參數 {name} 的梯度")

        tau = self.state.step + 1
        updated = dict(params)
        for name, grad in grads.items():
            m, v = self.state.moments_for(name, params[name])
            updated[name] = adamw_update(np.asarray(params[name], dtype=np.float64),
                                         np.asarray(grad, dtype=np.float64), m, v, tau, lr,
                                         self.beta1, self.beta2, self.eps, self.weight_decay)
        self.state.step = tau
        return updated, self.state


def validate_schedule(cfg: ScheduleConfig) -> None:
    if not 0 < cfg.warmup_steps < cfg.total_steps:
        raise ConfigError(f"排程需要 0 < warmup_steps < total_steps，"
                          f"收到 {cfg.warmup_steps} / {cfg.total_steps}")
    if cfg.lr_start > cfg.lr_peak:
        raise ConfigError(f"lr_start {cfg.lr_start} 不可大於 lr_peak {cfg.lr_peak}")


def lr_at(step: int, cfg: ScheduleConfig) -> float:
    """
    第 step 步的學習率

    暖身期線性由 lr_start 升至 lr_peak，之後以餘弦衰減至 lr_end。
    """
    validate_schedule(cfg)
    if step < 0 or step > cfg.total_steps:
        raise ConfigError(f"step {step} 超出排程範圍 [0, {cfg.total_steps}]")
    if step < cfg.warmup_steps:
        return cfg.lr_start + (cfg.lr_peak - cfg.lr_start) * step / cfg.warmup_steps
    progress = (step - cfg.warmup_steps) / (cfg.total_steps - cfg.warmup_steps)
    return cfg.lr_end + (cfg.lr_peak - cfg.lr_end) * 0.5 * (1.0 + math.cos(math.pi * progress))
