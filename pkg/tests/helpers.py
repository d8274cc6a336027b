"""
測試共用工具：有限差分梯度、小型模型設定與合成資料
"""
from typing import Callable, List

import numpy as np

from backend.algorithms.encoder_decoder import backward, forward, init_params
from backend.engine import softmax_xent
from backend.models import ModelConfig, RunData, TaskDesign, TaskEvent

FD_EPS = 1e-6


def toy_config(**overrides) -> ModelConfig:
    """t=4、網格 8³、兩個寬度 8 的階段、K=3"""
    params = dict(t=4, c=4, stage_widths=[8, 8], blocks_per_stage=1, n_classes=3,
                  reduction=4, grid=(8, 8, 8))
    params.update(overrides)
    return ModelConfig(**params)


def gradcheck_configs() -> List[ModelConfig]:
    """有限差分檢查用的三種拓樸（含投影捷徑、多區塊、奇數網格）"""
    return [
        toy_config(),
        ModelConfig(t=2, c=3, stage_widths=[4, 8], blocks_per_stage=1, n_classes=4,
                    reduction=2, grid=(4, 5, 4)),
        ModelConfig(t=4, c=2, stage_widths=[4], blocks_per_stage=2, n_classes=2,
                    reduction=2, grid=(5, 4, 3)),
    ]


def random_window(cfg: ModelConfig, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).normal(size=(cfg.t,) + tuple(cfg.grid))


def random_labels(cfg: ModelConfig, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, cfg.n_classes, size=cfg.t)


def numeric_grad(f: Callable[[], float], x: np.ndarray, eps: float = FD_EPS) -> np.ndarray:
    """中央差分：就地擾動 x 的每個元素"""
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + eps
        plus = f()
        x[index] = original - eps
        minus = f()
        x[index] = original
        grad[index] = (plus - minus) / (2 * eps)
    return grad


def rel_error(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / scale)


def model_loss(weights, window, labels, cfg) -> float:
    _, cache = forward(window, weights, cfg)
    loss, _, _ = softmax_xent(cache.logits, labels)
    return loss


def directional_check(cfg: ModelConfig, seed: int = 0, eps: float = FD_EPS):
    """
    沿隨機方向比較解析梯度與中央差分

    Returns:
        (參數方向導數相對誤差, 輸入方向導數相對誤差)
    """
    rng = np.random.default_rng(seed + 100)
    weights = init_params(cfg, seed)
    window = random_window(cfg, seed)
    labels = random_labels(cfg, seed)

    _, cache = forward(window, weights, cfg)
    result = backward(cache, weights, cfg, labels=labels)

    direction = {name: rng.normal(size=value.shape) for name, value in weights.params.items()}
    analytic = sum(float(np.sum(result.param_grads[n] * direction[n])) for n in direction)
    plus = weights.copy()
    minus = weights.copy()
    for name in direction:
        plus.params[name] += eps * direction[name]
        minus.params[name] -= eps * direction[name]
    numeric = (model_loss(plus, window, labels, cfg) - model_loss(minus, window, labels, cfg)) / (2 * eps)
    param_error = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)

    input_dir = rng.normal(size=window.shape)
    analytic_in = float(np.sum(result.input_grad * input_dir))
    numeric_in = (model_loss(weights, window + eps * input_dir, labels, cfg)
                  - model_loss(weights, window - eps * input_dir, labels, cfg)) / (2 * eps)
    input_error = abs(analytic_in - numeric_in) / max(abs(analytic_in), abs(numeric_in), 1e-12)
    return param_error, input_error


def tiny_design(n_frames: int = 40, tr_s: float = 0.72) -> TaskDesign:
    """兩個非 rest 狀態交替的小型區塊設計"""
    events = [TaskEvent(1, 4, 6), TaskEvent(2, 14, 6), TaskEvent(1, 24, 6), TaskEvent(2, 32, 6)]
    return TaskDesign(tr_s=tr_s, n_frames=n_frames, conditions=["rest", "a", "b"],
                      events=[e for e in events if e.end <= n_frames], kind="block")


def random_run(cfg: ModelConfig, n_frames: int, seed: int = 0, run_id: str = "run") -> RunData:
    """隨機體積 + 隨機標籤（值域 [0, K)）"""
    rng = np.random.default_rng(seed)
    volume = rng.normal(size=(n_frames,) + tuple(cfg.grid))
    labels = rng.integers(0, cfg.n_classes, size=n_frames)
    design = TaskDesign(tr_s=0.72, n_frames=n_frames,
                        conditions=["rest"] + [f"c{k}" for k in range(1, cfg.n_classes)])
    return RunData(volume=volume, labels=labels, design=design, run_id=run_id)
