"""
張量基本運算

每個可微分運算都是一個 Function：forward 時保存反傳所需的中間值，
backward(upstream) 回傳 sum(upstream ⊙ output) 對各輸入的梯度（VJP）。
所有計算皆為 float64。
"""
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from ..exceptions import LabelError, NonFiniteError, ShapeError, VolDecodeError

RELU_MODES = ("standard", "guided")


def as_tensor(x) -> np.ndarray:
    """轉為 float64 的 ndarray"""
    return np.asarray(x, dtype=np.float64)


def output_extent(extent: int, kernel: int, stride: int, pad: int) -> int:
    """卷積輸出尺寸 floor((E + 2p − k) / s) + 1"""
    return (extent + 2 * pad - kernel) // stride + 1


class Function:
    """具備 forward / backward 的運算"""

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def backward(self, upstream):
        raise NotImplementedError

    def _require_forward(self, attr: str):
        if not hasattr(self, attr):
            raise VolDecodeError(f"{type(self).__name__}.backward 需要先呼叫 forward")


class Conv3d(Function):
    """3D 互相關（無核翻轉），零填補"""

    def forward(self, x, weight, bias, stride: int = 1, pad: int = 0) -> np.ndarray:
        """
        Args:
            x: C_in×D×H×W
            weight: C_out×C_in×kd×kh×kw
            bias: C_out
            stride: 步長 s ≥ 1
            pad: 填補 p ≥ 0

        Returns:
            C_out×D′×H′×W′
        """
        x, weight, bias = as_tensor(x), as_tensor(weight), as_tensor(bias)
        if x.ndim != 4 or weight.ndim != 5:
            raise ShapeError(f"conv3d 需要 4D 輸入與 5D 卷積核，收到 {x.shape} 與 {weight.shape}")
        if x.shape[0] != weight.shape[1]:
            raise ShapeError(f"conv3d 通道數不符: 輸入 {x.shape[0]}，卷積核 {weight.shape[1]}")
        if bias.shape != (weight.shape[0],):
            raise ShapeError(f"conv3d bias 形狀 {bias.shape} 應為 ({weight.shape[0]},)")
        if stride < 1 or pad < 0:
            raise ShapeError(f"conv3d 需要 stride ≥ 1 且 pad ≥ 0，收到 stride={stride}, pad={pad}")

        kernel = weight.shape[2:]
        out_dims = tuple(output_extent(e, k, stride, pad) for e, k in zip(x.shape[1:], kernel))
        if min(out_dims) < 1:
            raise ShapeError(f"conv3d 輸出尺寸非正: 輸入 {x.shape[1:]}，卷積核 {kernel}")

        padded = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (pad, pad))) if pad else x
        windows = sliding_window_view(padded, kernel, axis=(1, 2, 3))
        windows = windows[:, ::stride, ::stride, ::stride]
        # windows: C_in×D′×H′×W′×kd×kh×kw
        out = np.tensordot(weight, windows, axes=([1, 2, 3, 4], [0, 4, 5, 6]))
        out += bias[:, None, None, None]

        self.x_shape = x.shape
        self.padded_shape = padded.shape
        self.windows = windows
        self.weight = weight
        self.stride = stride
        self.pad = pad
        self.out_dims = out_dims
        return out

    def backward(self, upstream) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """回傳 (grad_x, grad_w, grad_b)"""
        self._require_forward("windows")
        g = as_tensor(upstream)
        expected = (self.weight.shape[0],) + self.out_dims
        if g.shape != expected:
            raise ShapeError(f"conv3d 上游梯度形狀 {g.shape} 應為 {expected}")

        grad_b = g.sum(axis=(1, 2, 3))
        grad_w = np.tensordot(g, self.windows, axes=([1, 2, 3], [1, 2, 3]))

        # C_in×kd×kh×kw×D′×H′×W′
        cols = np.tensordot(self.weight, g, axes=([0], [0]))
        grad_padded = np.zeros(self.padded_shape)
        s = self.stride
        do, ho, wo = self.out_dims
        kd, kh, kw = self.weight.shape[2:]
        for i in range(kd):
            for j in range(kh):
                for k in range(kw):
                    grad_padded[:,
                                i:i + s * (do - 1) + 1:s,
                                j:j + s * (ho - 1) + 1:s,
                                k:k + s * (wo - 1) + 1:s] += cols[:, i, j, k]
        p = self.pad
        _, d, h, w = self.x_shape
        grad_x = grad_padded[:, p:p + d, p:p + h, p:p + w]
        return np.ascontiguousarray(grad_x), grad_w, grad_b


class Relu(Function):
    """relu；backward 支援一般與 guided 兩種模式"""

    def forward(self, x) -> np.ndarray:
        x = as_tensor(x)
        self.positive = x > 0
        return np.where(self.positive, x, 0.0)

    def backward(self, upstream, mode: str = "standard") -> np.ndarray:
        self._require_forward("positive")
        if mode not in RELU_MODES:
            raise ValueError(f"未知的反傳模式: {mode}")
        g = as_tensor(upstream)
        gate = self.positive
        if mode == "guided":
            gate = gate & (g > 0)
        return np.where(gate, g, 0.0)


class Identity(Function):
    """恆等運算（測試時取代 relu）"""

    def forward(self, x) -> np.ndarray:
        return as_tensor(x).copy()

    def backward(self, upstream, mode: str = "standard") -> np.ndarray:
        if mode not in RELU_MODES:
            raise ValueError(f"未知的反傳模式: {mode}")
        return as_tensor(upstream).copy()


class Dense(Function):
    """全連接層 y = w·x + b；x 可為單一向量或多列"""

    def forward(self, x, weight, bias) -> np.ndarray:
        x, weight, bias = as_tensor(x), as_tensor(weight), as_tensor(bias)
        if weight.ndim != 2 or x.ndim not in (1, 2) or x.shape[-1] != weight.shape[1]:
            raise ShapeError(f"dense 維度不符: x {x.shape}，w {weight.shape}")
        if bias.shape != (weight.shape[0],):
            raise ShapeError(f"dense bias 形狀 {bias.shape} 應為 ({weight.shape[0]},)")
        self.x = x
        self.weight = weight
        return x @ weight.T + bias

    def backward(self, upstream) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """回傳 (grad_x, grad_w, grad_b)"""
        self._require_forward("x")
        g = as_tensor(upstream)
        grad_x = g @ self.weight
        if self.x.ndim == 1:
            grad_w = np.outer(g, self.x)
            grad_b = g.copy()
        else:
            grad_w = g.T @ self.x
            grad_b = g.sum(axis=0)
        return grad_x, grad_w, grad_b


class GlobalPool(Function):
    """逐通道全域池化（avg / max）"""

    def __init__(self, kind: str = "avg"):
        if kind not in ("avg", "max"):
            raise ValueError(f"未知的池化方式: {kind}")
        self.kind = kind

    def forward(self, x) -> np.ndarray:
        x = as_tensor(x)
        if x.ndim != 4 or min(x.shape[1:]) < 1:
            raise ShapeError(f"pool_global 需要 C×D×H×W 輸入，收到 {x.shape}")
        self.x_shape = x.shape
        flat = x.reshape(x.shape[0], -1)
        if self.kind == "avg":
            return flat.mean(axis=1)
        # 平手時取列優先順序的第一個最大值
        self.argmax = np.argmax(flat, axis=1)
        return flat[np.arange(flat.shape[0]), self.argmax]

    def backward(self, upstream) -> np.ndarray:
        self._require_forward("x_shape")
        g = as_tensor(upstream)
        channels = self.x_shape[0]
        n = int(np.prod(self.x_shape[1:]))
        if self.kind == "avg":
            grad = np.repeat((g / n)[:, None], n, axis=1)
        else:
            grad = np.zeros((channels, n))
            grad[np.arange(channels), self.argmax] = g
        return grad.reshape(self.x_shape)


class Sigmoid(Function):
    def forward(self, x) -> np.ndarray:
        self.y = expit(as_tensor(x))
        return self.y

    def backward(self, upstream) -> np.ndarray:
        self._require_forward("y")
        return as_tensor(upstream) * self.y * (1.0 - self.y)


class ChannelScale(Function):
    """以每通道分數縮放 C×D×H×W 張量"""

    def forward(self, x, scores) -> np.ndarray:
        x, scores = as_tensor(x), as_tensor(scores)
        if scores.shape != (x.shape[0],):
            raise ShapeError(f"通道分數形狀 {scores.shape} 與輸入通道數 {x.shape[0]} 不符")
        self.x = x
        self.scores = scores
        return x * scores[:, None, None, None]

    def backward(self, upstream) -> Tuple[np.ndarray, np.ndarray]:
        """回傳 (grad_x, grad_scores)"""
        self._require_forward("x")
        g = as_tensor(upstream)
        return g * self.scores[:, None, None, None], (g * self.x).sum(axis=(1, 2, 3))


def softmax(logits) -> np.ndarray:
    """逐列 softmax（先減去最大值）"""
    z = as_tensor(logits)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_xent(logits, labels) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    逐列 softmax 交叉熵

    Args:
        logits: t×K
        labels: 長度 t，值域 [0, K)

    Returns:
        (平均損失, 機率 t×K, 對 logits 的梯度 t×K)
    """
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    rows, n_classes = logits.shape
    if labels.shape != (rows,):
        raise ShapeError(f"標籤長度 {labels.shape} 與 logits 列數 {rows} 不符")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise LabelError(f"標籤超出範圍 [0, {n_classes}): {labels.min()}..{labels.max()}")

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    probs = np.exp(log_probs)
    picked = log_probs[np.arange(rows), labels]
    loss = float(-picked.mean())

    onehot = np.zeros_like(probs)
    onehot[np.arange(rows), labels] = 1.0
    grad = (probs - onehot) / rows
    return loss, probs, grad


def ensure_finite(array: np.ndarray, what: str) -> None:
    """非有限值時拋出錯誤"""
    if not np.all(np.isfinite(array)):
        raise NonFiniteError(f"{what} 含有非有限值")


def subsample(x: np.ndarray, stride: int) -> np.ndarray:
    """空間維度每隔 stride 取樣（恆等捷徑的降採樣）"""
    return x[:, ::stride, ::stride, ::stride]


def subsample_backward(upstream: np.ndarray, x_shape, stride: int) -> np.ndarray:
    grad = np.zeros(x_shape)
    grad[:, ::stride, ::stride, ::stride] = upstream
    return grad
