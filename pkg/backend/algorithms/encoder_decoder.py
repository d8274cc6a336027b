"""
逐幀任務狀態解碼模型：編碼器-解碼器

時間嵌入（1×1×1 卷積）→ stem 3×3×3 卷積 → 各階段殘差塊 + 通道注意力 →
stride-2 降採樣 → 全域平均池化 → 逐幀解耦的共享分類頭 → softmax。
拓樸固定，forward 保存每個運算的中間值，backward 依相反順序手動串接。
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..engine import (
    ChannelScale,
    Conv3d,
    Dense,
    GlobalPool,
    Identity,
    Relu,
    Sigmoid,
    as_tensor,
    softmax,
    softmax_xent,
)
from ..engine.tensor_ops import RELU_MODES, subsample, subsample_backward
from ..exceptions import ConfigError, ShapeError, VolDecodeError
from ..models import ModelConfig, ModelWeights

logger = logging.getLogger(__name__)

Grads = Dict[str, np.ndarray]


def validate_model_config(cfg: ModelConfig) -> None:
    """檢查 ModelConfig 不變條件，違反時拋出 ConfigError"""
    if cfg.t < 1 or cfg.c < 1:
        raise ConfigError(f"t 與 c 必須為正，收到 t={cfg.t}, c={cfg.c}")
    if not cfg.stage_widths or min(cfg.stage_widths) < 1:
        raise ConfigError(f"stage_widths 必須為正整數列表，收到 {cfg.stage_widths}")
    if cfg.blocks_per_stage < 1:
        raise ConfigError(f"blocks_per_stage 必須 ≥ 1，收到 {cfg.blocks_per_stage}")
    if cfg.n_classes < 2:
        raise ConfigError(f"類別數 K 必須 ≥ 2，收到 {cfg.n_classes}")
    if cfg.reduction < 1:
        raise ConfigError(f"縮減比 r 必須 ≥ 1，收到 {cfg.reduction}")
    if cfg.final_width % cfg.t != 0:
        raise ConfigError(f"最終階段寬度 {cfg.final_width} 無法被 t={cfg.t} 整除")
    for width in cfg.stage_widths:
        if width % cfg.reduction != 0:
            raise ConfigError(f"縮減比 r={cfg.reduction} 無法整除階段寬度 {width}")
    if len(cfg.grid) != 3 or min(cfg.grid) < 1:
        raise ConfigError(f"grid 必須為三個正整數，收到 {cfg.grid}")


def _down_width(cfg: ModelConfig, stage: int) -> int:
    """第 stage 階段降採樣後的寬度（最後一階段維持不變）"""
    widths = cfg.stage_widths
    return widths[stage + 1] if stage + 1 < len(widths) else widths[stage]


def param_shapes(cfg: ModelConfig) -> "OrderedDict[str, Tuple[int, ...]]":
    """
    依固定順序列出所有參數的形狀

    Returns:
        名稱 -> 形狀；只由 ModelConfig 決定
    """
    validate_model_config(cfg)
    shapes: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()
    shapes["embed.w"] = (cfg.c, cfg.t, 1, 1, 1)
    shapes["embed.b"] = (cfg.c,)
    shapes["stem.w"] = (cfg.stage_widths[0], cfg.c, 3, 3, 3)
    shapes["stem.b"] = (cfg.stage_widths[0],)
    for s, width in enumerate(cfg.stage_widths):
        hidden = width // cfg.reduction
        for k in range(cfg.blocks_per_stage):
            prefix = f"stage{s}.block{k}."
            shapes[prefix + "conv1.w"] = (width, width, 3, 3, 3)
            shapes[prefix + "conv1.b"] = (width,)
            shapes[prefix + "conv2.w"] = (width, width, 3, 3, 3)
            shapes[prefix + "conv2.b"] = (width,)
            shapes[prefix + "attn.fc1.w"] = (hidden, 2 * width)
            shapes[prefix + "attn.fc1.b"] = (hidden,)
            shapes[prefix + "attn.fc2.w"] = (width, hidden)
            shapes[prefix + "attn.fc2.b"] = (width,)
        out_width = _down_width(cfg, s)
        prefix = f"stage{s}.down."
        shapes[prefix + "conv.w"] = (out_width, width, 3, 3, 3)
        shapes[prefix + "conv.b"] = (out_width,)
        if out_width != width:
            shapes[prefix + "proj.w"] = (out_width, width, 1, 1, 1)
            shapes[prefix + "proj.b"] = (out_width,)
    shapes["head.w"] = (cfg.n_classes, cfg.frame_features)
    shapes["head.b"] = (cfg.n_classes,)
    return shapes


def init_params(cfg: ModelConfig, seed: int) -> ModelWeights:
    """
    初始化權重

    卷積核與全連接權重取自 N(0, 2/fan_in)，bias 為 0，完全由 seed 決定。
    """
    shapes = param_shapes(cfg)
    rng = np.random.default_rng(seed)
    params = OrderedDict()
    for name, shape in shapes.items():
        if name.endswith(".b"):
            params[name] = np.zeros(shape)
        else:
            fan_in = int(np.prod(shape[1:]))
            params[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
    weights = ModelWeights(dict(params))
    logger.debug("初始化 %d 個參數陣列，共 %d 個參數", len(params), weights.n_parameters())
    return weights


def _activation(cfg: ModelConfig):
    return Relu() if cfg.use_relu else Identity()


class AttentionUnit:
    """
    通道注意力：avg / max 池化描述子 (C×2) → dense → relu → dense → sigmoid，
    以分數逐通道縮放輸入
    """

    def __init__(self, prefix: str, cfg: ModelConfig):
        self.prefix = prefix
        self.cfg = cfg

    def forward(self, x: np.ndarray, params: Dict[str, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        p = self.prefix
        channels = x.shape[0]
        if params[p + "fc1.w"].shape[1] != 2 * channels or params[p + "fc2.w"].shape[0] != channels:
            raise ShapeError(f"注意力參數形狀 {params[p + 'fc1.w'].shape} / "
                             f"{params[p + 'fc2.w'].shape} 與通道數 {channels} 不符")
        self.avg_pool = GlobalPool("avg")
        self.max_pool = GlobalPool("max")
        descriptors = np.stack([self.avg_pool.forward(x), self.max_pool.forward(x)], axis=1)
        self.fc1 = Dense()
        hidden = self.fc1.forward(descriptors.ravel(), params[p + "fc1.w"], params[p + "fc1.b"])
        self.act = _activation(self.cfg)
        hidden = self.act.forward(hidden)
        self.fc2 = Dense()
        logits = self.fc2.forward(hidden, params[p + "fc2.w"], params[p + "fc2.b"])
        self.sigmoid = Sigmoid()
        scores = self.sigmoid.forward(logits)
        self.scale = ChannelScale()
        return self.scale.forward(x, scores), scores

    def backward(self, upstream: np.ndarray, mode: str) -> Tuple[np.ndarray, Grads]:
        p = self.prefix
        grad_x, grad_scores = self.scale.backward(upstream)
        grad_logits = self.sigmoid.backward(grad_scores)
        grad_hidden, gw2, gb2 = self.fc2.backward(grad_logits)
        grad_hidden = self.act.backward(grad_hidden, mode)
        grad_desc, gw1, gb1 = self.fc1.backward(grad_hidden)
        grad_desc = grad_desc.reshape(-1, 2)
        grad_x = grad_x + self.avg_pool.backward(grad_desc[:, 0]) + self.max_pool.backward(grad_desc[:, 1])
        grads = {p + "fc1.w": gw1, p + "fc1.b": gb1, p + "fc2.w": gw2, p + "fc2.b": gb2}
        return grad_x, grads


class ResidualBlock:
    """conv3×3×3 → relu → conv3×3×3 → + skip → relu → 通道注意力"""

    def __init__(self, prefix: str, cfg: ModelConfig):
        self.prefix = prefix
        self.cfg = cfg

    def forward(self, h: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
        p = self.prefix
        self.conv1 = Conv3d()
        out = self.conv1.forward(h, params[p + "conv1.w"], params[p + "conv1.b"], 1, 1)
        self.act1 = _activation(self.cfg)
        out = self.act1.forward(out)
        self.conv2 = Conv3d()
        out = self.conv2.forward(out, params[p + "conv2.w"], params[p + "conv2.b"], 1, 1)
        self.act2 = _activation(self.cfg)
        out = self.act2.forward(out + h)
        self.attention = AttentionUnit(p + "attn.", self.cfg)
        out, self.scores = self.attention.forward(out, params)
        return out

    def backward(self, upstream: np.ndarray, mode: str) -> Tuple[np.ndarray, Grads]:
        p = self.prefix
        grad, grads = self.attention.backward(upstream, mode)
        grad_sum = self.act2.backward(grad, mode)
        grad_mid, gw2, gb2 = self.conv2.backward(grad_sum)
        grad_mid = self.act1.backward(grad_mid, mode)
        grad_h, gw1, gb1 = self.conv1.backward(grad_mid)
        grads.update({p + "conv1.w": gw1, p + "conv1.b": gb1,
                      p + "conv2.w": gw2, p + "conv2.b": gb2})
        return grad_h + grad_sum, grads


class DownsampleUnit:
    """stride-2 3×3×3 卷積 + 捷徑（寬度改變時以 1×1×1 卷積投影）→ relu"""

    def __init__(self, prefix: str, cfg: ModelConfig):
        self.prefix = prefix
        self.cfg = cfg

    def forward(self, h: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
        p = self.prefix
        self.h_shape = h.shape
        self.conv = Conv3d()
        main = self.conv.forward(h, params[p + "conv.w"], params[p + "conv.b"], 2, 1)
        if p + "proj.w" in params:
            self.proj = Conv3d()
            skip = self.proj.forward(h, params[p + "proj.w"], params[p + "proj.b"], 2, 0)
        else:
            self.proj = None
            skip = subsample(h, 2)
        self.act = _activation(self.cfg)
        return self.act.forward(main + skip)

    def backward(self, upstream: np.ndarray, mode: str) -> Tuple[np.ndarray, Grads]:
        p = self.prefix
        grad_sum = self.act.backward(upstream, mode)
        grad_h, gw, gb = self.conv.backward(grad_sum)
        grads = {p + "conv.w": gw, p + "conv.b": gb}
        if self.proj is not None:
            grad_skip, gpw, gpb = self.proj.backward(grad_sum)
            grads.update({p + "proj.w": gpw, p + "proj.b": gpb})
        else:
            grad_skip = subsample_backward(grad_sum, self.h_shape, 2)
        return grad_h + grad_skip, grads


@dataclass
class ForwardCache:
    """forward 保存的中間值"""
    window: np.ndarray
    embed: Conv3d
    stem: Conv3d
    stem_act: object
    units: List[object]
    pool: GlobalPool
    head: Dense
    feature: np.ndarray
    logits: np.ndarray
    probs: np.ndarray
    attention_scores: List[np.ndarray] = field(default_factory=list)


@dataclass
class BackwardResult:
    """backward 結果；guided 模式下 param_grads 為 None"""
    input_grad: np.ndarray
    param_grads: Optional[Grads] = None
    loss: Optional[float] = None


def time_embed(window: np.ndarray, weights: ModelWeights) -> np.ndarray:
    """
    時間嵌入：把 t 幀當作輸入通道做 1×1×1 卷積

    Args:
        window: t×D×H×W
        weights: 模型權重

    Returns:
        c×D×H×W
    """
    return _time_embed(window, weights)[0]


def _time_embed(window, weights: ModelWeights) -> Tuple[np.ndarray, Conv3d]:
    window = as_tensor(window)
    t = weights["embed.w"].shape[1]
    if window.ndim != 4 or window.shape[0] != t:
        raise ShapeError(f"視窗幀數 {window.shape[0] if window.ndim else 0} 與 t={t} 不符")
    conv = Conv3d()
    return conv.forward(window, weights["embed.w"], weights["embed.b"], 1, 0), conv


def channel_attention(x: np.ndarray, params: Dict[str, np.ndarray],
                      prefix: str = "", cfg: Optional[ModelConfig] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    通道注意力

    Args:
        x: C×D×H×W
        params: 含 {prefix}fc1.w / fc1.b / fc2.w / fc2.b 的字典

    Returns:
        (縮放後的 x, 通道分數 C)
    """
    unit = AttentionUnit(prefix, cfg or ModelConfig())
    return unit.forward(as_tensor(x), params)


def decode_frames(feature: np.ndarray, weights: ModelWeights, t: int) -> np.ndarray:
    """
    時空特徵解耦：池化向量切成 t 段連續特徵，每段經共享 dense 得到該幀 logits

    Returns:
        t×K logits
    """
    return _decode_frames(feature, weights, t)[0]


def _decode_frames(feature, weights: ModelWeights, t: int) -> Tuple[np.ndarray, Dense]:
    feature = as_tensor(feature)
    if feature.ndim != 1 or feature.size % t != 0:
        raise ShapeError(f"特徵長度 {feature.size} 無法被 t={t} 整除")
    groups = feature.reshape(t, feature.size // t)
    head = Dense()
    return head.forward(groups, weights["head.w"], weights["head.b"]), head


def forward(window: np.ndarray, weights: ModelWeights, cfg: ModelConfig) -> Tuple[np.ndarray, ForwardCache]:
    """
    完整前向傳播

    Args:
        window: t×D×H×W（已標準化）
        weights: 模型權重
        cfg: 模型設定

    Returns:
        (t×K 機率, ForwardCache)
    """
    window = as_tensor(window)
    expected = (cfg.t,) + tuple(cfg.grid)
    if window.shape != expected:
        raise ShapeError(f"輸入視窗形狀 {window.shape} 應為 {expected}")

    h, embed = _time_embed(window, weights)
    stem = Conv3d()
    h = stem.forward(h, weights["stem.w"], weights["stem.b"], 1, 1)
    stem_act = _activation(cfg)
    h = stem_act.forward(h)

    units: List[object] = []
    scores: List[np.ndarray] = []
    for s in range(len(cfg.stage_widths)):
        for k in range(cfg.blocks_per_stage):
            block = ResidualBlock(f"stage{s}.block{k}.", cfg)
            h = block.forward(h, weights.params)
            units.append(block)
            scores.append(block.scores)
        down = DownsampleUnit(f"stage{s}.down.", cfg)
        h = down.forward(h, weights.params)
        units.append(down)

    pool = GlobalPool("avg")
    feature = pool.forward(h)
    logits, head = _decode_frames(feature, weights, cfg.t)
    probs = softmax(logits)
    cache = ForwardCache(window=window, embed=embed, stem=stem, stem_act=stem_act,
                         units=units, pool=pool, head=head, feature=feature,
                         logits=logits, probs=probs, attention_scores=scores)
    return probs, cache


def backward(cache: Optional[ForwardCache], weights: ModelWeights, cfg: ModelConfig,
             labels: Optional[np.ndarray] = None, mode: str = "standard",
             seed: Optional[np.ndarray] = None) -> BackwardResult:
    """
    反向傳播

    standard 模式以交叉熵損失對所有參數求梯度（若給 seed 則以 seed 取代損失梯度，loss 為 None）；
    guided 模式以呼叫端提供的 one-hot（t×K）作為 logits 的上游梯度，所有 relu 套用 guided 規則，
    回傳對輸入視窗的梯度。

    Args:
        cache: forward 的輸出
        labels: standard 模式的逐幀標籤（長度 t）
        mode: "standard" | "guided"
        seed: logits 的上游梯度（guided 模式必填）

    Returns:
        BackwardResult
    """
    if cache is None:
        raise VolDecodeError("backward 需要 forward cache")
    if mode not in RELU_MODES:
        raise ValueError(f"未知的反傳模式: {mode}")

    loss = None
    if mode == "standard" and seed is None:
        if labels is None:
            raise VolDecodeError("standard 模式需要 labels 或 seed")
        loss, _, grad_logits = softmax_xent(cache.logits, labels)
    else:
        if seed is None:
            raise VolDecodeError("guided 模式需要 seed")
        grad_logits = as_tensor(seed)
        if grad_logits.shape != cache.logits.shape:
            raise ShapeError(f"seed 形狀 {grad_logits.shape} 應為 {cache.logits.shape}")

    grads: Grads = {}
    grad_groups, grads["head.w"], grads["head.b"] = cache.head.backward(grad_logits)
    grad = cache.pool.backward(grad_groups.ravel())
    for unit in reversed(cache.units):
        grad, unit_grads = unit.backward(grad, mode)
        grads.update(unit_grads)
    grad = cache.stem_act.backward(grad, mode)
    grad, grads["stem.w"], grads["stem.b"] = cache.stem.backward(grad)
    grad, grads["embed.w"], grads["embed.b"] = cache.embed.backward(grad)

    if mode == "guided":
        return BackwardResult(input_grad=grad)
    ordered = {name: grads[name] for name in weights.names()}
    return BackwardResult(input_grad=grad, param_grads=ordered, loss=loss)


def batch_gradients(windows: List[np.ndarray], labels: List[np.ndarray], weights: ModelWeights,
                    cfg: ModelConfig, reduction: str = "mean") -> Tuple[float, Grads]:
    """
    一個批次的損失與參數梯度

    Args:
        reduction: "mean"（訓練用）或 "sum"

    Returns:
        (平均損失, 梯度)
    """
    if reduction not in ("mean", "sum"):
        raise ValueError(f"未知的 reduction: {reduction}")
    if not windows:
        raise VolDecodeError("批次不可為空")
    total: Grads = {name: np.zeros_like(value) for name, value in weights.params.items()}
    losses = []
    for window, window_labels in zip(windows, labels):
        _, cache = forward(window, weights, cfg)
        result = backward(cache, weights, cfg, labels=window_labels)
        losses.append(result.loss)
        for name, grad in result.param_grads.items():
            total[name] += grad
    if reduction == "mean":
        for name in total:
            total[name] /= len(windows)
    return float(np.mean(losses)), total
