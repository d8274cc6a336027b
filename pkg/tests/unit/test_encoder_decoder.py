"""
編碼器-解碼器模型測試：初始化、各元件形狀、端到端梯度
"""
from pathlib import Path

import numpy as np
import pytest

from backend.algorithms import (
    backward,
    batch_gradients,
    channel_attention,
    decode_frames,
    forward,
    init_params,
    param_shapes,
    time_embed,
)
from backend.algorithms.encoder_decoder import validate_model_config
from backend.exceptions import ConfigError, ShapeError, VolDecodeError
from backend.models import ModelConfig
from backend.utils import load_json
from tests.helpers import (
    directional_check,
    gradcheck_configs,
    random_labels,
    random_window,
    rel_error,
    toy_config,
)

CONFIG_DIR = Path(__file__).resolve().parents[2] / "data" / "configs"

# ==================== 設定與初始化 ====================


class TestModelConfig:
    """測試模型設定驗證"""

    def test_default_is_valid(self):
        """測試預設設定有效"""
        validate_model_config(ModelConfig())

    def test_final_width_not_divisible(self):
        """測試最終寬度無法被 t 整除"""
        with pytest.raises(ConfigError, match="整除"):
            validate_model_config(toy_config(stage_widths=[8, 6]))

    def test_reduction_not_divisible(self):
        """測試縮減比無法整除階段寬度"""
        with pytest.raises(ConfigError, match="縮減比"):
            validate_model_config(toy_config(reduction=3))

    def test_single_class(self):
        """測試 K < 2"""
        with pytest.raises(ConfigError):
            validate_model_config(toy_config(n_classes=1))

    def test_shipped_configs_collapse_space(self):
        """測試隨附的模型設定把空間降到 1×1×1，每幀分到 7 個特徵"""
        for name, n_classes in (("model_config.json", 7), ("model_config_event.json", 4)):
            cfg = load_json(CONFIG_DIR / name, ModelConfig)
            validate_model_config(cfg)
            assert cfg.n_classes == n_classes
            assert cfg.frame_features == 7
            _, cache = forward(np.zeros((cfg.t,) + cfg.grid), init_params(cfg, 0), cfg)
            assert cache.pool.x_shape == (cfg.final_width, 1, 1, 1)

    def test_param_names(self):
        """測試參數名稱與投影捷徑只在寬度改變時出現"""
        shapes = param_shapes(toy_config(stage_widths=[4, 8]))
        assert list(shapes)[:4] == ["embed.w", "embed.b", "stem.w", "stem.b"]
        assert "stage0.down.proj.w" in shapes
        assert "stage1.down.proj.w" not in shapes
        assert shapes["head.w"] == (3, 2)
        assert shapes["stage0.block0.attn.fc1.w"] == (1, 8)


class TestInitParams:
    """測試權重初始化"""

    def test_deterministic(self):
        """測試同種子產生相同權重"""
        a = init_params(toy_config(), 7)
        b = init_params(toy_config(), 7)
        assert a.names() == b.names()
        for name in a.names():
            np.testing.assert_array_equal(a[name], b[name])

    def test_seeds_differ(self):
        """測試不同種子產生不同權重"""
        a = init_params(toy_config(), 1)
        b = init_params(toy_config(), 2)
        assert not np.array_equal(a["stem.w"], b["stem.w"])

    def test_biases_zero_and_shapes(self):
        """測試 bias 為 0 且形狀符合 param_shapes"""
        cfg = toy_config()
        weights = init_params(cfg, 0)
        for name, shape in param_shapes(cfg).items():
            assert weights[name].shape == shape
            if name.endswith(".b"):
                assert not weights[name].any()


# ==================== 元件 ====================


class TestComponents:
    """測試時間嵌入、通道注意力與解碼頭"""

    def setup_method(self):
        self.cfg = toy_config()
        self.weights = init_params(self.cfg, 0)

    def test_time_embed_shape(self):
        """測試時間嵌入輸出 c×D×H×W"""
        out = time_embed(random_window(self.cfg), self.weights)
        assert out.shape == (4, 8, 8, 8)

    def test_time_embed_identity(self):
        """測試 c = t 且權重為單位矩陣時輸出等於輸入"""
        weights = self.weights.copy()
        weights.params["embed.w"] = np.eye(4).reshape(4, 4, 1, 1, 1)
        window = random_window(self.cfg)
        np.testing.assert_allclose(time_embed(window, weights), window)

    def test_time_embed_frame_mismatch(self):
        """測試幀數與 t 不符"""
        with pytest.raises(ShapeError):
            time_embed(np.zeros((5, 8, 8, 8)), self.weights)

    def test_attention_constant_channels(self):
        """測試常數通道的注意力分數與分數範圍"""
        x = np.ones((8, 3, 3, 3)) * np.arange(8.0)[:, None, None, None]
        scaled, scores = channel_attention(x, self.weights.params, "stage0.block0.attn.", self.cfg)
        assert scores.shape == (8,)
        assert np.all((scores > 0) & (scores < 1))
        np.testing.assert_allclose(scaled, x * scores[:, None, None, None])

    def test_attention_zero_weights(self):
        """測試注意力權重全為 0 時分數皆為 0.5"""
        params = {k: np.zeros_like(v) for k, v in self.weights.params.items()}
        x = np.random.default_rng(0).normal(size=(8, 2, 2, 2))
        scaled, scores = channel_attention(x, params, "stage0.block0.attn.", self.cfg)
        np.testing.assert_allclose(scores, 0.5)
        np.testing.assert_allclose(scaled, 0.5 * x)

    def test_attention_channel_mismatch(self):
        """測試通道數與注意力參數不符"""
        with pytest.raises(ShapeError):
            channel_attention(np.zeros((4, 2, 2, 2)), self.weights.params, "stage0.block0.attn.", self.cfg)

    def test_decode_frames_groups(self):
        """測試特徵切成 t 段且共享分類頭"""
        feature = np.repeat(np.array([1.0, -1.0, 2.0, 0.0]), 2)
        logits = decode_frames(feature, self.weights, 4)
        assert logits.shape == (4, 3)
        expected = feature.reshape(4, 2) @ self.weights["head.w"].T + self.weights["head.b"]
        np.testing.assert_allclose(logits, expected)

    def test_decode_frames_not_divisible(self):
        """測試特徵長度無法被 t 整除"""
        with pytest.raises(ShapeError):
            decode_frames(np.ones(7), self.weights, 4)


# ==================== 前向與反向 ====================


class TestForwardBackward:
    """測試完整模型的前向輸出與梯度"""

    def setup_method(self):
        self.cfg = toy_config()
        self.weights = init_params(self.cfg, 0)
        self.window = random_window(self.cfg)

    def test_probabilities(self):
        """測試輸出 t×K 且每列和為 1"""
        probs, cache = forward(self.window, self.weights, self.cfg)
        assert probs.shape == (4, 3)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0)
        assert len(cache.attention_scores) == 2

    def test_deterministic(self):
        """測試相同輸入得到相同輸出"""
        a, _ = forward(self.window, self.weights, self.cfg)
        b, _ = forward(self.window.copy(), self.weights, self.cfg)
        np.testing.assert_array_equal(a, b)

    def test_wrong_window_shape(self):
        """測試輸入形狀不符"""
        with pytest.raises(ShapeError):
            forward(np.zeros((4, 8, 8, 7)), self.weights, self.cfg)

    @pytest.mark.parametrize("alpha", [0.5, 3.0, 40.0])
    def test_input_scaling_keeps_argmax(self, alpha):
        """測試 bias 全為 0、注意力分數固定時，輸入乘上 α > 0 不改變每列 argmax"""
        weights = self.weights.copy()
        for name in weights.names():
            if name.endswith(".b") or name.endswith("attn.fc2.w"):
                weights.params[name] = np.zeros_like(weights[name])
        _, base = forward(self.window, weights, self.cfg)
        _, scaled = forward(alpha * self.window, weights, self.cfg)
        np.testing.assert_array_equal(scaled.logits.argmax(axis=1), base.logits.argmax(axis=1))
        np.testing.assert_allclose(scaled.logits, alpha * base.logits, rtol=1e-9, atol=1e-12)

    def test_backward_without_cache(self):
        """測試沒有 cache 時拒絕反傳"""
        with pytest.raises(VolDecodeError):
            backward(None, self.weights, self.cfg, labels=np.zeros(4, dtype=int))

    def test_guided_seed_shape(self):
        """測試 guided 種子形狀不符"""
        _, cache = forward(self.window, self.weights, self.cfg)
        with pytest.raises(ShapeError):
            backward(cache, self.weights, self.cfg, mode="guided", seed=np.zeros((3, 3)))

    def test_param_grads_complete(self):
        """測試每個參數都有同形狀的梯度"""
        _, cache = forward(self.window, self.weights, self.cfg)
        result = backward(cache, self.weights, self.cfg, labels=random_labels(self.cfg))
        assert list(result.param_grads) == self.weights.names()
        for name, grad in result.param_grads.items():
            assert grad.shape == self.weights[name].shape
        assert result.input_grad.shape == self.window.shape
        assert result.loss > 0

    @pytest.mark.parametrize("index", range(3))
    def test_gradient_matches_finite_difference(self, index):
        """測試參數與輸入梯度在隨機方向上與中央差分一致"""
        cfg = gradcheck_configs()[index]
        param_error, input_error = directional_check(cfg, seed=index)
        assert param_error <= 1e-4
        assert input_error <= 1e-4

    def test_guided_equals_standard_without_relu(self):
        """測試沒有 relu 的網路 guided 梯度等於一般輸入梯度"""
        cfg = toy_config(use_relu=False)
        weights = init_params(cfg, 3)
        _, cache = forward(self.window, weights, cfg)
        seed = np.zeros((4, 3))
        seed[1, 2] = 1.0
        guided = backward(cache, weights, cfg, mode="guided", seed=seed).input_grad
        standard = backward(cache, weights, cfg, mode="standard", seed=seed).input_grad
        np.testing.assert_allclose(guided, standard, rtol=1e-10, atol=1e-14)

    def test_guided_has_no_param_grads(self):
        """測試 guided 模式只回傳輸入梯度"""
        _, cache = forward(self.window, self.weights, self.cfg)
        seed = np.zeros((4, 3))
        seed[0, 0] = 1.0
        result = backward(cache, self.weights, self.cfg, mode="guided", seed=seed)
        assert result.param_grads is None
        assert result.loss is None


class TestBatchGradients:
    """測試批次梯度的線性性"""

    def setup_method(self):
        self.cfg = toy_config()
        self.weights = init_params(self.cfg, 0)
        self.windows = [random_window(self.cfg, s) for s in range(2)]
        self.labels = [random_labels(self.cfg, s) for s in range(2)]

    def test_sum_of_singles(self):
        """測試批次總和梯度等於個別梯度相加"""
        _, total = batch_gradients(self.windows, self.labels, self.weights, self.cfg, reduction="sum")
        _, first = batch_gradients(self.windows[:1], self.labels[:1], self.weights, self.cfg, reduction="sum")
        _, second = batch_gradients(self.windows[1:], self.labels[1:], self.weights, self.cfg, reduction="sum")
        for name in total:
            np.testing.assert_allclose(total[name], first[name] + second[name], rtol=1e-10, atol=1e-14)

    def test_mean_is_half_of_sum(self):
        """測試 mean 為 sum 除以批次大小"""
        loss_mean, mean = batch_gradients(self.windows, self.labels, self.weights, self.cfg)
        loss_sum, total = batch_gradients(self.windows, self.labels, self.weights, self.cfg, reduction="sum")
        assert loss_mean == pytest.approx(loss_sum)
        assert rel_error(mean["stem.w"], total["stem.w"] / 2) < 1e-12

    def test_scale_homogeneity(self):
        """測試分類頭梯度隨上游種子線性縮放"""
        _, cache = forward(self.windows[0], self.weights, self.cfg)
        seed = np.random.default_rng(0).normal(size=(4, 3))
        one = backward(cache, self.weights, self.cfg, seed=seed)
        three = backward(cache, self.weights, self.cfg, seed=3 * seed)
        for name in one.param_grads:
            np.testing.assert_allclose(three.param_grads[name], 3 * one.param_grads[name],
                                       rtol=1e-9, atol=1e-14)

    def test_empty_batch(self):
        """測試空批次"""
        with pytest.raises(VolDecodeError):
            batch_gradients([], [], self.weights, self.cfg)
