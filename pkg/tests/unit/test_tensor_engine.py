"""
張量運算測試：形狀、錯誤處理與有限差分梯度
"""
import numpy as np
import pytest

from backend.engine import (
    ChannelScale,
    Conv3d,
    Dense,
    GlobalPool,
    Identity,
    Relu,
    Sigmoid,
    ensure_finite,
    output_extent,
    softmax,
    softmax_xent,
)
from backend.exceptions import LabelError, NonFiniteError, ShapeError, VolDecodeError
from tests.helpers import numeric_grad, rel_error

# ==================== 卷積 ====================


class TestConv3d:
    """測試 3D 卷積"""

    def setup_method(self):
        rng = np.random.default_rng(0)
        self.x = rng.normal(size=(2, 5, 4, 3))
        self.w = rng.normal(size=(3, 2, 3, 3, 3))
        self.b = rng.normal(size=3)

    def test_output_extent(self):
        """測試輸出尺寸公式"""
        assert output_extent(8, 3, 1, 1) == 8
        assert output_extent(8, 3, 2, 1) == 4
        assert output_extent(5, 3, 2, 1) == 3
        assert output_extent(5, 1, 2, 0) == 3

    def test_shape_same_padding(self):
        """測試 stride 1、pad 1 保持空間尺寸"""
        out = Conv3d().forward(self.x, self.w, self.b, 1, 1)
        assert out.shape == (3, 5, 4, 3)

    def test_shape_stride_two(self):
        """測試 stride 2 的輸出尺寸"""
        out = Conv3d().forward(self.x, self.w, self.b, 2, 1)
        assert out.shape == (3, 3, 2, 2)

    def test_pointwise_matches_einsum(self):
        """測試 1×1×1 卷積等於逐體素線性組合"""
        w = np.random.default_rng(1).normal(size=(4, 2, 1, 1, 1))
        b = np.arange(4.0)
        out = Conv3d().forward(self.x, w, b)
        expected = np.einsum("oc,cdhw->odhw", w[:, :, 0, 0, 0], self.x) + b[:, None, None, None]
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_no_kernel_flip(self):
        """測試為互相關（不翻轉卷積核）"""
        x = np.zeros((1, 3, 3, 3))
        x[0, 1, 1, 1] = 1.0
        w = np.arange(27.0).reshape(1, 1, 3, 3, 3)
        out = Conv3d().forward(x, w, np.zeros(1), 1, 1)
        # 輸出 (i,j,k) = Σ w[a,b,c]·x[i+a−1, j+b−1, k+c−1]
        assert out[0, 0, 0, 0] == w[0, 0, 2, 2, 2]
        assert out[0, 2, 2, 2] == w[0, 0, 0, 0, 0]

    def test_channel_mismatch(self):
        """測試通道數不符"""
        with pytest.raises(ShapeError, match="通道數不符"):
            Conv3d().forward(self.x, np.zeros((3, 4, 3, 3, 3)), self.b)

    def test_non_positive_output(self):
        """測試輸出尺寸非正"""
        with pytest.raises(ShapeError, match="非正"):
            Conv3d().forward(np.zeros((2, 2, 2, 2)), self.w, self.b, 1, 0)

    def test_backward_requires_forward(self):
        """測試未 forward 就 backward"""
        with pytest.raises(VolDecodeError):
            Conv3d().backward(np.zeros((3, 5, 4, 3)))

    @pytest.mark.parametrize("stride,pad", [(1, 1), (2, 1), (1, 0), (2, 0)])
    def test_gradients(self, stride, pad):
        """測試 x、w、b 的梯度與中央差分一致"""
        conv = Conv3d()
        out = conv.forward(self.x, self.w, self.b, stride, pad)
        upstream = np.random.default_rng(2).normal(size=out.shape)
        gx, gw, gb = conv.backward(upstream)

        def objective():
            return float(np.sum(Conv3d().forward(self.x, self.w, self.b, stride, pad) * upstream))

        assert rel_error(gx, numeric_grad(objective, self.x)) < 1e-6
        assert rel_error(gw, numeric_grad(objective, self.w)) < 1e-6
        assert rel_error(gb, numeric_grad(objective, self.b)) < 1e-6


# ==================== 逐元素運算 ====================


class TestRelu:
    """測試 relu 與 guided 反傳"""

    def test_forward(self):
        """測試負值歸零"""
        out = Relu().forward(np.array([-1.0, 0.0, 2.0]))
        np.testing.assert_array_equal(out, [0.0, 0.0, 2.0])

    def test_standard_backward(self):
        """測試一般反傳只看前向輸入"""
        relu = Relu()
        relu.forward(np.array([-1.0, 2.0, 3.0]))
        grad = relu.backward(np.array([5.0, -4.0, 1.0]))
        np.testing.assert_array_equal(grad, [0.0, -4.0, 1.0])

    def test_guided_backward(self):
        """測試 guided 反傳同時要求輸入與上游梯度為正"""
        relu = Relu()
        relu.forward(np.array([-1.0, 2.0, 3.0, 0.0]))
        grad = relu.backward(np.array([5.0, -4.0, 1.0, 2.0]), mode="guided")
        np.testing.assert_array_equal(grad, [0.0, 0.0, 1.0, 0.0])

    def test_unknown_mode(self):
        """測試未知模式"""
        relu = Relu()
        relu.forward(np.ones(2))
        with pytest.raises(ValueError, match="未知的反傳模式"):
            relu.backward(np.ones(2), mode="deconv")

    def test_identity_ignores_mode(self):
        """測試恆等運算在兩種模式下都直接傳遞梯度"""
        op = Identity()
        op.forward(np.array([-1.0, 1.0]))
        np.testing.assert_array_equal(op.backward(np.array([-2.0, 3.0]), mode="guided"), [-2.0, 3.0])


class TestSmoothOps:
    """測試 dense、pool、sigmoid、通道縮放的梯度"""

    def setup_method(self):
        self.rng = np.random.default_rng(3)

    def test_dense_vector(self):
        """測試單一向量的 dense 梯度"""
        x = self.rng.normal(size=6)
        w = self.rng.normal(size=(4, 6))
        b = self.rng.normal(size=4)
        dense = Dense()
        out = dense.forward(x, w, b)
        upstream = self.rng.normal(size=out.shape)
        gx, gw, gb = dense.backward(upstream)

        def objective():
            return float(np.sum(Dense().forward(x, w, b) * upstream))

        assert rel_error(gx, numeric_grad(objective, x)) < 1e-7
        assert rel_error(gw, numeric_grad(objective, w)) < 1e-7
        assert rel_error(gb, numeric_grad(objective, b)) < 1e-7

    def test_dense_rows(self):
        """測試多列輸入（共享權重）的 dense 梯度"""
        x = self.rng.normal(size=(3, 5))
        w = self.rng.normal(size=(2, 5))
        b = self.rng.normal(size=2)
        dense = Dense()
        out = dense.forward(x, w, b)
        upstream = self.rng.normal(size=out.shape)
        gx, gw, gb = dense.backward(upstream)

        def objective():
            return float(np.sum(Dense().forward(x, w, b) * upstream))

        assert rel_error(gw, numeric_grad(objective, w)) < 1e-7
        assert rel_error(gx, numeric_grad(objective, x)) < 1e-7
        np.testing.assert_allclose(gb, upstream.sum(axis=0))

    def test_dense_shape_error(self):
        """測試 dense 維度不符"""
        with pytest.raises(ShapeError):
            Dense().forward(np.ones(3), np.ones((2, 4)), np.ones(2))

    @pytest.mark.parametrize("kind", ["avg", "max"])
    def test_global_pool(self, kind):
        """測試全域池化梯度"""
        x = self.rng.normal(size=(3, 2, 3, 2))
        pool = GlobalPool(kind)
        out = pool.forward(x)
        upstream = self.rng.normal(size=out.shape)
        grad = pool.backward(upstream)

        def objective():
            return float(np.sum(GlobalPool(kind).forward(x) * upstream))

        assert rel_error(grad, numeric_grad(objective, x)) < 1e-7

    def test_max_pool_tie_goes_to_first(self):
        """測試最大值平手時梯度給列優先第一個"""
        x = np.ones((1, 2, 2, 1))
        pool = GlobalPool("max")
        pool.forward(x)
        grad = pool.backward(np.array([1.0]))
        assert grad[0, 0, 0, 0] == 1.0
        assert grad.sum() == 1.0

    def test_sigmoid(self):
        """測試 sigmoid 梯度"""
        x = self.rng.normal(size=5)
        op = Sigmoid()
        op.forward(x)
        upstream = self.rng.normal(size=5)

        def objective():
            return float(np.sum(Sigmoid().forward(x) * upstream))

        assert rel_error(op.backward(upstream), numeric_grad(objective, x)) < 1e-7

    def test_channel_scale(self):
        """測試通道縮放對輸入與分數的梯度"""
        x = self.rng.normal(size=(3, 2, 2, 2))
        scores = self.rng.uniform(size=3)
        op = ChannelScale()
        out = op.forward(x, scores)
        upstream = self.rng.normal(size=out.shape)
        gx, gs = op.backward(upstream)

        def objective():
            return float(np.sum(ChannelScale().forward(x, scores) * upstream))

        assert rel_error(gx, numeric_grad(objective, x)) < 1e-7
        assert rel_error(gs, numeric_grad(objective, scores)) < 1e-7


# ==================== softmax 與交叉熵 ====================


class TestSoftmax:
    """測試 softmax 與交叉熵"""

    def test_rows_sum_to_one(self):
        """測試每列機率和為 1，且對極端值穩定"""
        probs = softmax(np.array([[1000.0, 0.0, -1000.0], [1.0, 2.0, 3.0]]))
        np.testing.assert_allclose(probs.sum(axis=1), 1.0)
        assert np.all(np.isfinite(probs))

    def test_xent_value(self):
        """測試均勻 logits 的損失為 log K"""
        loss, probs, _ = softmax_xent(np.zeros((4, 3)), np.array([0, 1, 2, 0]))
        assert loss == pytest.approx(np.log(3))
        np.testing.assert_allclose(probs, 1 / 3)

    def test_xent_gradient(self):
        """測試交叉熵對 logits 的梯度"""
        rng = np.random.default_rng(4)
        logits = rng.normal(size=(5, 4))
        labels = np.array([0, 3, 1, 1, 2])
        _, _, grad = softmax_xent(logits, labels)
        numeric = numeric_grad(lambda: softmax_xent(logits, labels)[0], logits)
        assert rel_error(grad, numeric) < 1e-7

    def test_label_out_of_range(self):
        """測試標籤超出範圍"""
        with pytest.raises(LabelError):
            softmax_xent(np.zeros((2, 3)), np.array([0, 3]))

    def test_label_length_mismatch(self):
        """測試標籤長度不符"""
        with pytest.raises(ShapeError):
            softmax_xent(np.zeros((2, 3)), np.array([0]))

    def test_ensure_finite(self):
        """測試非有限值檢查"""
        ensure_finite(np.ones(3), "ok")
        with pytest.raises(NonFiniteError, match="grad"):
            ensure_finite(np.array([1.0, np.nan]), "grad")


# ==================== 多種子方向導數 ====================

VJP_TRIALS = 100
VJP_EPS = 1e-6

PRIMITIVES = {
    "conv_stride1": (Conv3d, [(2, 4, 3, 3), (3, 2, 3, 3, 3), (3,)], (1, 1)),
    "conv_stride2": (Conv3d, [(2, 4, 3, 3), (3, 2, 3, 3, 3), (3,)], (2, 1)),
    "conv_valid": (Conv3d, [(2, 4, 3, 3), (2, 2, 2, 2, 2), (2,)], (1, 0)),
    "dense": (Dense, [(3, 5), (2, 5), (2,)], ()),
    "relu": (Relu, [(4, 3)], ()),
    "avg_pool": (lambda: GlobalPool("avg"), [(3, 2, 3, 2)], ()),
    "max_pool": (lambda: GlobalPool("max"), [(3, 2, 3, 2)], ()),
    "sigmoid": (Sigmoid, [(6,)], ()),
    "channel_scale": (ChannelScale, [(3, 2, 2, 2), (3,)], ()),
}


def _directional_pair(make, shapes, extra, seed):
    """隨機方向上的解析導數與中央差分（以隨機上游梯度收縮輸出）"""
    rng = np.random.default_rng(seed)
    inputs = [rng.normal(size=s) for s in shapes]
    directions = [rng.normal(size=s) for s in shapes]
    op = make()
    out = op.forward(*inputs, *extra)
    upstream = rng.normal(size=out.shape)
    grads = op.backward(upstream)
    if isinstance(grads, np.ndarray):
        grads = (grads,)
    analytic = sum(float(np.sum(g * v)) for g, v in zip(grads, directions))

    def value(sign):
        moved = [x + sign * VJP_EPS * v for x, v in zip(inputs, directions)]
        return float(np.sum(make().forward(*moved, *extra) * upstream))

    return analytic, (value(1.0) - value(-1.0)) / (2 * VJP_EPS)


class TestVjpTrials:
    """測試每個基本運算在 100 組種子上的反傳與方向導數一致"""

    @pytest.mark.parametrize("name", sorted(PRIMITIVES))
    def test_primitive(self, name):
        """測試 ⟨vjp(u), v⟩ 等於 u·(f(x+εv) − f(x−εv))/2ε"""
        make, shapes, extra = PRIMITIVES[name]
        for seed in range(VJP_TRIALS):
            analytic, numeric = _directional_pair(make, shapes, extra, seed)
            assert abs(analytic - numeric) <= 1e-6 * max(1.0, abs(analytic)), (name, seed)

    def test_softmax_xent(self):
        """測試交叉熵對 logits 的梯度在 100 組種子上與方向導數一致"""
        for seed in range(VJP_TRIALS):
            rng = np.random.default_rng(seed)
            logits = rng.normal(size=(4, 5))
            labels = rng.integers(0, 5, size=4)
            direction = rng.normal(size=logits.shape)
            _, _, grad = softmax_xent(logits, labels)
            numeric = (softmax_xent(logits + VJP_EPS * direction, labels)[0]
                       - softmax_xent(logits - VJP_EPS * direction, labels)[0]) / (2 * VJP_EPS)
            analytic = float(np.sum(grad * direction))
            assert abs(analytic - numeric) <= 1e-6 * max(1.0, abs(analytic)), seed
