"""
訓練迴圈測試
"""
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from backend.algorithms import frame_accuracy, predict_run, prepare_run, schedule_for, train
from backend.exceptions import ConfigError, NonFiniteError, ShapeError
from backend.models import ModelConfig, TaskDesign, TaskEvent, TrainConfig
from backend.simulation import default_phantom, render_run
from backend.utils import load_json, validate_train_config
from tests.helpers import random_run, toy_config

CONFIG_DIR = Path(__file__).resolve().parents[2] / "data" / "configs"


def _train_config(**overrides) -> TrainConfig:
    params = dict(batch_size=2, epochs=2, warmup_epochs=1, window=4, label_shift=1,
                  windows_per_run=2, lr_peak=0.005, lr_start=1e-4, val_stride=4, seed=0)
    params.update(overrides)
    return TrainConfig(**params)


class TestTrainConfig:
    """測試訓練設定驗證"""

    def test_default_valid(self):
        """測試預設設定有效"""
        ok, errors = validate_train_config(TrainConfig())
        assert ok, errors

    def test_shift_not_below_window(self):
        """測試 l ≥ t 無效"""
        ok, errors = validate_train_config(TrainConfig(window=4, label_shift=4))
        assert not ok

    def test_shipped_configs(self):
        """測試隨附的訓練設定有效，論文協定設定等於 TrainConfig 預設值"""
        desk = load_json(CONFIG_DIR / "train_config.json", TrainConfig)
        ok, errors = validate_train_config(desk, load_json(CONFIG_DIR / "model_config.json", ModelConfig))
        assert ok, errors
        assert (desk.window, desk.label_shift, desk.stride) == (16, 4, 1)
        assert load_json(CONFIG_DIR / "paper_train_config.json", TrainConfig) == TrainConfig()

    def test_warmup_required(self):
        """測試 warmup_epochs 為 0 無效"""
        ok, errors = validate_train_config(TrainConfig(warmup_epochs=0))
        assert not ok
        assert any("warmup_epochs" in e for e in errors)

    def test_window_mismatch(self):
        """測試訓練視窗與模型 t 不一致"""
        ok, errors = validate_train_config(TrainConfig(window=8), toy_config())
        assert not ok
        assert any("不一致" in e for e in errors)

    def test_schedule_steps(self):
        """測試每 epoch 步數向上取整"""
        schedule = schedule_for(3, _train_config(batch_size=4, windows_per_run=3, epochs=5, warmup_epochs=2))
        assert schedule.total_steps == 15
        assert schedule.warmup_steps == 6


class TestTrain:
    """測試訓練流程"""

    def setup_method(self):
        self.cfg = toy_config(grid=(4, 4, 4))
        self.runs = [random_run(self.cfg, 12, seed=s, run_id=f"r{s}") for s in range(2)]

    def test_history(self):
        """測試每個 epoch 一筆紀錄，步數累加"""
        weights, history = train(self.runs, self.cfg, _train_config())
        assert len(history) == 2
        assert [r.steps for r in history.epochs] == [2, 4]
        assert all(np.isfinite(r.loss) for r in history.epochs)
        assert 0.0 <= history.epochs[-1].val_accuracy <= 1.0
        assert weights.all_finite()

    def test_deterministic(self):
        """測試相同種子得到相同權重"""
        a, history_a = train(self.runs, self.cfg, _train_config())
        b, history_b = train(self.runs, self.cfg, _train_config())
        assert history_a.losses == history_b.losses
        for name in a.names():
            np.testing.assert_array_equal(a[name], b[name])

    def test_progress_callback(self):
        """測試進度回呼"""
        seen = []
        train(self.runs, self.cfg, _train_config(), progress_callback=seen.append)
        assert seen == [0.5, 1.0]

    def test_weights_change(self):
        """測試訓練會更新權重"""
        from backend.algorithms import init_params
        initial = init_params(self.cfg, 0)
        weights, _ = train(self.runs, self.cfg, _train_config())
        assert not np.array_equal(initial["stem.w"], weights["stem.w"])

    def test_non_finite_loss_aborts(self):
        """測試非有限損失時中止並回報 epoch 與 batch"""
        def bad_gradients(windows, labels, weights, cfg):
            return float("nan"), {name: np.zeros_like(v) for name, v in weights.params.items()}

        with patch("backend.algorithms.trainer.batch_gradients", bad_gradients):
            with pytest.raises(NonFiniteError, match="epoch=0, batch=0") as info:
                train(self.runs, self.cfg, _train_config())
        assert info.value.epoch == 0
        assert info.value.batch == 0

    def test_non_finite_gradient_aborts(self):
        """測試非有限梯度時中止"""
        def bad_gradients(windows, labels, weights, cfg):
            grads = {name: np.zeros_like(v) for name, v in weights.params.items()}
            grads["head.b"][0] = np.inf
            return 1.0, grads

        with patch("backend.algorithms.trainer.batch_gradients", bad_gradients):
            with pytest.raises(NonFiniteError) as info:
                train(self.runs, self.cfg, _train_config())
        assert info.value.epoch == 0

    def test_grid_mismatch(self):
        """測試 run 網格與模型不符"""
        with pytest.raises(ShapeError):
            train([random_run(toy_config(), 12)], self.cfg, _train_config())

    def test_short_run(self):
        """測試 run 比視窗短"""
        with pytest.raises(ShapeError):
            train([random_run(self.cfg, 3)], self.cfg, _train_config())

    def test_invalid_config(self):
        """測試無效訓練設定"""
        with pytest.raises(ConfigError):
            train(self.runs, self.cfg, _train_config(warmup_epochs=2))

    def test_no_runs(self):
        """測試沒有訓練資料"""
        with pytest.raises(ConfigError):
            train([], self.cfg, _train_config())


def _alternating_design(n_blocks: int = 8, block: int = 8, gap: int = 8, tr_s: float = 2.0) -> TaskDesign:
    """兩個狀態輪流、區塊之間以 rest 隔開的長 TR 區塊設計"""
    events = [TaskEvent(1 + k % 2, gap + k * (block + gap), block) for k in range(n_blocks)]
    return TaskDesign(tr_s=tr_s, n_frames=gap + n_blocks * (block + gap),
                      conditions=["rest", "a", "b"], events=events, kind="block")


@pytest.mark.slow
class TestOverfit:
    """長時間測試：單一無雜訊 run 可被記住"""

    def test_memorizes_noise_free_run(self):
        """測試 toy 模型在無雜訊 run 上訓練 20 個 epoch 後逐幀準確率 ≥ 0.99"""
        cfg = toy_config(stage_widths=[8, 8, 12])
        design = _alternating_design()
        run = render_run(design, default_phantom(cfg.grid, cfg.n_classes, noise_sd=0.0), seed=0)
        train_cfg = TrainConfig(batch_size=8, epochs=20, warmup_epochs=1, window=4, label_shift=3,
                                windows_per_run=256, lr_start=5e-4, lr_peak=5e-3, val_stride=4, seed=0)
        weights, history = train([run], cfg, train_cfg)

        prepared, shifted = prepare_run(run, train_cfg.label_shift)
        prediction = predict_run(weights, prepared, cfg)
        assert float(np.mean(prediction.labels == shifted)) >= 0.99
        assert frame_accuracy(weights, [(prepared, shifted)], cfg, 1) >= 0.99

        tail = history.losses[-5:]
        assert all(later <= earlier * 1.05 + 1e-3 for earlier, later in zip(tail, tail[1:]))
        assert tail[-1] < history.losses[0]
