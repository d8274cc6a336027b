"""
訓練迴圈：隨機時間裁切 + AdamW + 暖身餘弦學習率
"""
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..engine import AdamW, lr_at
from ..exceptions import ConfigError, LabelError, NonFiniteError, ShapeError
from ..models import (
    EpochRecord,
    ModelConfig,
    ModelWeights,
    RunData,
    ScheduleConfig,
    TrainConfig,
    TrainHistory,
)
from ..utils.validation import validate_train_config
from .encoder_decoder import batch_gradients, init_params, validate_model_config
from .preprocessing import sample_window, shift_labels, standardize_run
from .voting_predictor import predict_run

logger = logging.getLogger(__name__)


def schedule_for(n_runs: int, train_cfg: TrainConfig) -> ScheduleConfig:
    """
    由 run 數與訓練設定推得學習率排程

    每個 epoch 的步數 = ceil(run 數 × windows_per_run / batch_size)
    """
    steps_per_epoch = math.ceil(n_runs * train_cfg.windows_per_run / train_cfg.batch_size)
    return ScheduleConfig(warmup_steps=train_cfg.warmup_epochs * steps_per_epoch,
                          total_steps=train_cfg.epochs * steps_per_epoch,
                          lr_start=train_cfg.lr_start, lr_peak=train_cfg.lr_peak,
                          lr_end=train_cfg.lr_end)


def prepare_run(run: RunData, label_shift: int) -> Tuple[RunData, np.ndarray]:
    """標準化並位移標籤"""
    return standardize_run(run), shift_labels(run.labels, label_shift)


def frame_accuracy(weights: ModelWeights, prepared: Sequence[Tuple[RunData, np.ndarray]],
                   cfg: ModelConfig, stride: int) -> float:
    """以投票推論計算所有 run 合併的逐幀準確率"""
    correct = 0
    total = 0
    for run, shifted in prepared:
        prediction = predict_run(weights, run, cfg, stride)
        correct += int(np.sum(prediction.labels == shifted))
        total += shifted.size
    return correct / total if total else 0.0


def _check_runs(runs: Sequence[RunData], cfg: ModelConfig, what: str):
    for run in runs:
        if run.grid != tuple(cfg.grid):
            raise ShapeError(f"{what} {run.run_id} 的網格 {run.grid} 與模型 {tuple(cfg.grid)} 不符")
        if run.n_frames < cfg.t:
            raise ShapeError(f"{what} {run.run_id} 只有 {run.n_frames} 幀，少於 t={cfg.t}")
        labels = np.asarray(run.labels)
        if labels.size and (labels.min() < 0 or labels.max() >= cfg.n_classes):
            raise LabelError(f"{what} {run.run_id} 的標籤超出範圍 [0, {cfg.n_classes})")


def train(runs: List[RunData], model_cfg: ModelConfig, train_cfg: TrainConfig,
          val_runs: Optional[List[RunData]] = None,
          progress_callback: Callable = None) -> Tuple[ModelWeights, TrainHistory]:
    """
    訓練模型

    每個 epoch 以種子決定 run 的排列，每個 run 抽 windows_per_run 個視窗，
    依序組成批次；每個批次在 lr_at(step) 下執行一次 AdamW。

    Args:
        runs: 訓練 run（原始訊號，函數內標準化）
        model_cfg: 模型設定
        train_cfg: 訓練設定
        val_runs: 驗證 run；None 時以訓練 run 計算驗證準確率
        progress_callback: 每個 epoch 結束時以完成比例呼叫

    Returns:
        (最終權重, 訓練歷程)
    """
    validate_model_config(model_cfg)
    ok, errors = validate_train_config(train_cfg, model_cfg)
    if not ok:
        raise ConfigError("; ".join(errors))
    if not runs:
        raise ConfigError("至少需要一個訓練 run")
    _check_runs(runs, model_cfg, "訓練 run")
    if val_runs:
        _check_runs(val_runs, model_cfg, "驗證 run")

    prepared = [prepare_run(run, train_cfg.label_shift) for run in runs]
    val_prepared = ([prepare_run(run, train_cfg.label_shift) for run in val_runs]
                    if val_runs else prepared)

    schedule = schedule_for(len(runs), train_cfg)
    rng = np.random.default_rng(train_cfg.seed)
    weights = init_params(model_cfg, train_cfg.seed)
    optimizer = AdamW(weight_decay=train_cfg.weight_decay)
    history = TrainHistory()
    step = 0
    logger.info("開始訓練：%d 個 run，%d 個 epoch，每 epoch %d 步",
                len(runs), train_cfg.epochs, schedule.total_steps // train_cfg.epochs)

    for epoch in range(train_cfg.epochs):
        # 本 epoch 的視窗
        windows, labels = [], []
        for index in rng.permutation(len(prepared)):
            run, shifted = prepared[index]
            for _ in range(train_cfg.windows_per_run):
                window, window_labels = sample_window(run, shifted, model_cfg.t, rng)
                windows.append(window)
                labels.append(window_labels)

        batch_losses = []
        lr = schedule.lr_start
        for batch, begin in enumerate(range(0, len(windows), train_cfg.batch_size)):
            end = begin + train_cfg.batch_size
            loss, grads = batch_gradients(windows[begin:end], labels[begin:end], weights, model_cfg)
            if not math.isfinite(loss):
                raise NonFiniteError("訓練損失為非有限值", epoch=epoch, batch=batch)
            lr = lr_at(step, schedule)
            try:
                params, _ = optimizer.step(weights.params, grads, lr)
            except NonFiniteError as exc:
                raise NonFiniteError(str(exc), epoch=epoch, batch=batch) from exc
            weights = ModelWeights(params)
            step += 1
            batch_losses.append(loss)
            logger.debug("epoch %d batch %d loss %.6f lr %.3g", epoch, batch, loss, lr)

        val_accuracy = frame_accuracy(weights, val_prepared, model_cfg, train_cfg.val_stride)
        record = EpochRecord(epoch=epoch, loss=float(np.mean(batch_losses)),
                             val_accuracy=val_accuracy, lr=lr, steps=step)
        history.epochs.append(record)
        logger.info("epoch %d/%d loss=%.4f val_acc=%.4f lr=%.3g",
                    epoch + 1, train_cfg.epochs, record.loss, val_accuracy, lr)

        if progress_callback:
            progress_callback((epoch + 1) / train_cfg.epochs)

    return weights, history
