"""
資料驗證工具函數：任務設計、體模、訓練設定與掃描側車
"""
from typing import List, Optional, Tuple

import numpy as np

from ..models import Phantom, TaskDesign, TrainConfig, ModelConfig, RunManifest


def validate_design(design: TaskDesign) -> Tuple[bool, List[str]]:
    """
    驗證刺激時序的完整性

    Args:
        design: 任務設計

    Returns:
        (是否有效, 錯誤訊息列表)
    """
    errors = []

    # 檢查基本欄位
    if design.tr_s <= 0:
        errors.append(f"TR 必須為正，收到 {design.tr_s}")
    if design.n_frames < 1:
        errors.append(f"幀數必須為正，收到 {design.n_frames}")
    if not design.conditions:
        errors.append("狀態列表不可為空")
        return False, errors
    if design.conditions[0] != "rest":
        errors.append(f"索引 0 必須為 rest，收到 {design.conditions[0]}")

    # 檢查重複名稱
    names = design.conditions
    duplicates = sorted(name for name in set(names) if names.count(name) > 1)
    if duplicates:
        errors.append(f"發現重複的狀態名稱: {', '.join(duplicates)}")

    # 檢查每個事件
    coverage = np.zeros(max(design.n_frames, 0), dtype=np.int64)
    for i, event in enumerate(design.events):
        if not 1 <= event.condition < len(names):
            errors.append(f"事件 {i} 的狀態索引 {event.condition} 無效（rest 不可作為事件）")
        if event.duration < 1:
            errors.append(f"事件 {i} 的長度必須為正，收到 {event.duration}")
        if event.onset < 0 or event.end > design.n_frames:
            errors.append(f"事件 {i} 超出掃描範圍: [{event.onset}, {event.end}) / {design.n_frames}")
            continue
        coverage[event.onset:event.end] += 1

    # 檢查事件重疊
    overlapped = np.flatnonzero(coverage > 1)
    if overlapped.size:
        errors.append(f"事件重疊於 {overlapped.size} 幀（第一幀 {int(overlapped[0])}）")

    return len(errors) == 0, errors


def validate_phantom(phantom: Phantom) -> Tuple[bool, List[str]]:
    """
    驗證體模：ROI 位於網格內、振幅為正、雜訊非負

    Returns:
        (是否有效, 錯誤訊息列表)
    """
    errors = []

    if len(phantom.grid) != 3 or min(phantom.grid) < 1:
        errors.append(f"網格必須為三個正整數，收到 {phantom.grid}")
        return False, errors
    if phantom.noise_sd < 0:
        errors.append(f"noise_sd 不可為負，收到 {phantom.noise_sd}")

    for roi in phantom.rois:
        if roi.amplitude <= 0:
            errors.append(f"狀態 {roi.condition} 的振幅必須為正，收到 {roi.amplitude}")
        if min(roi.radii) <= 0:
            errors.append(f"狀態 {roi.condition} 的半徑必須為正，收到 {roi.radii}")
        inside = all(0 <= c - r and c + r <= e - 1
                     for c, r, e in zip(roi.center, roi.radii, phantom.grid))
        if not inside:
            errors.append(f"狀態 {roi.condition} 的 ROI（中心 {roi.center}，半徑 {roi.radii}）超出網格 {phantom.grid}")

    return len(errors) == 0, errors


def validate_train_config(train_cfg: TrainConfig,
                          model_cfg: Optional[ModelConfig] = None) -> Tuple[bool, List[str]]:
    """
    驗證訓練設定（必要時比對模型設定）

    Returns:
        (是否有效, 錯誤訊息列表)
    """
    errors = []

    if train_cfg.window < 1:
        errors.append(f"視窗長度 t 必須為正，收到 {train_cfg.window}")
    if not 0 <= train_cfg.label_shift < train_cfg.window:
        errors.append(f"標籤位移 l={train_cfg.label_shift} 必須介於 [0, t={train_cfg.window})")
    if train_cfg.stride < 1 or train_cfg.val_stride < 1:
        errors.append(f"推論步長必須 ≥ 1，收到 stride={train_cfg.stride}, val_stride={train_cfg.val_stride}")
    if train_cfg.epochs < 1:
        errors.append(f"epochs 必須為正，收到 {train_cfg.epochs}")
    if not 0 < train_cfg.warmup_epochs < train_cfg.epochs:
        errors.append(f"warmup_epochs={train_cfg.warmup_epochs} 必須介於 1 與 epochs={train_cfg.epochs} 之間（不含 epochs）")
    if train_cfg.batch_size < 1 or train_cfg.windows_per_run < 1:
        errors.append("batch_size 與 windows_per_run 必須為正")
    if train_cfg.weight_decay < 0:
        errors.append(f"weight_decay 不可為負，收到 {train_cfg.weight_decay}")
    if not train_cfg.lr_start <= train_cfg.lr_peak:
        errors.append(f"lr_start {train_cfg.lr_start} 不可大於 lr_peak {train_cfg.lr_peak}")

    # 與模型設定一致
    if model_cfg is not None and model_cfg.t != train_cfg.window:
        errors.append(f"訓練視窗 {train_cfg.window} 與模型 t={model_cfg.t} 不一致")

    return len(errors) == 0, errors


def validate_run_manifest(manifest: RunManifest) -> Tuple[bool, List[str]]:
    """
    驗證掃描側車的欄位

    Returns:
        (是否有效, 錯誤訊息列表)
    """
    errors = []

    if not manifest.volume_file:
        errors.append("volume_file 不可為空")
    if manifest.n_frames < 1:
        errors.append(f"n_frames 必須為正，收到 {manifest.n_frames}")

    design = TaskDesign(tr_s=manifest.tr_s, n_frames=manifest.n_frames,
                        conditions=list(manifest.conditions), events=list(manifest.events),
                        kind=manifest.design_kind)
    _, design_errors = validate_design(design)
    errors.extend(design_errors)

    return len(errors) == 0, errors
