"""
掃描、權重與 JSON 側車的讀寫
"""
import logging
from pathlib import Path
from typing import List, Optional, Tuple, Type, TypeVar, Union

import numpy as np

from ..exceptions import DataFormatError
from ..models import (
    ModelConfig,
    ModelWeights,
    Phantom,
    RunData,
    RunManifest,
    TaskDesign,
    TrainHistory,
    WeightsManifest,
)
from .validation import validate_run_manifest
from .volume_io import read_volume, write_volume

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.json"
PathLike = Union[str, Path]
T = TypeVar("T")


def save_json(path: PathLike, obj) -> Path:
    """以 dataclasses-json 寫出（縮排 2，保留非 ASCII）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(obj.to_json(indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def load_json(path: PathLike, cls: Type[T]) -> T:
    """讀取 JSON 並轉為指定的 dataclass；結構錯誤時拋出 DataFormatError"""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        return cls.from_json(text)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise DataFormatError(f"{path}: 無法解析為 {cls.__name__}（{exc}）") from exc


def save_run(run: RunData, phantom: Phantom, seed: int, out_dir: PathLike) -> Path:
    """
    寫出 {run_id}.vwt 與 {run_id}.manifest.json

    Returns:
        清單路徑
    """
    out_dir = Path(out_dir)
    volume_file = f"{run.run_id}.vwt"
    write_volume(out_dir / volume_file, run.volume)
    design = run.design
    manifest = RunManifest(run_id=run.run_id, volume_file=volume_file, tr_s=design.tr_s,
                           n_frames=design.n_frames, conditions=list(design.conditions),
                           events=list(design.events), design_kind=design.kind,
                           phantom=phantom, seed=seed)
    return save_json(out_dir / f"{run.run_id}{MANIFEST_SUFFIX}", manifest)


def list_run_manifests(directory: PathLike) -> List[Path]:
    """目錄下所有掃描清單（依檔名排序）"""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"找不到資料目錄: {directory}")
    return sorted(directory.glob(f"*{MANIFEST_SUFFIX}"))


def resolve_manifest(path: PathLike) -> Path:
    """
    --run 參數解析：清單檔、VWT 檔（找同名清單）或只含一個清單的目錄
    """
    path = Path(path)
    if path.is_dir():
        manifests = list_run_manifests(path)
        if len(manifests) != 1:
            raise DataFormatError(f"{path}: 目錄中應恰有一個掃描清單，找到 {len(manifests)} 個")
        return manifests[0]
    if path.suffix == ".vwt":
        path = path.with_name(path.name[:-len(".vwt")] + MANIFEST_SUFFIX)
    if not path.exists():
        raise FileNotFoundError(f"找不到掃描清單: {path}")
    return path


def load_run(path: PathLike) -> Tuple[RunData, RunManifest]:
    """
    讀取掃描（體積 + 清單）

    Returns:
        (RunData（float64 體積）, RunManifest)
    """
    manifest_path = resolve_manifest(path)
    manifest = load_json(manifest_path, RunManifest)
    ok, errors = validate_run_manifest(manifest)
    if not ok:
        raise DataFormatError(f"{manifest_path}: " + "; ".join(errors))

    volume = read_volume(manifest_path.parent / manifest.volume_file).astype(np.float64)
    expected = (manifest.n_frames,) + tuple(manifest.phantom.grid)
    if volume.shape != expected:
        raise DataFormatError(f"{manifest.volume_file}: 形狀 {volume.shape} 與清單描述 {expected} 不符")

    design = TaskDesign(tr_s=manifest.tr_s, n_frames=manifest.n_frames,
                        conditions=list(manifest.conditions), events=list(manifest.events),
                        kind=manifest.design_kind)
    run = RunData(volume=volume, labels=design.frame_labels(), design=design, run_id=manifest.run_id)
    return run, manifest


def load_runs(directory: PathLike) -> List[Tuple[RunData, RunManifest]]:
    manifests = list_run_manifests(directory)
    if not manifests:
        raise DataFormatError(f"{directory}: 沒有任何掃描清單（*{MANIFEST_SUFFIX}）")
    return [load_run(m) for m in manifests]


def weights_sidecar(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".json")


def save_weights(path: PathLike, weights: ModelWeights, model_cfg: ModelConfig,
                 label_shift: int, history: Optional[TrainHistory] = None) -> Path:
    """
    權重寫成一維 VWT，名稱與形狀寫入同名 .json 側車

    Returns:
        側車路徑
    """
    write_volume(path, weights.flatten())
    manifest = WeightsManifest(model_config=model_cfg, param_names=weights.names(),
                               param_shapes=[list(weights[n].shape) for n in weights.names()],
                               label_shift=label_shift, history=history)
    return save_json(weights_sidecar(path), manifest)


def load_weights(path: PathLike) -> Tuple[ModelWeights, WeightsManifest]:
    """
    讀取權重與側車

    Returns:
        (ModelWeights（float64）, WeightsManifest)
    """
    sidecar = weights_sidecar(path)
    if not sidecar.exists():
        raise FileNotFoundError(f"找不到權重側車: {sidecar}")
    manifest = load_json(sidecar, WeightsManifest)
    if len(manifest.param_names) != len(manifest.param_shapes):
        raise DataFormatError(f"{sidecar}: 參數名稱與形狀數量不符")
    vector = read_volume(path).astype(np.float64)
    if vector.ndim != 1:
        raise DataFormatError(f"{path}: 權重檔應為一維，收到 {vector.shape}")
    shapes = {name: tuple(shape) for name, shape in zip(manifest.param_names, manifest.param_shapes)}
    try:
        weights = ModelWeights.from_flat(vector, shapes)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    return weights, manifest
