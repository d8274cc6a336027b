"""
檔案側車（JSON sidecar）資料模型
"""
from dataclasses import dataclass, field
from typing import List, Optional

from dataclasses_json import dataclass_json

from .network import ModelConfig
from .task import Phantom, TaskEvent
from .training import TrainHistory

GENERATOR_VERSION = "1.0"


@dataclass_json
@dataclass
class RunManifest:
    """合成 run 的清單"""
    run_id: str
    volume_file: str
    tr_s: float
    n_frames: int
    conditions: List[str]
    events: List[TaskEvent]
    design_kind: str
    phantom: Phantom
    seed: int
    generator_version: str = GENERATOR_VERSION


@dataclass_json
@dataclass
class WeightsManifest:
    """權重檔的側車：模型設定、參數名稱與訓練歷程"""
    model_config: ModelConfig
    param_names: List[str]
    param_shapes: List[List[int]]
    label_shift: int = 4
    history: Optional[TrainHistory] = None


@dataclass_json
@dataclass
class MapSidecar:
    """統計圖（beta / t / p / FDR 遮罩）的側車"""
    condition: str
    kind: str
    fdr_q: float
    cutoff_p: Optional[float] = None
    n_significant: int = 0
    df: int = 0
    n_runs: int = 0
    frame_offset: int = 0
    run_ids: List[str] = field(default_factory=list)
