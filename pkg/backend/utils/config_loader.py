"""
config.yaml 載入與日誌設定
"""
import copy
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from ..exceptions import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[2] / "config.yaml"

DEFAULT_CONFIG: Dict[str, Any] = {
    "app": {"title": "VolDecode", "version": "1.0"},
    "logging": {"level": "INFO", "format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    "synthesis": {
        "grid": [20, 24, 20],
        "tr_s": 0.72,
        "baseline": 100.0,
        "amplitude": 3.0,
        "noise_sd": 1.0,
        "roi_radius": None,
    },
    "saliency": {"seed_policy": "predicted", "fdr_q": 0.05, "frame_range": None, "regressor_shift": 0},
    "report": {"width_in": 11.0, "dpi": 72, "hash_salt": "vwdecode"},
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_app_config(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    讀取 config.yaml 並與預設值合併

    Args:
        path: 設定檔路徑；None 時使用專案根目錄的 config.yaml，檔案不存在則用預設值

    Returns:
        設定字典
    """
    config_path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not config_path.exists():
        if path is not None:
            raise FileNotFoundError(f"找不到設定檔: {config_path}")
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        loaded = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{config_path}: YAML 格式錯誤（{exc}）") from exc
    if not isinstance(loaded, dict):
        raise ConfigError(f"{config_path}: 頂層必須為對應表")
    return _merge(DEFAULT_CONFIG, loaded)


def setup_logging(config: Dict[str, Any], verbose: bool = False) -> None:
    """依設定初始化 root logger（輸出到 stderr）"""
    section = config.get("logging", {})
    level = logging.DEBUG if verbose else getattr(logging, str(section.get("level", "INFO")).upper(), logging.INFO)
    logging.basicConfig(level=level, format=section.get("format", DEFAULT_CONFIG["logging"]["format"]),
                        stream=sys.stderr, force=True)
