"""
train：以資料目錄中的所有 run 訓練模型並寫出權重
"""
import logging
from pathlib import Path

from backend.algorithms import train
from backend.exceptions import ConfigError
from backend.models import ModelConfig, TrainConfig
from backend.utils import load_json, load_runs, save_weights, write_history_csv

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("train", help="訓練編碼器-解碼器")
    parser.add_argument("--data", type=Path, required=True)
    parser.add_argument("--model-config", type=Path, required=True)
    parser.add_argument("--train-config", type=Path, required=True)
    parser.add_argument("--out", type=Path, required=True, help="權重檔（.vwt），側車寫在同名 .json")
    parser.add_argument("--val", type=Path, default=None, help="驗證資料目錄")
    parser.set_defaults(handler=run)
    return parser


def check_compatible(model_cfg: ModelConfig, data, source) -> None:
    """模型網格與類別數必須與資料一致"""
    for run, manifest in data:
        if run.grid != tuple(model_cfg.grid):
            raise ConfigError(f"{source}: run {run.run_id} 的網格 {run.grid} 與模型設定 {tuple(model_cfg.grid)} 不符")
        if run.design.n_conditions != model_cfg.n_classes:
            raise ConfigError(f"{source}: run {run.run_id} 有 {run.design.n_conditions} 個狀態，"
                              f"模型設定 n_classes={model_cfg.n_classes}")


def run(args, config) -> int:
    model_cfg = load_json(args.model_config, ModelConfig)
    train_cfg = load_json(args.train_config, TrainConfig)
    data = load_runs(args.data)
    check_compatible(model_cfg, data, args.data)
    val_data = None
    if args.val is not None:
        val_data = load_runs(args.val)
        check_compatible(model_cfg, val_data, args.val)

    weights, history = train([r for r, _ in data], model_cfg, train_cfg,
                             val_runs=[r for r, _ in val_data] if val_data else None)
    save_weights(args.out, weights, model_cfg, train_cfg.label_shift, history)
    history_path = args.out.with_name(args.out.stem + "_history.csv")
    write_history_csv(history_path, history)

    last = history.epochs[-1]
    print(f"train: {len(history)} epochs, final loss {last.loss:.4f}, "
          f"val accuracy {last.val_accuracy:.4f}, weights {args.out}")
    return 0
