"""
eval：由預測 CSV 與對應 run 計算完整指標並寫成 JSON
"""
from pathlib import Path

from backend.analyzers import RunEvaluator
from backend.exceptions import ConfigError, DataFormatError
from backend.simulation import canonical_hrf
from backend.utils import load_run, read_predictions_csv, save_json


def add_parser(subparsers):
    parser = subparsers.add_parser("eval", help="計算評估指標")
    parser.add_argument("--preds", type=Path, nargs="+", required=True)
    parser.add_argument("--run", type=Path, nargs="+", required=True,
                        help="與 --preds 依序配對的 run")
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--segments", type=int, default=4)
    parser.set_defaults(handler=run)
    return parser


def run(args, config) -> int:
    if len(args.preds) != len(args.run):
        raise ConfigError(f"--preds 有 {len(args.preds)} 個檔案，--run 有 {len(args.run)} 個，必須一一對應")

    items = []
    hrf = None
    for preds_path, run_path in zip(args.preds, args.run):
        prediction, truth, names = read_predictions_csv(preds_path)
        data, _ = load_run(run_path)
        if prediction.n_frames != data.n_frames:
            raise DataFormatError(f"{preds_path}: {prediction.n_frames} 列，但 run {data.run_id} 有 {data.n_frames} 幀")
        if list(names) != list(data.design.conditions):
            raise DataFormatError(f"{preds_path}: 機率欄 {names} 與 run 的狀態 {data.design.conditions} 不符")
        hrf = canonical_hrf(data.design.tr_s) if hrf is None else hrf
        items.append((prediction, truth, data.design, data.run_id))

    report = RunEvaluator(hrf, n_segments=args.segments).report(items)
    save_json(args.out, report)
    accuracy = report.aggregate["accuracy"]["mean"][0]
    print(f"eval: {len(report.runs)} runs, mean accuracy {accuracy:.4f} -> {args.out}")
    return 0
