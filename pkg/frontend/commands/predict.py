"""
predict：對單一 run 做滑動視窗投票推論，輸出逐幀 CSV
"""
from pathlib import Path

from backend.algorithms import predict_run, shift_labels, standardize_run
from backend.utils import load_run, load_weights, write_predictions_csv
from frontend.commands.train import check_compatible


def add_parser(subparsers):
    parser = subparsers.add_parser("predict", help="逐幀投票推論")
    parser.add_argument("--weights", type=Path, required=True)
    parser.add_argument("--run", type=Path, required=True, help="清單、VWT 或只含一個 run 的目錄")
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--stride", type=int, default=1)
    parser.set_defaults(handler=run)
    return parser


def run(args, config) -> int:
    weights, weights_manifest = load_weights(args.weights)
    model_cfg = weights_manifest.model_config
    data, manifest = load_run(args.run)
    check_compatible(model_cfg, [(data, manifest)], args.run)

    prepared = standardize_run(data)
    truth = shift_labels(data.labels, weights_manifest.label_shift)
    prediction = predict_run(weights, prepared, model_cfg, args.stride)
    write_predictions_csv(args.out, prediction, truth, data.design.conditions)

    accuracy = float((prediction.labels == truth).mean())
    print(f"predict: {data.run_id} {prediction.n_frames} frames, "
          f"{prediction.n_windows} windows, accuracy {accuracy:.4f} -> {args.out}")
    return 0
