"""
report：由 metrics JSON（與可選的峰值序列 CSV）產生 SVG
"""
from pathlib import Path

from backend.utils import ReportRenderer, load_metrics, read_series_csv


def add_parser(subparsers):
    parser = subparsers.add_parser("report", help="產生 SVG 報告")
    parser.add_argument("--metrics", type=Path, required=True)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--series", type=Path, nargs="*", default=[], help="saliency 輸出的峰值序列 CSV")
    parser.set_defaults(handler=run)
    return parser


def run(args, config) -> int:
    report = load_metrics(args.metrics)
    series = sorted(((path.stem, read_series_csv(path)) for path in args.series), key=lambda item: item[0])
    options = config["report"]
    renderer = ReportRenderer(report, series, title=config["app"]["title"],
                              width_in=options["width_in"], dpi=options["dpi"],
                              hash_salt=options["hash_salt"])
    renderer.save(args.out)
    print(f"report: {len(report.runs)} runs, {len(series)} series -> {args.out}")
    return 0
