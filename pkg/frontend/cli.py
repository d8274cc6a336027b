"""
VolDecode 命令列入口

子命令：generate | train | predict | eval | saliency | report
結束碼：0 成功，1 用法錯誤，2 資料錯誤
"""
import logging
import sys
from pathlib import Path
from typing import List, Optional

from backend.exceptions import VolDecodeError
from backend.utils import load_app_config, setup_logging
from frontend.commands import evaluate, generate, predict, report, saliency, train
from frontend.utils import CliArgumentParser

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

COMMANDS = [generate, train, predict, evaluate, saliency, report]


def build_parser() -> CliArgumentParser:
    parser = CliArgumentParser(prog="vwdecode", description="逐幀 fMRI 任務狀態解碼")
    parser.add_argument("--config", type=Path, default=None, help="設定檔（預設為專案根目錄的 config.yaml）")
    parser.add_argument("--verbose", action="store_true", help="輸出 DEBUG 日誌")
    subparsers = parser.add_subparsers(dest="command", parser_class=CliArgumentParser)
    for command in COMMANDS:
        command.add_parser(subparsers)
    return parser


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split())


def main(argv: Optional[List[str]] = None) -> int:
    """
    執行一個子命令

    Args:
        argv: 參數列表（不含程式名稱）；None 時取 sys.argv

    Returns:
        結束碼
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("vwdecode: error: 需要指定子命令", file=sys.stderr)
        return EXIT_USAGE

    try:
        config = load_app_config(args.config)
        setup_logging(config, args.verbose)
        return args.handler(args, config)
    except (VolDecodeError, FileNotFoundError) as exc:
        print(f"vwdecode {args.command}: {_one_line(exc)}", file=sys.stderr)
        return EXIT_DATA
