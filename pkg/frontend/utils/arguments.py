"""
命令列參數解析輔助
"""
import argparse
import sys
from typing import Optional, Tuple

from backend.exceptions import ConfigError


class CliArgumentParser(argparse.ArgumentParser):
    """用法錯誤以結束碼 1 離開（argparse 預設為 2）"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> Tuple[int, int, int]:
    """'20x24x20' -> (20, 24, 20)"""
    parts = text.lower().split("x")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"網格格式應為 DxHxW，收到 {text!r}")
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"網格格式應為三個正整數 DxHxW，收到 {text!r}")
    return dims


def parse_frame_range(text: Optional[str]) -> Optional[Tuple[int, int]]:
    """'0:120' -> (0, 120)；None 表示整個 run"""
    if text is None:
        return None
    try:
        start, stop = (int(p) for p in text.split(":"))
    except ValueError:
        raise ConfigError(f"視窗起點範圍格式應為 START:STOP，收到 {text!r}")
    return start, stop


def parse_contrast(text: str) -> Tuple[str, str]:
    """'win:loss' -> ('win', 'loss')"""
    parts = text.split(":")
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"對比格式應為 A:B，收到 {text!r}")
    return parts[0], parts[1]
