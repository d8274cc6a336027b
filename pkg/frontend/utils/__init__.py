from .arguments import CliArgumentParser, parse_grid, parse_frame_range, parse_contrast

__all__ = [
    'CliArgumentParser',
    'parse_grid',
    'parse_frame_range',
    'parse_contrast'
]
