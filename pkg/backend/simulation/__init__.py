from .hrf import canonical_hrf, double_gamma, ideal_response
from .design_builder import build_design, BLOCK_CONDITIONS, EVENT_CONDITIONS
from .phantom_renderer import default_phantom, render_run

__all__ = [
    'canonical_hrf',
    'double_gamma',
    'ideal_response',
    'build_design',
    'BLOCK_CONDITIONS',
    'EVENT_CONDITIONS',
    'default_phantom',
    'render_run'
]
