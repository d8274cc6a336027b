from .validation import validate_design, validate_phantom, validate_train_config, validate_run_manifest
from .volume_io import encode_volume, decode_volume, write_volume, read_volume
from .manifest_io import (
    MANIFEST_SUFFIX,
    save_json,
    load_json,
    save_run,
    list_run_manifests,
    resolve_manifest,
    load_run,
    load_runs,
    save_weights,
    load_weights
)
from .config_loader import load_app_config, setup_logging
from .csv_exporter import (
    predictions_frame,
    write_predictions_csv,
    read_predictions_csv,
    write_series_csv,
    read_series_csv,
    write_history_csv
)
from .report_renderer import ReportRenderer, load_metrics, render_report

__all__ = [
    'validate_design',
    'validate_phantom',
    'validate_train_config',
    'validate_run_manifest',
    'encode_volume',
    'decode_volume',
    'write_volume',
    'read_volume',
    'MANIFEST_SUFFIX',
    'save_json',
    'load_json',
    'save_run',
    'list_run_manifests',
    'resolve_manifest',
    'load_run',
    'load_runs',
    'save_weights',
    'load_weights',
    'load_app_config',
    'setup_logging',
    'predictions_frame',
    'write_predictions_csv',
    'read_predictions_csv',
    'write_series_csv',
    'read_series_csv',
    'write_history_csv',
    'ReportRenderer',
    'load_metrics',
    'render_report'
]
