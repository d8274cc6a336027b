from .classification_metrics import confusion, class_scores, roc_auc
from .sequence_metrics import pcc, hrf_similarity, segment_accuracy, transition_lag
from .metrics_report import RunEvaluator, evaluate_run, aggregate_runs
from .guided_saliency import harvest_frame, guided_window, saliency_run, group_average
from .glm_mapper import design_matrix, glm_map, glm_contrast, bh_cutoff, fdr_threshold, peak_series

__all__ = [
    'confusion',
    'class_scores',
    'roc_auc',
    'pcc',
    'hrf_similarity',
    'segment_accuracy',
    'transition_lag',
    'RunEvaluator',
    'evaluate_run',
    'aggregate_runs',
    'harvest_frame',
    'guided_window',
    'saliency_run',
    'group_average',
    'design_matrix',
    'glm_map',
    'glm_contrast',
    'bh_cutoff',
    'fdr_threshold',
    'peak_series'
]
