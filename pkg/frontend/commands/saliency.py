"""
saliency：guided backprop 組平均圖、逐體素 GLM、FDR 門檻與峰值體素序列
"""
import logging
from pathlib import Path

from backend.algorithms import predict_run, shift_labels, standardize_run
from backend.analyzers import (
    bh_cutoff,
    fdr_threshold,
    glm_contrast,
    glm_map,
    group_average,
    peak_series,
    saliency_run,
)
from backend.analyzers.guided_saliency import SEED_POLICIES
from backend.exceptions import ConfigError, DataFormatError, DegenerateInputError
from backend.models import MapSidecar
from backend.simulation import canonical_hrf
from backend.utils import load_runs, load_weights, save_json, write_series_csv, write_volume
from frontend.commands.train import check_compatible
from frontend.utils import parse_contrast, parse_frame_range

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("saliency", help="guided backprop 活化圖與 GLM")
    parser.add_argument("--weights", type=Path, required=True)
    parser.add_argument("--runs", type=Path, required=True)
    parser.add_argument("--fdr-q", type=float, default=None)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--seed-policy", choices=list(SEED_POLICIES), default=None)
    parser.add_argument("--frame-range", default=None, help="視窗起點範圍 START:STOP")
    parser.add_argument("--regressor-shift", type=int, default=None, help="GLM 迴歸量額外延後的幀數")
    parser.add_argument("--contrast", type=parse_contrast, action="append", default=[],
                        help="狀態對比 A:B，可重複")
    parser.set_defaults(handler=run)
    return parser


def _write_maps(out: Path, stem: str, effect, t_stat, p_value, q: float, sidecar: MapSidecar) -> MapSidecar:
    mask = fdr_threshold(p_value, q)
    write_volume(out / f"{stem}_beta.vwt", effect)
    write_volume(out / f"{stem}_t.vwt", t_stat)
    write_volume(out / f"{stem}_p.vwt", p_value)
    write_volume(out / f"{stem}_mask.vwt", mask.astype(float))
    sidecar.cutoff_p = bh_cutoff(p_value, q)
    sidecar.n_significant = int(mask.sum())
    save_json(out / f"{stem}.json", sidecar)
    return sidecar


def run(args, config) -> int:
    settings = config["saliency"]
    q = settings["fdr_q"] if args.fdr_q is None else args.fdr_q
    seed_policy = args.seed_policy or settings["seed_policy"]
    frame_range = parse_frame_range(args.frame_range or settings.get("frame_range"))
    regressor_shift = settings.get("regressor_shift", 0) if args.regressor_shift is None else args.regressor_shift
    if regressor_shift < 0:
        raise ConfigError(f"--regressor-shift 不可為負，收到 {regressor_shift}")

    weights, weights_manifest = load_weights(args.weights)
    model_cfg = weights_manifest.model_config
    shift = weights_manifest.label_shift
    data = load_runs(args.runs)
    check_compatible(model_cfg, data, args.runs)
    design = data[0][0].design
    for run_data, _ in data[1:]:
        if run_data.design != design:
            raise DataFormatError(f"{args.runs}: run {run_data.run_id} 的刺激時序與 {data[0][0].run_id} 不同，無法組平均")

    maps = []
    for run_data, _ in data:
        prepared = standardize_run(run_data)
        truth = shift_labels(run_data.labels, shift)
        prediction = predict_run(weights, prepared, model_cfg, 1)
        maps.append(saliency_run(weights, prepared, prediction, model_cfg, seed_policy=seed_policy,
                                 truth=truth, frame_range=frame_range))
    group = group_average(maps)

    out = Path(args.out)
    write_volume(out / "saliency_group.vwt", group.frames)
    hrf = canonical_hrf(design.tr_s)
    glm = glm_map(group, design, hrf, shift=regressor_shift)
    run_ids = [r.run_id for r, _ in data]

    significant = {}
    for index, condition in enumerate(glm.conditions):
        sidecar = MapSidecar(condition=condition, kind="glm", fdr_q=q, df=glm.df, n_runs=len(data),
                             frame_offset=group.frame_offset, run_ids=run_ids)
        sidecar = _write_maps(out, condition, glm.beta[index], glm.t_stat[index],
                              glm.p_value[index], q, sidecar)
        significant[condition] = sidecar.n_significant
        for polarity in ("positive", "negative"):
            try:
                peak = peak_series(group, glm, condition, design, hrf, polarity=polarity,
                                   shift=regressor_shift)
            except DegenerateInputError as exc:
                logger.warning("%s（%s）：%s", condition, polarity, exc)
                continue
            write_series_csv(out / f"{condition}_peak_{polarity}.csv", peak)
            logger.info("%s %s 峰值體素 %s，PCC %s", condition, polarity, peak.coords, peak.pcc)

    for cond_a, cond_b in args.contrast:
        contrast = glm_contrast(glm, cond_a, cond_b)
        sidecar = MapSidecar(condition=contrast.name, kind="contrast", fdr_q=q, df=contrast.df,
                             n_runs=len(data), frame_offset=group.frame_offset, run_ids=run_ids)
        _write_maps(out, contrast.name, contrast.effect, contrast.t_stat, contrast.p_value, q, sidecar)

    summary = ", ".join(f"{name}={count}" for name, count in significant.items())
    print(f"saliency: {len(data)} runs, {group.n_frames} frames, FDR q={q} significant voxels: {summary} -> {out}")
    return 0
