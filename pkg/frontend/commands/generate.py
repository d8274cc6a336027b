"""
generate：產生合成受試者（每位一個 VWT 體積與一個清單）
"""
import logging
from pathlib import Path

import numpy as np

from backend.exceptions import ConfigError
from backend.simulation import build_design, default_phantom, render_run
from backend.utils import save_run, validate_design
from frontend.utils import parse_grid

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("generate", help="產生合成 BOLD run")
    parser.add_argument("--design", choices=["block", "event"], required=True)
    parser.add_argument("--subjects", type=int, required=True)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--grid", type=parse_grid, default=None, help="DxHxW，預設取自 config.yaml")
    parser.add_argument("--noise-sd", type=float, default=None)
    parser.set_defaults(handler=run)
    return parser


def run(args, config) -> int:
    """
    所有受試者共用同一個 --seed 決定的設計（組平均需要對齊的時序），
    各受試者的雜訊種子由 SeedSequence 分支取得。
    """
    if args.subjects < 1:
        raise ConfigError(f"--subjects 必須 ≥ 1，收到 {args.subjects}")
    synthesis = config["synthesis"]
    grid = tuple(args.grid or synthesis["grid"])
    noise_sd = synthesis["noise_sd"] if args.noise_sd is None else args.noise_sd

    design = build_design(args.design, args.seed, tr_s=synthesis["tr_s"])
    ok, errors = validate_design(design)
    if not ok:
        raise ConfigError("; ".join(errors))
    phantom = default_phantom(grid, design.n_conditions, baseline=synthesis["baseline"],
                              amplitude=synthesis["amplitude"], noise_sd=noise_sd,
                              radius=synthesis.get("roi_radius"))

    children = np.random.SeedSequence(args.seed).spawn(args.subjects)
    for index, child in enumerate(children):
        subject_seed = int(child.generate_state(1)[0])
        run_id = f"sub{index + 1:02d}"
        data = render_run(design, phantom, subject_seed, run_id=run_id)
        save_run(data, phantom, subject_seed, args.out)
        logger.info("%s：%d 幀，網格 %s，種子 %d", run_id, data.n_frames, grid, subject_seed)

    print(f"generate: wrote {args.subjects} {args.design} runs to {args.out}")
    return 0
