"""Stereo-consistency evaluation and two-model comparison.

The consistency error of a translated pair is the mean absolute difference
between its left image and its right image warped along the *input* pair's
disparity (ground truth when present, block matching otherwise).
"""
import csv
import logging
import statistics
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
from torchvision.utils import make_grid, save_image

from stereogan.exceptions import DatasetError
from stereogan.models.cyclegan import CycleGANModels, translate
from stereogan.schemas.config import EvalConfig, TrainingMode
from stereogan.schemas.data import DatasetMode, DisparityMap, Domain, DomainDataset, StereoPair
from stereogan.schemas.records import (
    ComparisonRow,
    ComparisonSummary,
    ComparisonTable,
    ConsistencyReport,
    FrameConsistency,
)
from stereogan.utils.disparity import block_match_disparity, warp_by_disparity
from stereogan.utils.validators import ensure_same_size

logger = logging.getLogger(__name__)


def input_disparity(pair: StereoPair, cfg: EvalConfig) -> Tuple[DisparityMap, str]:
    """Ground-truth disparity if the pair carries it, else block matching."""
    if pair.disparity_gt is not None:
        return DisparityMap.from_ground_truth(pair), "ground_truth"
    disparity = block_match_disparity(
        pair,
        block=cfg.block,
        max_disparity=cfg.max_disparity,
        min_variance=cfg.min_variance,
        max_sad=cfg.max_sad,
    )
    return disparity, "block_matching"


def frame_consistency(
    input_pair: StereoPair, output_pair: StereoPair, cfg: EvalConfig, frame: str = ""
) -> FrameConsistency:
    """Warp error of one frame; frames with too few valid pixels are flagged unreliable."""
    ensure_same_size(input_pair.left, input_pair.right, output_pair.left, output_pair.right)
    disparity, source = input_disparity(input_pair, cfg)
    warped, mask = warp_by_disparity(output_pair.right, disparity)
    valid_fraction = float(mask.float().mean())
    reliable = valid_fraction >= cfg.min_valid_fraction and bool(mask.any())
    error = None
    if mask.any():
        diff = (warped - output_pair.left.float()).abs().mean(dim=0)
        error = float(diff[mask].mean())
    if not reliable:
        logger.warning(
            f"Frame '{frame}' has only {valid_fraction:.1%} valid pixels; flagged unreliable"
        )
    return FrameConsistency(
        frame=frame or input_pair.stem,
        error=error,
        valid_fraction=valid_fraction,
        reliable=reliable,
        source=source,
    )


def stereo_consistency_error(
    input_pair: StereoPair, output_pair: StereoPair, cfg: EvalConfig, frame: str = ""
) -> ConsistencyReport:
    return ConsistencyReport.from_frames([frame_consistency(input_pair, output_pair, cfg, frame)])


def consistency_report(
    inputs: Sequence[StereoPair], outputs: Sequence[StereoPair], cfg: EvalConfig
) -> ConsistencyReport:
    """Per-frame errors and their aggregate over a whole test set."""
    if len(inputs) != len(outputs):
        raise DatasetError(f"{len(inputs)} input pairs but {len(outputs)} outputs")
    frames = [
        frame_consistency(i, o, cfg, frame=i.stem or str(n))
        for n, (i, o) in enumerate(zip(inputs, outputs))
    ]
    return ConsistencyReport.from_frames(frames)


def translate_pair(
    models: CycleGANModels, pair: StereoPair, condition: Optional[torch.Tensor]
) -> StereoPair:
    """Translate both eyes of a pair the way the model's mode prescribes.

    A mono model translates each eye independently under the same condition.
    """
    device = next(models.parameters()).device
    x_l, x_r = pair.left.to(device), pair.right.to(device)
    y_w = None if condition is None else condition.to(device)
    if models.mode == TrainingMode.MONO:
        left = translate(models, x_l, y_w=y_w)
        right = translate(models, x_r, y_w=y_w)
    else:
        left, right = translate(models, x_l, x_r, y_w=y_w)
    return StereoPair(left=left.cpu(), right=right.cpu(), stem=pair.stem, scene_id=pair.scene_id)


def translate_dataset(
    models: CycleGANModels,
    test_set: DomainDataset,
    conditions: Optional[DomainDataset],
    seed: int,
) -> List[StereoPair]:
    """Translate every pair; condition ``n`` is drawn from ``default_rng(seed)``."""
    rng = np.random.default_rng(seed)
    outputs = []
    for pair in test_set.samples:
        condition = None
        if conditions is not None:
            sample = conditions[int(rng.integers(len(conditions)))]
            condition = sample.left if isinstance(sample, StereoPair) else sample.image
        outputs.append(translate_pair(models, pair, condition))
    return outputs


def _outcome(error_a: float, error_b: float, tolerance: float) -> str:
    if abs(error_a - error_b) <= tolerance * max(error_a, error_b):
        return "tie"
    return "win" if error_a < error_b else "loss"


def _check_compatible(test_set: DomainDataset) -> None:
    if test_set.mode != DatasetMode.STEREO:
        raise DatasetError("comparison needs a stereo test set")
    if test_set.domain != Domain.X:
        raise DatasetError(f"test set is domain {test_set.domain.value}, models translate X -> Y")


def compare_models(
    test_set: DomainDataset,
    model_a: CycleGANModels,
    model_b: CycleGANModels,
    seeds: Sequence[int],
    conditions: Optional[DomainDataset],
    cfg: EvalConfig,
    names: Tuple[str, str] = ("A", "B"),
) -> ComparisonTable:
    """Per-frame errors of two models under matched conditions for each seed.

    For each seed both models see the same condition sample for each frame.
    Outcomes are from model A's side: a win means a lower error. Errors
    within ``tie_tolerance`` relative are ties; frames unreliable for either
    model are counted separately.
    """
    _check_compatible(test_set)
    needs_conditions = model_a.conditional or model_b.conditional
    if needs_conditions and conditions is None:
        raise DatasetError("conditional models need a target-domain condition set")

    rows: List[ComparisonRow] = []
    per_seed_a: Dict[int, Optional[float]] = {}
    per_seed_b: Dict[int, Optional[float]] = {}
    for seed in seeds:
        outputs_a = translate_dataset(model_a, test_set, conditions, seed)
        outputs_b = translate_dataset(model_b, test_set, conditions, seed)
        errors_a, errors_b = [], []
        for pair, out_a, out_b in zip(test_set.samples, outputs_a, outputs_b):
            fa = frame_consistency(pair, out_a, cfg, pair.stem)
            fb = frame_consistency(pair, out_b, cfg, pair.stem)
            reliable = fa.reliable and fb.reliable
            if reliable:
                outcome = _outcome(fa.error, fb.error, cfg.tie_tolerance)
                errors_a.append(fa.error)
                errors_b.append(fb.error)
            else:
                outcome = "unreliable"
            rows.append(
                ComparisonRow(
                    seed=seed,
                    frame=pair.stem,
                    error_a=fa.error,
                    error_b=fb.error,
                    outcome=outcome,
                    reliable=reliable,
                )
            )
        per_seed_a[seed] = statistics.fmean(errors_a) if errors_a else None
        per_seed_b[seed] = statistics.fmean(errors_b) if errors_b else None
        logger.info(
            f"seed {seed}: mean error {names[0]}={per_seed_a[seed]} "
            f"{names[1]}={per_seed_b[seed]}"
        )

    def _median(values: Dict[int, Optional[float]]) -> Optional[float]:
        present = [v for v in values.values() if v is not None]
        return statistics.median(present) if present else None

    summary = ComparisonSummary(
        model_a=names[0],
        model_b=names[1],
        seeds=list(seeds),
        frames=len(test_set),
        rows=len(rows),
        per_seed_mean_a=per_seed_a,
        per_seed_mean_b=per_seed_b,
        median_a=_median(per_seed_a),
        median_b=_median(per_seed_b),
        wins=sum(r.outcome == "win" for r in rows),
        ties=sum(r.outcome == "tie" for r in rows),
        losses=sum(r.outcome == "loss" for r in rows),
        unreliable=sum(r.outcome == "unreliable" for r in rows),
        tie_tolerance=cfg.tie_tolerance,
    )
    return ComparisonTable(rows=rows, summary=summary)


# ---------------------------------------------------------------- writers

COMPARISON_COLUMNS = ["seed", "frame", "error_a", "error_b", "outcome", "reliable"]
REPORT_COLUMNS = ["frame", "error", "valid_fraction", "reliable", "source"]


def _write_tsv(rows: Sequence[dict], columns: List[str], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, delimiter="\t")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if row[k] is None else row[k] for k in columns})
    return path


def write_comparison(table: ComparisonTable, directory: Union[str, Path]) -> Tuple[Path, Path]:
    """Write ``comparison.tsv`` and ``summary.json``."""
    directory = Path(directory)
    tsv = _write_tsv(
        [r.model_dump() for r in table.rows], COMPARISON_COLUMNS, directory / "comparison.tsv"
    )
    summary = directory / "summary.json"
    summary.write_text(table.summary.model_dump_json(indent=2), encoding="utf-8")
    return tsv, summary


def write_report(report: ConsistencyReport, directory: Union[str, Path]) -> Tuple[Path, Path]:
    """Write ``consistency.tsv`` (per frame) and ``consistency.json`` (aggregate)."""
    directory = Path(directory)
    tsv = _write_tsv(
        [f.model_dump() for f in report.frames], REPORT_COLUMNS, directory / "consistency.tsv"
    )
    summary = directory / "consistency.json"
    summary.write_text(report.model_dump_json(indent=2, exclude={"frames"}), encoding="utf-8")
    return tsv, summary


def write_grid(columns: Sequence[StereoPair], path: Union[str, Path]) -> Path:
    """Raster with one column per pair (e.g. input | baseline | proposed) and rows left, right."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    images = [p.left for p in columns] + [p.right for p in columns]
    grid = make_grid(
        torch.stack([img.detach().cpu().float() for img in images]),
        nrow=len(columns),
        padding=2,
        normalize=True,
        value_range=(-1, 1),
    )
    save_image(grid, path)
    return path
