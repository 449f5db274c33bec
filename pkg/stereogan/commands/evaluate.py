"""``eval``: stereo-consistency reports and two-model comparison."""
import argparse
import logging
from pathlib import Path

from stereogan.commands import add_common_arguments, resolve_config
from stereogan.config import dump_run_config, settings
from stereogan.schemas.data import DatasetMode, Domain
from stereogan.utils.checkpoint import load_models
from stereogan.utils.datasets import load_dataset
from stereogan.utils.evaluation import (
    compare_models,
    consistency_report,
    translate_dataset,
    write_comparison,
    write_grid,
    write_report,
)

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate stereo consistency")
    add_common_arguments(parser)
    parser.add_argument("--checkpoint", type=Path, required=True, help="Model A")
    parser.add_argument("--checkpoint-b", type=Path, default=None, help="Model B to compare")
    parser.add_argument("--data", type=Path, default=None, help="Dataset root (testX, testY)")
    parser.add_argument("--seeds", type=int, nargs="+", default=None)
    parser.add_argument("--grids", action="store_true", default=None, help="Write image grids")
    parser.set_defaults(handler=cmd_eval)


def cmd_eval(args: argparse.Namespace) -> int:
    """One checkpoint: a consistency report per seed. Two: the comparison table."""
    config = resolve_config(
        args,
        {
            "eval.seeds": args.seeds,
            "eval.write_grids": args.grids,
            "data.root": str(args.data) if args.data else None,
            "output_dir": str(args.out) if args.out else None,
        },
    )
    out = Path(args.out or config.output_dir / "eval")
    dump_run_config(config, out / "config.yaml")
    root = Path(config.data.root)
    test_set = load_dataset(root / "testX", DatasetMode.STEREO, Domain.X)
    conditions = load_dataset(root / "testY", DatasetMode.STEREO, Domain.Y)
    model_a, _ = load_models(args.checkpoint, device=settings.DEVICE)

    if args.checkpoint_b is None:
        for seed in config.eval.seeds:
            outputs = translate_dataset(model_a, test_set, conditions, seed)
            report = consistency_report(test_set.samples, outputs, config.eval)
            write_report(report, out / f"seed_{seed}")
            logger.info(
                f"seed {seed}: mean error {report.mean}, {report.unreliable} unreliable frames"
            )
            if config.eval.write_grids:
                for pair, output in zip(test_set.samples, outputs):
                    write_grid([pair, output], out / f"seed_{seed}" / "grids" / f"{pair.stem}.png")
        return 0

    model_b, _ = load_models(args.checkpoint_b, device=settings.DEVICE)
    names = (args.checkpoint.stem, args.checkpoint_b.stem)
    if names[0] == names[1]:
        names = (str(args.checkpoint), str(args.checkpoint_b))
    table = compare_models(
        test_set, model_a, model_b, config.eval.seeds, conditions, config.eval, names=names
    )
    write_comparison(table, out)
    summary = table.summary
    logger.info(
        f"{summary.model_a} vs {summary.model_b}: {summary.wins} wins, {summary.ties} ties, "
        f"{summary.losses} losses, {summary.unreliable} unreliable; "
        f"median per-seed error {summary.median_a} vs {summary.median_b}"
    )
    if config.eval.write_grids:
        seed = config.eval.seeds[0]
        outputs_a = translate_dataset(model_a, test_set, conditions, seed)
        outputs_b = translate_dataset(model_b, test_set, conditions, seed)
        for pair, out_a, out_b in zip(test_set.samples, outputs_a, outputs_b):
            write_grid([pair, out_a, out_b], out / "grids" / f"{pair.stem}.png")
    return 0
