"""``gen-data``: render the synthetic two-domain stereo benchmark."""
import argparse
import json
import logging
from pathlib import Path

from stereogan.commands import add_common_arguments, parse_size, resolve_config
from stereogan.config import dump_run_config
from stereogan.schemas.data import Domain
from stereogan.utils.datasets import save_dataset
from stereogan.utils.synthetic import synth_generate

logger = logging.getLogger(__name__)

SPLITS = ("train", "test")


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen-data", help="Generate the synthetic stereo dataset")
    add_common_arguments(parser)
    parser.add_argument("--n", type=int, default=None, help="Pairs per domain per split")
    parser.add_argument("--size", type=parse_size, default=None, help="Image size HxW")
    parser.add_argument("--max-disparity", type=int, default=None)
    parser.add_argument("--max-objects", type=int, default=None)
    parser.add_argument(
        "--mono-count", type=int, default=None, help="Extra mono images per domain"
    )
    parser.set_defaults(handler=cmd_gen_data)


def cmd_gen_data(args: argparse.Namespace) -> int:
    """Write trainX/trainY/testX/testY (and mono/) plus manifest.json.

    Splits use disjoint scene-id ranges, so no scene appears in two splits.
    """
    overrides = {
        "synth.count": args.n,
        "synth.max_disparity": args.max_disparity,
        "synth.max_objects": args.max_objects,
        "synth.mono_count": args.mono_count,
    }
    if args.size is not None:
        overrides["synth.height"], overrides["synth.width"] = args.size
    config = resolve_config(args, overrides)
    synth = config.synth
    seed = config.training.seed
    root = Path(args.out or config.data.root)
    size = (synth.height, synth.width)

    manifest = {
        "seed": seed,
        "count": synth.count,
        "height": synth.height,
        "width": synth.width,
        "max_disparity": synth.max_disparity,
        "max_objects": synth.max_objects,
        "mono_count": synth.mono_count,
        "splits": {},
    }
    for split_index, split in enumerate(SPLITS):
        for domain in Domain:
            dataset = synth_generate(
                synth.count,
                domain,
                size,
                synth.max_disparity,
                seed,
                max_objects=synth.max_objects,
                scene_offset=split_index * synth.count,
            )
            name = f"{split}{domain.value}"
            save_dataset(dataset, root / name)
            manifest["splits"][name] = dataset.stems
            logger.info(f"Wrote {len(dataset)} pairs to {root / name}")
    if synth.mono_count:
        for domain in Domain:
            dataset = synth_generate(
                synth.mono_count,
                domain,
                size,
                synth.max_disparity,
                seed,
                max_objects=synth.max_objects,
                scene_offset=len(SPLITS) * synth.count,
            ).left_view()
            name = f"train{domain.value}"
            save_dataset(dataset, root / "mono" / name)
            manifest["splits"][f"mono/{name}"] = dataset.stems
            logger.info(f"Wrote {len(dataset)} mono images to {root / 'mono' / name}")

    (root / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    dump_run_config(config, root / "config.yaml")
    return 0
