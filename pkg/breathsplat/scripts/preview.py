import argparse
import sys
from pathlib import Path

from breathsplat.errors import BreathSplatError
from breathsplat.raster.image_io import depth_to_image, write_ppm
from breathsplat.scripts.utils.cli_utils import setup_parser
from breathsplat.sim.dataset import Dataset, load_dataset
from breathsplat.utils.logger import logger, set_verbose


def write_preview(dataset: Dataset, index: int, prefix: Path) -> tuple[Path, Path]:
    """Write `<prefix>_rgb.ppm` and `<prefix>_depth.ppm` for one frame."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    rgb_path = prefix.with_name(f"{prefix.name}_rgb.ppm")
    depth_path = prefix.with_name(f"{prefix.name}_depth.ppm")
    write_ppm(rgb_path, dataset.frame_rgb(index))
    write_ppm(depth_path, depth_to_image(dataset.frame_depth(index)))
    return rgb_path, depth_path


def cmd_preview(args: argparse.Namespace) -> int:
    set_verbose(args.verbose)
    try:
        dataset = load_dataset(args.dataset)
        rgb_path, depth_path = write_preview(dataset, args.frame, args.out)
    except (BreathSplatError, OSError) as e:
        logger.error(f"❌ preview failed: {e}")
        return 1
    print(f"Wrote {rgb_path} and {depth_path}")
    return 0


if __name__ == "__main__":
    sys.exit(cmd_preview(setup_parser().parse_args(["preview", *sys.argv[1:]])))
