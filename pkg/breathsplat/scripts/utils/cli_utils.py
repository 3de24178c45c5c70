import argparse
from pathlib import Path

from breathsplat.globals import DEFAULT_DATASET_DIR, DEFAULT_RUN_DIR


def parse_resolution(text: str) -> tuple[int, int]:
    """'128x96' -> (128, 96)."""
    try:
        width, height = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"resolution must look like WxH, got {text!r}")
    if width < 8 or height < 8:
        raise argparse.ArgumentTypeError(f"resolution must be at least 8x8, got {text!r}")
    return width, height


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON configuration file")
    parser.add_argument("--seed", type=int, help="Override every seed of the configuration")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")


def setup_parser() -> argparse.ArgumentParser:
    """Setup parser for the breathsplat subcommands."""
    parser = argparse.ArgumentParser(
        prog="breathsplat",
        description="Simulate breathing airway bronchoscopy and recover the breathing phase from RGB",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Generate a synthetic dataset")
    _add_common(simulate)
    simulate.add_argument("--out", type=Path, default=DEFAULT_DATASET_DIR, help="Dataset directory")
    simulate.add_argument("--frames", type=int, help="Number of frames")
    simulate.add_argument("--resolution", type=parse_resolution, help="Image size WxH")

    reconstruct = commands.add_parser("reconstruct", help="Fit phases and Gaussians to a dataset")
    _add_common(reconstruct)
    reconstruct.add_argument("--dataset", type=Path, default=DEFAULT_DATASET_DIR)
    reconstruct.add_argument("--out", type=Path, default=DEFAULT_RUN_DIR, help="Run directory")
    reconstruct.add_argument(
        "--frozen-phase", type=float, metavar="A", help="Ablation: hold the phase at A in [0, 1]"
    )
    reconstruct.add_argument(
        "--resolution", type=parse_resolution, help="Expected dataset image size WxH"
    )

    evaluate = commands.add_parser("evaluate", help="Score a run against its dataset")
    evaluate.add_argument("--dataset", type=Path, default=DEFAULT_DATASET_DIR)
    evaluate.add_argument("--run", type=Path, default=DEFAULT_RUN_DIR, help="Run directory")
    evaluate.add_argument("--out", type=Path, help="Report directory (defaults to the run directory)")
    evaluate.add_argument("--slice-offset", type=float, default=0.0, help="Slice plane offset in mm")
    evaluate.add_argument("-v", "--verbose", action="store_true")

    preview = commands.add_parser("preview", help="Write one frame and its depth as PPM images")
    preview.add_argument("--dataset", type=Path, default=DEFAULT_DATASET_DIR)
    preview.add_argument("--frame", type=int, default=0)
    preview.add_argument("--out", type=Path, required=True, help="Output prefix")
    preview.add_argument("-v", "--verbose", action="store_true")

    return parser
