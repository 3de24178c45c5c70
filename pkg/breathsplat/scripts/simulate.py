import argparse
import sys

from breathsplat.errors import BreathSplatError
from breathsplat.scripts.utils.cli_utils import setup_parser
from breathsplat.sim.airway import max_displacement
from breathsplat.sim.dataset import generate_dataset
from breathsplat.types.config_types import SimulateConfig, load_config
from breathsplat.utils.logger import logger, set_verbose


def simulate_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    if args.seed is not None:
        for key in ("airway.rng_seed", "trajectory.rng_seed", "material.rng_seed"):
            overrides[key] = args.seed
    if args.frames is not None:
        overrides["trajectory.frame_count"] = args.frames
    if args.resolution is not None:
        overrides["width"], overrides["height"] = args.resolution
    return overrides


def cmd_simulate(args: argparse.Namespace) -> int:
    """Generate a dataset; returns the process exit code."""
    set_verbose(args.verbose)
    try:
        config = load_config(SimulateConfig, args.config, **simulate_overrides(args))
        logger.info(f"🚀 Simulating {config.trajectory.frame_count} frames into {args.out}")
        dataset = generate_dataset(config, args.out)
    except (BreathSplatError, OSError) as e:
        logger.error(f"❌ simulate failed: {e}")
        return 1
    print(f"{len(dataset)} frames written to {args.out}, max displacement {max_displacement(dataset.mesh):.2f} mm")
    return 0


if __name__ == "__main__":
    sys.exit(cmd_simulate(setup_parser().parse_args(["simulate", *sys.argv[1:]])))
