import argparse
import sys
from pathlib import Path

from breathsplat.errors import BreathSplatError, DatasetError
from breathsplat.globals import CLOUD_FILE, CONFIG_FILE, MESH_INSP_FILE
from breathsplat.optim.fitting import SequenceFit, fit_sequence, render_phase
from breathsplat.optim.run_io import save_phases, save_render, save_timing
from breathsplat.scripts.utils.cli_utils import setup_parser
from breathsplat.sim.dataset import Dataset, load_dataset
from breathsplat.splat.cloud_io import save_cloud
from breathsplat.types.config_types import ReconstructConfig, load_config, save_config
from breathsplat.utils.logger import logger, set_verbose


def reconstruct_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.frozen_phase is not None:
        overrides["frozen_phase"] = True
        overrides["phase_value"] = args.frozen_phase
    return overrides


def run_reconstruction(dataset: Dataset, config: ReconstructConfig, run_dir: Path) -> SequenceFit:
    """Fit the dataset and write phases.json, cloud.json, timing.json, config.json and renders/."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    save_config(run_dir / CONFIG_FILE, config)

    def write_render(index, phase, cloud):
        output = render_phase(cloud, dataset.mesh, dataset.camera(index), phase, config.raster)
        save_render(run_dir, index, output)

    fit = fit_sequence(dataset, config, on_frame=write_render if config.save_renders else None)
    save_phases(run_dir, fit.track)
    save_cloud(run_dir / CLOUD_FILE, fit.cloud, mesh_file=str(dataset.root / MESH_INSP_FILE))
    save_timing(run_dir, fit.timing)
    return fit


def cmd_reconstruct(args: argparse.Namespace) -> int:
    set_verbose(args.verbose)
    try:
        config = load_config(ReconstructConfig, args.config, **reconstruct_overrides(args))
        dataset = load_dataset(args.dataset)
        if args.resolution is not None and args.resolution != (dataset.meta.width, dataset.meta.height):
            raise DatasetError(
                f"--resolution {args.resolution[0]}x{args.resolution[1]} does not match the "
                f"{dataset.meta.width}x{dataset.meta.height} dataset"
            )
        logger.info(f"🚀 Reconstructing {len(dataset)} frames from {args.dataset}")
        fit = run_reconstruction(dataset, config, args.out)
    except (BreathSplatError, OSError) as e:
        logger.error(f"❌ reconstruct failed: {e}")
        return 1
    print(
        f"{len(fit.track)} phases written to {args.out} "
        f"({fit.timing.seconds_per_frame:.2f} s/frame)"
    )
    return 0


if __name__ == "__main__":
    sys.exit(cmd_reconstruct(setup_parser().parse_args(["reconstruct", *sys.argv[1:]])))
