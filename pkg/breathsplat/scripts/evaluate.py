import argparse
import sys

from breathsplat.errors import BreathSplatError
from breathsplat.metrics.evaluate import evaluate_run, format_report
from breathsplat.scripts.utils.cli_utils import setup_parser
from breathsplat.sim.dataset import load_dataset
from breathsplat.utils.logger import logger, set_verbose


def cmd_evaluate(args: argparse.Namespace) -> int:
    set_verbose(args.verbose)
    try:
        dataset = load_dataset(args.dataset)
        report, _ = evaluate_run(dataset, args.run, args.out, slice_offset=args.slice_offset)
    except (BreathSplatError, OSError) as e:
        logger.error(f"❌ evaluate failed: {e}")
        return 1
    print(format_report(report))
    return 0


if __name__ == "__main__":
    sys.exit(cmd_evaluate(setup_parser().parse_args(["evaluate", *sys.argv[1:]])))
