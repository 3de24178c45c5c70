import sys

from breathsplat.scripts.evaluate import cmd_evaluate
from breathsplat.scripts.preview import cmd_preview
from breathsplat.scripts.reconstruct import cmd_reconstruct
from breathsplat.scripts.simulate import cmd_simulate
from breathsplat.scripts.utils.cli_utils import setup_parser


COMMANDS = {
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "evaluate": cmd_evaluate,
    "preview": cmd_preview,
}


def main(argv: list[str] | None = None) -> int:
    """Entry point of the `breathsplat` command; argparse exits with 2 on usage errors."""
    args = setup_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
