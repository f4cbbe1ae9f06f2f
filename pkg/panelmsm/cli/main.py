"""Command line entry point.

Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.
"""

import argparse
import sys

from nxtools import log_to_file, log_traceback, logging

from panelmsm.cli import bench, bias_demo, empirical, fit, loglik, simulate, transition
from panelmsm.config import msmconfig
from panelmsm.exceptions import PanelMSMException
from panelmsm.version import __version__

COMMANDS = [simulate, fit, loglik, empirical, bench, bias_demo, transition]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panelmsm",
        description="Multistate Markov models for panel data",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--log-file", default=None, help="Also log to this file")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.add_parser(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.user = msmconfig.log_user
    log_file = args.log_file or msmconfig.log_file
    if log_file is not None:
        logging.add_handler(log_to_file(log_file))

    try:
        args.func(args)
    except PanelMSMException as e:
        logging.error(f"{args.command}: {e.detail}")
        return e.status
    except KeyboardInterrupt:
        logging.warning("Interrupted")
        return 1
    except Exception:
        log_traceback(f"Unhandled error in {args.command}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
