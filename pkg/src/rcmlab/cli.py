"""
The rcm-lab console entry point.

    rcm-lab <command> [options]

Each command is a Django management command of the rcmlab app; main sets
up Django, parses the arguments, runs the command and returns its exit
status instead of calling sys.exit.
"""

import os
import sys

import django
from django.core.management import load_command_class
from django.core.management.base import CommandError

from rcmlab.management.base import USAGE

COMMANDS = ("dynamic", "env", "green", "llt", "potential", "sigma", "theta", "verify")

USAGE_TEXT = (
    f"usage: rcm-lab {{{','.join(COMMANDS)}}} [--config FILE] [--seed N] [--out DIR] "
    "[--format csv|json] [--threads N] ..."
)


def main(argv=None) -> int:
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "rcmlab.settings")
    django.setup()
    argv = list(sys.argv[1:] if argv is None else argv)

    if not argv or argv[0] in ("-h", "--help"):
        sys.stdout.write(USAGE_TEXT + "\n")
        return 0 if argv else USAGE
    name, rest = argv[0], argv[1:]
    if name not in COMMANDS:
        sys.stderr.write(f"rcm-lab: unknown command '{name}'\n{USAGE_TEXT}\n")
        return USAGE

    command = load_command_class("rcmlab", name)
    parser = command.create_parser("rcm-lab", name)
    try:
        options = parser.parse_args(rest)
    except CommandError as e:
        sys.stderr.write(f"rcm-lab {name}: {e}\n")
        parser.print_usage(sys.stderr)
        return USAGE
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else 0

    cmd_options = vars(options)
    args = cmd_options.pop("args", ())
    try:
        command.execute(*args, **cmd_options)
    except CommandError as e:
        sys.stderr.write(f"rcm-lab {name}: {e}\n")
        return e.returncode
    return 0


if __name__ == "__main__":
    sys.exit(main())
