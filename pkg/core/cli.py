"""
Console entry point: ``pst <subcommand> ...`` outside of manage.py.
"""
import logging
import os
import sys

import django
from django.core.management import call_command
from django.core.management.base import CommandError

from core.management.commands.pst import EX_USAGE, SUBCOMMANDS, SYNOPSIS, UsageError

logger = logging.getLogger(__name__)


def run(argv, stdout=None, stderr=None) -> int:
    """
    Run one subcommand and return its exit status.

    0 on success, 1 when the input fails a precondition or validation,
    2 on an internal error and 64 for a malformed command line.
    """
    argv = [str(arg) for arg in argv]
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if argv[:1] in (['-h'], ['--help']):
        stdout.write(SYNOPSIS)
        return 0
    if not argv or argv[0] not in SUBCOMMANDS:
        if argv:
            stderr.write(f"Unknown subcommand '{argv[0]}'\n")
        stderr.write(SYNOPSIS)
        return EX_USAGE

    try:
        call_command('pst', *argv, stdout=stdout, stderr=stderr)
    except UsageError as exc:
        stderr.write(f"{exc}\n\n{SYNOPSIS}")
        return exc.returncode
    except CommandError as exc:
        stderr.write(f"Error: {exc}\n")
        return exc.returncode
    except SystemExit as exc:
        # argparse exits after printing --help
        return exc.code if isinstance(exc.code, int) else 0
    except Exception:
        logger.exception("pst %s failed", argv[0])
        return 2
    return 0


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'pstlab.settings')
    django.setup()
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
