"""
Command-line entry point: `gen-data`, `unmix`, `eval` and `sweep`.

Each subcommand is a management command; `python manage.py <command>`
is equivalent.
"""
import os
import sys

from django.core.management import call_command
from django.core.management.base import CommandError

from core.management.base import EXIT_USAGE

COMMANDS = {
    'gen-data': 'gen_data',
    'unmix': 'unmix',
    'eval': 'evaluate',
    'sweep': 'sweep',
}

USAGE = 'usage: hsu {gen-data,unmix,eval,sweep} [options]\n'


def run_cli(argv=None, stdout=None, stderr=None):
    """Run one subcommand and return the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    stderr = stderr or sys.stderr
    if not argv or argv[0] not in COMMANDS:
        stderr.write(USAGE)
        return EXIT_USAGE
    try:
        call_command(COMMANDS[argv[0]], *argv[1:], stdout=stdout)
    except CommandError as exc:
        stderr.write(f'{exc}\n')
        # argparse failures surface with Django's default code 1
        return EXIT_USAGE if exc.returncode == 1 else exc.returncode
    return 0


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'app.settings')
    import django
    django.setup()
    sys.exit(run_cli())


if __name__ == '__main__':
    main()
