"""
Shared behaviour of the unmixing management commands.
"""
from django.core.management.base import BaseCommand, CommandError

from core.exceptions import ConfigError, DataError, Diverged

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIVERGED = 4


class HsuCommand(BaseCommand):
    """Run `run()` and turn project errors into CommandError exit codes."""

    def run(self, *args, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=EXIT_USAGE) from exc
        except (DataError, OSError) as exc:
            raise CommandError(str(exc), returncode=EXIT_DATA) from exc
        except Diverged as exc:
            raise CommandError(str(exc), returncode=EXIT_DIVERGED) from exc
