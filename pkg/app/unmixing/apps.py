import logging

from django.apps import AppConfig
from django.conf import settings

logger = logging.getLogger(__name__)


class UnmixingConfig(AppConfig):
    name = 'unmixing'

    def ready(self):
        threads = int(getattr(settings, 'HSU_THREADS', 0))
        if threads <= 0:
            return
        try:
            import numba
        except ImportError:
            return
        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
        logger.debug('numba parallel region width set to %d.',
                     numba.get_num_threads())
