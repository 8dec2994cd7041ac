"""
Plain-text run configuration: one `key = value` per line, `#` comments.
"""
from pathlib import Path

from core.exceptions import ConfigError


def parse_run_config(text, source='<config>'):
    """Return the raw key/value strings; validation is the serializer's job."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(
                f'{source}:{lineno}: expected "key = value", got {raw!r}.'
            )
        if key in values:
            raise ConfigError(f'{source}:{lineno}: duplicate key {key!r}.')
        values[key] = value
    return values


def read_run_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f'Cannot read config {path}: {exc}') from exc
    return parse_run_config(text, source=str(path))
