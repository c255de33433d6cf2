"""Flat ``key = value`` configuration files."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .errors import ConfigError

_MISSING = object()


class Config:
    """Parsed configuration with typed accessors.

    Every accessor raises :class:`ConfigError` naming the file and key.
    Relative paths resolve against the config file's directory.
    """

    def __init__(self, values: dict[str, str], path: str | None = None):
        self.values = dict(values)
        self.path = path
        self.used: set[str] = set()

    @classmethod
    def parse(cls, text: str, path: str | None = None) -> "Config":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'", path)
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError(f"line {lineno}: empty key", path)
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key", path, key)
            values[key] = value
        return cls(values, path)

    @classmethod
    def load(cls, path: str | Path) -> "Config":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
        return cls.parse(text, str(path))

    def __contains__(self, key):
        return key in self.values

    def set(self, key: str, value) -> None:
        self.values[key] = str(value)

    def _raw(self, key, default):
        if key in self.values:
            self.used.add(key)
            return self.values[key]
        if default is _MISSING:
            raise ConfigError("missing required key", self.path, key)
        return default

    def _convert(self, key, raw, kind):
        try:
            return kind(raw)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"cannot parse {raw!r} as {kind.__name__}", self.path, key) from None

    def text(self, key, default=_MISSING):
        return self._raw(key, default)

    def integer(self, key, default=_MISSING) -> int:
        raw = self._raw(key, default)
        return raw if raw is default else self._convert(key, raw, int)

    def number(self, key, default=_MISSING) -> float:
        raw = self._raw(key, default)
        if raw is default:
            return raw
        return float(self._convert(key, raw, Fraction))

    def flag(self, key, default=_MISSING) -> bool:
        raw = self._raw(key, default)
        if raw is default:
            return raw
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot parse {raw!r} as bool", self.path, key)

    def items(self, key, default=_MISSING) -> list[str]:
        raw = self._raw(key, default)
        if raw is default:
            return raw
        return [item.strip() for item in raw.split(",") if item.strip()]

    def numbers(self, key, default=_MISSING) -> list[float]:
        items = self.items(key, default)
        if items is default:
            return items
        return [float(self._convert(key, item, Fraction)) for item in items]

    def path_of(self, key, default=_MISSING) -> Path | None:
        raw = self._raw(key, default)
        if raw is default or raw is None:
            return raw
        p = Path(raw)
        if not p.is_absolute() and self.path:
            p = Path(self.path).parent / p
        return p

    def unused(self) -> list[str]:
        return sorted(set(self.values) - self.used)
