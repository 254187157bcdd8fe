"""Exception types shared across the package."""


class FhutchError(Exception):
    """Base class for all package errors."""


class InputError(FhutchError, ValueError):
    """Malformed input: empty samples, bad sizes, non-finite coordinates."""


class DimensionError(InputError):
    """Two objects that must share an ambient dimension do not."""


class DomainError(FhutchError, ValueError):
    """A function was evaluated outside its domain (e.g. F at alpha <= 0)."""


class UnsupportedMetricError(FhutchError):
    """The grid-accelerated path needs a metric monotone in Euclidean distance."""


class ConfigError(FhutchError, ValueError):
    """A system config failed validation.

    ``errors`` holds ``(field_path, message)`` pairs; ``str()`` renders them
    one per line as ``path: message``.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(f"{path}: {msg}" for path, msg in self.errors))
