"""Error hierarchy shared across packages"""


class HSTMixerError(Exception):
    """Base class for every error raised on purpose by this project."""
    pass


class ConfigError(HSTMixerError):
    """Raised when a configuration is invalid or a required input is missing."""
    pass


class DataError(HSTMixerError):
    """Raised when a dataset or split cannot be used."""
    pass


class DataFormatError(DataError):
    """Raised when a file does not follow its declared format."""
    pass


class NumericalError(HSTMixerError):
    """Raised on NaN/inf values or a failed gradient check."""
    pass
