"""Exception types shared across the simulator."""


class DegenerateGeometryError(ValueError):
    """Two terminals coincide, so link angles are undefined."""


class NumericalRankError(ValueError):
    """A matrix that must be full rank (pilot Gram, codeword matrix, channel) is not."""


class NoChannelError(ValueError):
    """All singular values are zero; there is no channel to allocate power on."""


class ConfigError(ValueError):
    """Experiment config is malformed; message carries the offending key path."""
