"""Exception types shared across the package."""


class ParseError(ValueError):
    """An input file (edge list, partition, weights, sequence) is malformed."""


class ConfigError(ValueError):
    """An experiment configuration is inconsistent or incomplete."""


class NumericalFailure(RuntimeError):
    """A numerical sanity check failed (singular block, broken conservation)."""
