"""Error categories shared across the toolkit.

The CLI maps these to distinct exit codes, so data problems and numerical
failures must stay distinguishable from plain usage mistakes (ValueError).
"""


class DataError(Exception):
    """Malformed, inconsistent, or out-of-range input data."""


class NumericalError(Exception):
    """An iterative numerical routine failed to converge or produced garbage."""
