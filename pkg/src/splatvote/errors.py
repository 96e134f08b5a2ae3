"""Exception hierarchy shared by all splatvote modules.

The CLI maps these onto process exit codes, so library code should raise
the most specific class that applies.
"""


class SplatVoteError(Exception):
    """Base class for all library errors."""


class UsageError(SplatVoteError):
    """Invalid call: empty inputs, bad parameter ranges, unknown names."""


class FormatError(SplatVoteError):
    """A file does not match its documented on-disk format."""


class DataError(SplatVoteError):
    """A file parsed but carries invalid values (NaN, bad ranges, ...)."""


class DimensionError(SplatVoteError):
    """Shapes of paired inputs disagree (mask vs camera, mask vs scene, ...)."""
