"""Exception hierarchy shared by every stage of the tissue."""


class TissueError(Exception):
    """Base class for all errors raised by somtissue."""


class ConfigError(TissueError):
    """Invalid dimensions, schedules, rulesets or pipeline configuration."""


class InputError(TissueError):
    """A record or vector that does not fit the running tissue."""


class SnapshotError(TissueError):
    """A snapshot that cannot be loaded (bad magic, version or content)."""
