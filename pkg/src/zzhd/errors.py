"""Exception types that map onto CLI exit codes."""


class ConfigError(Exception):
    """Bad configuration or unusable input data; CLI exit code 1."""


class InternalError(Exception):
    """A broken internal invariant (a bug, not a user error); CLI exit code 2."""
