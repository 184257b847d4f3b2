class RigError(Exception):
    """Base class for toolkit errors."""


class DimensionError(RigError, ValueError):
    pass


class DegenerateBasisError(RigError, ValueError):
    pass


class DegenerateSeedError(RigError, ValueError):
    pass


class ConditioningError(RigError, ValueError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class PreconditionError(RigError, ValueError):
    pass


class ConfigError(RigError, ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
