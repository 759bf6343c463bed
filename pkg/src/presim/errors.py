"""Exception taxonomy shared across the package."""


class ConfigurationError(ValueError):
    """A model or engine was constructed with out-of-range parameters."""


class ValidationError(ConfigurationError):
    """A scenario document failed validation.

    The message always names the offending path (e.g. ``sector.half_life``).
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SimulationLogicError(RuntimeError):
    """An internal contract was violated mid-run (a model bug, not bad input).

    Raised, for example, when an event is scheduled in the past. A run that
    trips this must abort; results would be meaningless.
    """
