"""Exception types shared across the package."""


class ContractError(ValueError):
    """A caller passed arguments that violate an operation's preconditions."""


class NonFiniteError(FloatingPointError):
    """A loss, TD error or value became NaN or infinite."""


class UnsupportedOperation(TypeError):
    """The operation is not defined for this kind of object (e.g. a continuous env)."""


class FrozenError(RuntimeError):
    """Attempt to train a network whose weights have been frozen."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
