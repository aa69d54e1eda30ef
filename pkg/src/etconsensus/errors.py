"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A scenario or model definition is invalid."""


class NumericalDivergence(RuntimeError):
    """Integration produced non-finite or inadmissible values.

    Parameters
    ----------
    message : str
        Human readable diagnostic.
    step : int, optional
        Integration step at which the failure was detected.
    node : int, optional
        1-based index of the offending node, when one can be named.
    """

    def __init__(self, message, step=None, node=None):
        super().__init__(message)
        self.step = step
        self.node = node

    def __str__(self):
        where = []
        if self.step is not None:
            where.append(f"step={self.step}")
        if self.node is not None:
            where.append(f"node={self.node}")
        base = super().__str__()
        return f"{base} ({', '.join(where)})" if where else base
