"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigError(ValueError):
    """Invalid configuration. Carries every problem found, not just the first."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class EstimationError(RuntimeError):
    """Not enough usable data to produce an estimate."""


class EnumerationGuardError(RuntimeError):
    """Cylinder enumeration would exceed the configured size guard."""

    def __init__(self, n_words, limit):
        self.n_words = n_words
        self.limit = limit
        super().__init__(
            f"enumeration needs {n_words} words, guard is {limit}")
