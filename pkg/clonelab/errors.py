"""Error hierarchy shared by the algebra modules, the CLI and the HTTP service."""


class ClonelabError(Exception):
    """Base class for all workbench errors."""
    pass


class BudgetExceeded(ClonelabError):
    """Raised when a search or closure runs past its configured budget."""

    def __init__(self, message: str, budget: int, used: int):
        super().__init__(message)
        self.budget = budget
        self.used = used
