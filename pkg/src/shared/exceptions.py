"""Exception types raised across isingvote."""

from typing import Optional


class IsingVoteError(Exception):
    """Base class for all isingvote errors."""


class ConfigurationError(IsingVoteError, ValueError):
    """Invalid parameters, graphs or experiment configurations."""


class ConvergenceError(IsingVoteError, RuntimeError):
    """A numerical routine did not reach its tolerance."""

    def __init__(self, message: str, residual: Optional[float] = None):
        if residual is not None:
            message = f"{message} (residual={residual:.3e})"
        super().__init__(message)
        self.residual = residual
