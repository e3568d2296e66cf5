"""Exception types shared across the package."""

from __future__ import annotations


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge or hit a pole.

    Carries an optional location (a time or abscissa) so drivers can report
    where the failure happened.
    """

    def __init__(self, message: str, where: float | None = None):
        self.where = where
        if where is not None:
            message = f"{message} (at t={where:.12g})"
        super().__init__(message)


class OracleCheckError(RuntimeError):
    """A dilation-oracle identity exceeded its tolerance."""

    def __init__(self, identity: str, residual: float, t: float):
        self.identity = identity
        self.residual = residual
        self.t = t
        super().__init__(
            f"oracle identity '{identity}' failed at t={t:.12g}: "
            f"residual {residual:.3e}"
        )
