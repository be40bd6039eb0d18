"""Exception hierarchy shared across poasim."""


class PoaSimError(Exception):
    """Base class for every error raised by poasim."""


class ConfigError(PoaSimError):
    """Invalid scenario, sweep or plan configuration."""

    def __init__(self, message: str, details: list[str] | None = None) -> None:
        """
        Create a configuration error.

        Args:
            message: Summary of what is wrong.
            details: Optional field-level diagnostics, one entry per problem.

        """
        super().__init__(message)
        self.details = details or []

    def __str__(self) -> str:
        """Render the summary followed by the field-level diagnostics."""
        base = super().__str__()
        if not self.details:
            return base
        return base + "\n" + "\n".join(f"  - {line}" for line in self.details)


class PlanError(ConfigError):
    """An attack plan cannot be built for the requested parameters."""


class ChainStructureError(PoaSimError):
    """A chain view violates its structural invariants."""


class BlockQueryError(PoaSimError):
    """A block query referenced a block off the canonical branch."""


class InvalidBlockError(PoaSimError):
    """A block failed the protocol validation gate."""


class SimulationError(PoaSimError):
    """A simulation run failed at runtime."""
