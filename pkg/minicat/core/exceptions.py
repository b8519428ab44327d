__all__ = (
    "ConfigError",
    "ContractError",
    "IngestError",
    "InvariantError",
    "MetricError",
    "MinicatError",
    "PlantError",
    "StageError",
)


class MinicatError(Exception): ...


class IngestError(MinicatError, ValueError):
    """Malformed catalog or sales file. `line` is the 1-based physical line, when known."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ContractError(MinicatError): ...


class ConfigError(MinicatError, ValueError): ...


class PlantError(MinicatError, ValueError): ...


class MetricError(MinicatError, ValueError): ...


class InvariantError(MinicatError): ...


class StageError(MinicatError):
    """A pipeline stage failed. Wraps the original error and names the stage."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")
