"""Exception and warning taxonomy shared across the package."""


class VerigragError(Exception):
    """Base class for all package errors."""


class VerilogSyntaxError(VerigragError):
    """Malformed input within the supported Verilog subset."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, col {col})" if line else message)
        self.line = line
        self.col = col


class UnsupportedConstruct(VerigragError):
    """Valid Verilog that falls outside the supported subset.

    Kept distinct from :class:`VerilogSyntaxError` so corpus ingestion can
    skip-and-log these files instead of treating them as corrupt input.
    """

    def __init__(self, construct: str, line: int = 0, col: int = 0):
        super().__init__(f"unsupported construct: {construct}"
                         + (f" (line {line}, col {col})" if line else ""))
        self.construct = construct
        self.line = line
        self.col = col


class ElaborationError(VerigragError):
    """Structural problem found while building the data-path graph."""


class SchemaError(VerigragError):
    """Unknown schema version or missing/ill-typed fields in a container."""


class DomainError(VerigragError):
    """Argument outside its documented domain."""


class ShapeError(VerigragError):
    """Tensor/matrix dimensions inconsistent with the operation's contract."""


class EmptyGraphError(VerigragError):
    """Graph with no nodes where a non-empty graph is required."""


class EmptyCodeError(VerigragError):
    """Code input that tokenizes to nothing."""


class EmptyQueryError(VerigragError):
    """Query text that is empty or tokenizes to nothing."""


class ConfigError(VerigragError):
    """Invalid training or pipeline configuration."""


class DegenerateInputError(VerigragError):
    """Input that makes the operation meaningless (e.g. zero-norm rows)."""


class DegenerateBatchError(VerigragError):
    """Batch whose labels are all identical where both classes are required."""


class DuplicateIdError(VerigragError):
    """Duplicate identifier where uniqueness is required."""


class PipelineConfigError(VerigragError):
    """Incompatible checkpoint dimensions when assembling the pipeline."""


class CheckerUnavailable(VerigragError):
    """Checker command could not be executed (environment problem)."""


class NoTasksError(VerigragError):
    """Benchmark directory contains no tasks."""


class DegenerateInputWarning(UserWarning):
    """Training batch where negatives coincide with positives."""


class RetrievalEmptyWarning(UserWarning):
    """Retrieval index is empty; generation falls back to no prompt."""
