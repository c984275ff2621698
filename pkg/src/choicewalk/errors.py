"""Exception types raised by choicewalk."""


class ChoiceWalkError(Exception):
    """Base class for all library errors."""


class GraphParseError(ChoiceWalkError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GenerationError(ChoiceWalkError, RuntimeError):
    """Raised when a connected sample could not be drawn within the retry budget."""

    def __init__(self, message, retries):
        self.retries = retries
        super().__init__(f"{message} (after {retries} attempts)")


class StuckWalkError(ChoiceWalkError, RuntimeError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"walk is stuck at isolated node {node}")


class CapExceededError(ChoiceWalkError, RuntimeError):
    """The step cap was hit before every node was visited.

    ``record`` holds the partial :class:`~choicewalk.metrics.RunRecord`
    (``cover_steps`` is the step count reached, not a cover).
    """

    def __init__(self, record, covered):
        self.record = record
        self.covered = covered
        super().__init__(
            f"step cap {record.cover_steps} reached with {covered}/{len(record.visit_counts)} nodes covered"
        )


class OracleError(ChoiceWalkError, ValueError):
    pass


class OracleTooLarge(OracleError):
    pass


class InfiniteExpectation(OracleError):
    pass
