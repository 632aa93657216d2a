"""Exception hierarchy shared across the package."""


class GraphRefError(Exception):
    """Base class for all graphref errors."""


class ElementNotFoundError(GraphRefError):
    """A vertex, edge, or face id does not resolve to a live element."""

    def __init__(self, kind: str, element_id: int):
        self.kind = kind
        self.element_id = element_id
        super().__init__(f"no such {kind}: {element_id}")


class InvariantViolationError(GraphRefError):
    """Internal consistency of a graph (or a repair result) is broken."""


class FamilyMismatchError(GraphRefError):
    """An operation was applied to a graph of the wrong structural family."""


class ParseError(GraphRefError):
    """Malformed input data. Carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", col {col})" if col is not None else ")")
        super().__init__(message + where)


class UnsupportedFeatureError(ParseError):
    """Input uses a feature outside the supported subset (e.g. quad faces)."""


class DslSyntaxError(ParseError):
    """Constraint-language syntax error with the expected token set."""

    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.expected = expected
        if expected:
            message = f"{message}; expected one of: {', '.join(expected)}"
        super().__init__(message, line, col)


class DslSemanticError(GraphRefError):
    """Well-formed constraint text referencing an unknown or misused name."""

    def __init__(self, message: str, token: str, line: int | None = None):
        self.token = token
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class OpNotApplicableError(GraphRefError):
    """A mutation operator found no applicable element; caller should retry."""


class MutationFailureError(GraphRefError):
    """The mutation retry budget was exhausted without applying the requested ops."""


class ConfigError(GraphRefError):
    """Invalid campaign configuration."""


class TargetError(GraphRefError):
    """The target program could not be spawned at all."""
