"""Exception types raised across the package."""


class GraphRepairError(Exception):
    """Base class for all package errors."""


class UnknownRecord(GraphRepairError):
    """An edge references a record id that was never declared."""


class InvalidSimilarity(GraphRepairError):
    """A similarity value falls outside [0, 1]."""


class SelfLoopEdge(GraphRepairError):
    """An edge connects a record to itself."""


class DuplicateEdge(GraphRepairError):
    """The same unordered record pair appears twice."""


class MissingEdge(GraphRepairError):
    """An operation was asked about an edge the graph does not contain."""


class InsufficientTraining(GraphRepairError):
    """Training data does not contain both classes."""


class MissingFeature(GraphRepairError):
    """An edge has no feature vector; the feature space is out of sync."""


class MissingGold(GraphRepairError):
    """A record has no gold entity assignment."""


class OracleUnavailable(GraphRepairError):
    """The labeling oracle timed out, was closed, or cannot answer."""


class ParseError(GraphRepairError):
    """A data file is malformed. Carries the 1-based line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class DuplicateRecordId(GraphRepairError):
    """Two records share the same record id."""
