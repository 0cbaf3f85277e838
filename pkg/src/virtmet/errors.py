"""Exception types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateCloud(WorkbenchError):
    """Point cloud carries too little information for the requested fit."""


class NearParallel(WorkbenchError):
    """Planes (or a line and a plane) too close to parallel to intersect."""


class NoConvergence(WorkbenchError):
    """Iterative fit failed to converge within its iteration budget."""


class ZeroFlatnessInput(WorkbenchError):
    """A coplanar patch cannot be scaled to a nonzero flatness target."""


class ParseError(WorkbenchError):
    """Malformed input file or table.

    Attributes:
        line: 1-based line (or row) number where parsing failed.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class OutOfTable(WorkbenchError):
    """Levels/parameters combination outside the array selector table."""


class TooManyFactors(WorkbenchError):
    """More factors than the orthogonal array has columns."""


class IncompletePlan(WorkbenchError):
    """Run records do not cover the full experiment plan."""


class ConfigError(WorkbenchError):
    """Invalid study configuration; message names the offending field."""
