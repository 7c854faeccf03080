from typing import Any, Collection, List, Optional, Tuple, TYPE_CHECKING

if TYPE_CHECKING:
    from .instance import ValidationReport


class QPError(Exception):
    pass


class ConfigurationError(QPError, ValueError):
    pass


def assert_config(value, options: Collection, msg='Got %r, expected one of %s'):
    if value not in options:
        raise ConfigurationError(msg % (value, options))


class DimensionMismatchError(QPError, ValueError):
    pass


class InstanceError(QPError):
    """Raised when an operation that requires a valid instance receives an invalid one.

    The violations found by ``validate`` are available as ``report``.
    """
    report: 'Optional[ValidationReport]'

    def __init__(self, message: str, report: 'Optional[ValidationReport]' = None):
        super(InstanceError, self).__init__(message)
        self.report = report


class InstanceParseError(InstanceError):
    """An instance document could not be read.

    Parameters:
        line, column: position of the offending text (1-based), or -1 when unknown
        field: name of the document field being read, if any

    After catching it, ``get_context(text)`` returns the offending line with a caret under it.
    """
    line: int
    column: int
    field: Optional[str]

    def __init__(self, message: str, line: int = -1, column: int = -1, field: Optional[str] = None, source: Optional[str] = None):
        self.line = line
        self.column = column
        self.field = field
        self.source = source
        where = []
        if source:
            where.append(source)
        if line > 0:
            where.append("line %d column %d" % (line, column))
        if field:
            where.append("field %r" % field)
        if where:
            message = "%s (at %s)" % (message, ', '.join(where))
        super(InstanceParseError, self).__init__(message)

    def get_context(self, text: str, span: int = 40) -> str:
        if self.line <= 0:
            return ''
        lines = text.split('\n')
        if self.line > len(lines):
            return ''
        line = lines[self.line - 1]
        col = max(self.column - 1, 0)
        start = max(col - span, 0)
        return line[start:col + span] + '\n' + ' ' * (col - start) + '^\n'


class SchemaVersionError(InstanceParseError):
    pass


class SolverError(QPError):
    pass


class IterationLimitError(SolverError):
    """An iterative method stopped at its iteration limit without a trustworthy answer.

    ``residual`` holds the last residual, so callers can decide whether to retry with a larger limit.
    """
    def __init__(self, method: str, iterations: int, residual: float = float('nan')):
        super(IterationLimitError, self).__init__(
            "%s reached its iteration limit (%d) with residual %.3g" % (method, iterations, residual))
        self.method = method
        self.iterations = iterations
        self.residual = residual


class SearchIncomplete(SolverError):
    """Branch-and-bound ran out of its node budget before proving optimality.

    This is not a solve status: the search result is unknown.
    """
    def __init__(self, nodes: int, incumbent_value: Optional[float] = None):
        msg = "Branch-and-bound node budget exhausted after %d nodes" % nodes
        if incumbent_value is not None:
            msg += " (best value found: %.10g)" % incumbent_value
        super(SearchIncomplete, self).__init__(msg)
        self.nodes = nodes
        self.incumbent_value = incumbent_value


class EnumerationLimitError(SolverError):
    def __init__(self, count: int, limit: int):
        super(EnumerationLimitError, self).__init__(
            "Enumeration would visit %d integer assignments, more than the limit %d" % (count, limit))
        self.count = count
        self.limit = limit


class TrainingDivergedError(QPError):
    def __init__(self, epoch: int, last_finite_loss: Optional[float]):
        super(TrainingDivergedError, self).__init__(
            "Training loss became non-finite at epoch %d (last finite loss: %r)" % (epoch, last_finite_loss))
        self.epoch = epoch
        self.last_finite_loss = last_finite_loss


class CounterexampleFailure(QPError):
    """A counter-example pair failed one of its clauses.

    Parameters:
        pair: name of the corpus pair
        failures: list of (clause, detail)
    """
    def __init__(self, pair: str, failures: List[Tuple[str, str]]):
        lines = '\n'.join('\t* %s: %s' % f for f in failures)
        super(CounterexampleFailure, self).__init__("Counter-example pair %r failed:\n%s" % (pair, lines))
        self.pair = pair
        self.failures = failures
