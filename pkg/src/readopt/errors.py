"""Exception hierarchy shared by every readopt module."""


class ReadoptError(Exception):
    """Base class for all library errors."""


class EmptyInput(ReadoptError):
    pass


class InvalidGenome(ReadoptError):
    pass


class DegenerateStats(ReadoptError):
    pass


class InsufficientSentences(ReadoptError):
    pass


class FormatError(ReadoptError):
    """A data file could not be parsed.

    ``line`` is the 1-based line (or record) number when known.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class OutOfVocabulary(ReadoptError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NoCandidates(ReadoptError):
    pass


class SearchSpaceTooLarge(ReadoptError):
    pass


class InvalidObjectives(ReadoptError):
    pass


class EmptyDistribution(ReadoptError):
    pass


class NumericalError(ReadoptError):
    pass


class OracleScaleExceeded(ReadoptError):
    pass


class ProviderError(ReadoptError):
    """A synonym source could not be loaded."""
