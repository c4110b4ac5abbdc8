"""Exception hierarchy.

Errors that describe bad input subclass ``ValueError`` so that callers used to
scikit-learn conventions can keep catching that.
"""


class InterpStabError(Exception):
    """Base class for every error raised by this package."""


# -- data -------------------------------------------------------------------

class DatasetError(InterpStabError, ValueError):
    """Dataset could not be loaded or violates a dataset invariant."""


class DatasetLoad(DatasetError):
    """The dataset file could not be read."""


class MissingColumn(DatasetError):
    pass


class ParseError(DatasetError):
    def __init__(self, row, col, message):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, column {col!r}: {message}")


class SingleClassDataset(DatasetError):
    pass


class EmptyDataset(DatasetError):
    pass


class CannotStratify(DatasetError):
    """A resample kept coming out single-class after the retry budget."""


# -- models / explainers ----------------------------------------------------

class NonFinite(InterpStabError, ArithmeticError):
    """Model fitting produced a non-finite loss or parameter."""


class WidthMismatch(InterpStabError, ValueError):
    pass


class TooManyFeatures(InterpStabError, ValueError):
    pass


class EmptyBackground(InterpStabError, ValueError):
    pass


class DegenerateSamples(InterpStabError, ValueError):
    pass


# -- rank metrics -----------------------------------------------------------

class MismatchedElements(InterpStabError, ValueError):
    pass


class TooFewRankings(InterpStabError, ValueError):
    pass


class RankTooShort(InterpStabError, ValueError):
    pass


class LengthMismatch(InterpStabError, ValueError):
    pass


class TooFewValues(InterpStabError, ValueError):
    pass


# -- harness / cli ----------------------------------------------------------

class ConfigInvalid(InterpStabError, ValueError):
    pass


class RecordsError(InterpStabError, ValueError):
    """Persisted trial records cannot be used."""


class SchemaVersionUnsupported(RecordsError):
    pass


class CorruptRecord(RecordsError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class NoRecords(RecordsError):
    pass
