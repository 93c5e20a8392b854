"""Exception types shared across the toolkit."""


class TonevalError(Exception):
    """Base class for all toolkit errors."""


class TextGridError(TonevalError):
    """Malformed TextGrid content. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class AudioFormatError(TonevalError):
    """Unreadable or unsupported audio container/codec."""


class LexiconError(TonevalError):
    """Invalid normalization lexicon file or rule set."""


class NormalizationError(TonevalError):
    """Input that the loaded lexicon cannot normalize (e.g. too-large numeral)."""


class SchemaError(TonevalError):
    """CSV/manifest rows violating a required schema. Carries the row number when known."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)
